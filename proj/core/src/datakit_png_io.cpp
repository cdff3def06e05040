#include "mddr/datakit/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "mddr/common/errors.hpp"

namespace mddr::datakit {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

ImageU8 read_png_rgb(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("png: cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: read struct allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: info struct allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png: failed to decode " + path.string());
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_read_update_info(png, info);

    ImageU8 img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    const size_t rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<size_t>(img.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png: " + path.string() + " did not decode to 8-bit RGB");
    }

    img.rgb.resize(static_cast<size_t>(img.height) * img.width * 3);
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        rows[static_cast<size_t>(y)] = img.rgb.data() + static_cast<size_t>(y) * img.width * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png_rgb(const std::filesystem::path& path, const ImageU8& image) {
    if (image.rgb.size() != static_cast<size_t>(image.width) * image.height * 3) {
        throw ValidationError("png: pixel buffer size does not match width*height*3");
    }
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("png: cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: write struct allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png: info struct allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png: failed to encode " + path.string());
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(image.rgb.data() +
                                                 static_cast<size_t>(y) * image.width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor image_u8_to_float(const ImageU8& image) {
    Tensor out({3, image.height, image.width});
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const size_t base = (static_cast<size_t>(y) * image.width + x) * 3;
            for (int c = 0; c < 3; ++c) {
                out.at3(c, y, x) = static_cast<float>(image.rgb[base + static_cast<size_t>(c)]) / 255.0f;
            }
        }
    }
    return out;
}

ImageU8 float_to_image_u8(const Tensor& image) {
    if (image.ndim() != 3 || image.dim(0) != 3) {
        throw ShapeError("float_to_image_u8: expected 3xHxW image");
    }
    ImageU8 out;
    out.height = image.dim(1);
    out.width = image.dim(2);
    out.rgb.resize(static_cast<size_t>(out.height) * out.width * 3);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const size_t base = (static_cast<size_t>(y) * out.width + x) * 3;
            for (int c = 0; c < 3; ++c) {
                const float v = std::min(1.0f, std::max(0.0f, image.at3(c, y, x)));
                out.rgb[base + static_cast<size_t>(c)] =
                    static_cast<unsigned char>(std::lround(v * 255.0f));
            }
        }
    }
    return out;
}

}  // namespace mddr::datakit
