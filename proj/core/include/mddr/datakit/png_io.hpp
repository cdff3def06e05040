#pragma once

#include <filesystem>
#include <vector>

#include "mddr/common/tensor.hpp"

namespace mddr::datakit {

/// 8-bit RGB image, row-major HWC.
struct ImageU8 {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> rgb;  // height * width * 3
};

/// Decodes a PNG to 8-bit RGB (palette and 16-bit inputs are converted,
/// alpha is stripped, grayscale is expanded). Throws IoError on failure.
ImageU8 read_png_rgb(const std::filesystem::path& path);

void write_png_rgb(const std::filesystem::path& path, const ImageU8& image);

/// [0,1] float CHW <-> 8-bit conversion; quantization error is at most 1/255.
Tensor image_u8_to_float(const ImageU8& image);
ImageU8 float_to_image_u8(const Tensor& image);

}  // namespace mddr::datakit
