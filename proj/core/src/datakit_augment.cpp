#include "mddr/datakit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "mddr/common/errors.hpp"
#include "mddr/datakit/preprocess.hpp"

namespace mddr::datakit {

namespace {

constexpr double kPi = 3.14159265358979323846;

float sample_clamped(const Tensor& img, int c, double y, double x) {
    const int H = img.dim(1), W = img.dim(2);
    y = std::min(std::max(y, 0.0), static_cast<double>(H - 1));
    x = std::min(std::max(x, 0.0), static_cast<double>(W - 1));
    const int y0 = static_cast<int>(y), x0 = static_cast<int>(x);
    const int y1 = std::min(y0 + 1, H - 1), x1 = std::min(x0 + 1, W - 1);
    const double wy = y - y0, wx = x - x0;
    return static_cast<float>((1 - wy) * ((1 - wx) * img.at3(c, y0, x0) + wx * img.at3(c, y0, x1)) +
                              wy * ((1 - wx) * img.at3(c, y1, x0) + wx * img.at3(c, y1, x1)));
}

Tensor rotate_image(const Tensor& img, double degrees) {
    const int C = img.dim(0), H = img.dim(1), W = img.dim(2);
    const double rad = degrees * kPi / 180.0;
    const double cs = std::cos(rad), sn = std::sin(rad);
    const double cy = (H - 1) / 2.0, cx = (W - 1) / 2.0;
    Tensor out({C, H, W});
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                // inverse-map the output pixel into the source image
                const double dy = y - cy, dx = x - cx;
                const double sy = cs * dy + sn * dx + cy;
                const double sx = -sn * dy + cs * dx + cx;
                out.at3(c, y, x) = sample_clamped(img, c, sy, sx);
            }
        }
    }
    return out;
}

Tensor crop_resize(const Tensor& img, int oy, int ox, int size) {
    const int C = img.dim(0), H = img.dim(1), W = img.dim(2);
    Tensor crop({C, size, size});
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                crop.at3(c, y, x) = img.at3(c, oy + y, ox + x);
            }
        }
    }
    return resize_bilinear(crop, H, W);
}

}  // namespace

Tensor mirror_horizontal(const Tensor& image) {
    if (image.ndim() != 3) throw ShapeError("mirror_horizontal: expected CHW image");
    const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
    Tensor out({C, H, W});
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) out.at3(c, y, x) = image.at3(c, y, W - 1 - x);
        }
    }
    return out;
}

FaceSample augment(const FaceSample& sample, Rng& rng, const AugmentPolicy& policy) {
    FaceSample out = sample;
    if (!policy.any()) return out;
    if (out.image.ndim() != 3) throw ShapeError("augment: expected CHW image");
    const int H = out.image.dim(1);

    if (policy.horizontal_flip) {
        if (rng.bernoulli(0.5)) out.image = mirror_horizontal(out.image);
    }
    if (policy.rotate) {
        const double angle = rng.uniform(-15.0, 15.0);
        out.image = rotate_image(out.image, angle);
    }
    if (policy.scale_crop) {
        const double scale = rng.uniform(0.8, 1.0);
        const int size = std::max(1, static_cast<int>(std::lround(scale * H)));
        const int max_off = H - size;
        const int oy = rng.uniform_int(max_off + 1);
        const int ox = rng.uniform_int(max_off + 1);
        if (size != H) out.image = crop_resize(out.image, oy, ox, size);
    }
    if (policy.color_jitter) {
        const double brightness = 1.0 + rng.uniform(-0.1, 0.1);
        const double contrast = 1.0 + rng.uniform(-0.1, 0.1);
        double mean = 0.0;
        for (int64_t i = 0; i < out.image.numel(); ++i) mean += out.image[i];
        mean /= static_cast<double>(out.image.numel());
        for (int64_t i = 0; i < out.image.numel(); ++i) {
            const double v = out.image[i] * brightness;
            out.image[i] = static_cast<float>((v - mean) * contrast + mean);
        }
    }

    for (int64_t i = 0; i < out.image.numel(); ++i) {
        out.image[i] = std::min(1.0f, std::max(0.0f, out.image[i]));
    }
    return out;
}

}  // namespace mddr::datakit
