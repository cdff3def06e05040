#include "mddr/datakit/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "mddr/common/errors.hpp"

namespace mddr::datakit {

Tensor resize_bilinear(const Tensor& image, int out_h, int out_w) {
    if (image.ndim() != 3) throw ShapeError("resize_bilinear: expected CHW image");
    const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
    if (H == out_h && W == out_w) return image;

    Tensor out({C, out_h, out_w});
    const double sy = static_cast<double>(H) / out_h;
    const double sx = static_cast<double>(W) / out_w;
    for (int c = 0; c < C; ++c) {
        for (int oy = 0; oy < out_h; ++oy) {
            double fy = (oy + 0.5) * sy - 0.5;
            fy = std::min(std::max(fy, 0.0), static_cast<double>(H - 1));
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, H - 1);
            const double wy = fy - y0;
            for (int ox = 0; ox < out_w; ++ox) {
                double fx = (ox + 0.5) * sx - 0.5;
                fx = std::min(std::max(fx, 0.0), static_cast<double>(W - 1));
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, W - 1);
                const double wx = fx - x0;
                const double v = (1 - wy) * ((1 - wx) * image.at3(c, y0, x0) + wx * image.at3(c, y0, x1)) +
                                 wy * ((1 - wx) * image.at3(c, y1, x0) + wx * image.at3(c, y1, x1));
                out.at3(c, oy, ox) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Tensor preprocess(const Tensor& raw_image, int resolution, double input_scale) {
    if (raw_image.ndim() != 3 || raw_image.dim(0) != 3) {
        throw ShapeError("preprocess: expected a 3-channel CHW image, got " +
                         raw_image.dims_str());
    }
    if (resolution < 1) throw ValidationError("preprocess: resolution must be positive");
    if (input_scale <= 0.0) throw ValidationError("preprocess: input_scale must be positive");

    Tensor scaled = raw_image;
    if (input_scale != 1.0) {
        const float inv = static_cast<float>(1.0 / input_scale);
        for (int64_t i = 0; i < scaled.numel(); ++i) scaled[i] *= inv;
    }
    Tensor out = resize_bilinear(scaled, resolution, resolution);
    for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] = std::min(1.0f, std::max(0.0f, out[i]));
    }
    return out;
}

}  // namespace mddr::datakit
