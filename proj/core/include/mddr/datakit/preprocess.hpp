#pragma once

#include "mddr/common/tensor.hpp"

namespace mddr::datakit {

/// Resize a 3xHxW image to 3x(resolution)x(resolution) with bilinear
/// sampling. Pixel values are divided by input_scale (255 for 8-bit sources)
/// and clipped to [0,1]. Throws ShapeError for non-3-channel input.
Tensor preprocess(const Tensor& raw_image, int resolution, double input_scale = 1.0);

/// Bilinear resize of a CHW image (no rescaling or clipping).
Tensor resize_bilinear(const Tensor& image, int out_h, int out_w);

}  // namespace mddr::datakit
