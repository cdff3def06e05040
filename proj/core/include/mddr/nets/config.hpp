#pragma once

#include <string>

namespace mddr::nets {

/// Shared architecture settings for the generator, the dual-head residual
/// encoder and the reconstruction decoder.
///
/// The generator maps a noise vector (plus a one-hot class code) through one
/// fully-connected stage to a (initial_size x initial_size) feature map and
/// then through `upsample_stages` transposed convolutions (kernel 3,
/// stride 2) up to `resolution`. The encoder is a residual trunk of
/// `residual_blocks` blocks with four 3x3 convolutions each, globally pooled
/// to a `feature_dim` vector read by both heads.
struct NetConfig {
    int resolution = 32;
    int noise_dim = 32;
    int feature_dim = 64;
    int num_class_outputs = 2;
    int residual_blocks = 4;
    int upsample_stages = 3;
    int base_channels = 8;
    int stem_stride = 1;
    bool trunk_batchnorm = true;
    bool generator_batchnorm = true;

    /// Spatial size of the generator/decoder input feature map.
    int initial_size() const { return resolution >> upsample_stages; }

    void validate() const;

    /// Desk-scale defaults: 32x32 images, 64-D features.
    static NetConfig desk_default();

    /// Full-scale preset: 256x256 images from 512-D noise through seven
    /// upsampling stages; 1024-D encoder features via a widened final block.
    static NetConfig paper_scale();

    std::string to_json_string() const;
    static NetConfig from_json_string(const std::string& s);

    bool operator==(const NetConfig&) const = default;
};

}  // namespace mddr::nets
