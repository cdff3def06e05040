#pragma once

#include <memory>
#include <vector>

#include "mddr/nets/config.hpp"
#include "mddr/nets/layers.hpp"

namespace mddr::nets {

/// Noise-to-image generator: one fully-connected stage from the noise vector
/// concatenated with a one-hot class code, then `upsample_stages` transposed
/// convolutions (kernel 3, stride 2). Output is squashed to [0,1].
class GeneratorNet : public Module {
public:
    GeneratorNet(const NetConfig& cfg, uint64_t seed);

    /// noise [B, noise_dim], class_codes one-hot [B, num_class_outputs]
    /// -> images [B, 3, resolution, resolution]
    autograd::Variable forward(const autograd::Variable& noise,
                               const autograd::Variable& class_codes);

    const NetConfig& config() const { return cfg_; }

private:
    NetConfig cfg_;
    std::unique_ptr<Linear> fc_;
    std::unique_ptr<BatchNorm2d> fc_bn_;
    std::vector<std::unique_ptr<ConvTranspose2d>> stages_;
    std::vector<std::unique_ptr<BatchNorm2d>> stage_bns_;
    std::vector<int> channels_;
};

struct EncoderOutput {
    autograd::Variable adv_logits;  // [B, 1]
    autograd::Variable cls_logits;  // [B, num_class_outputs]
    autograd::Variable features;    // [B, feature_dim]
};

/// Dual-head residual discriminator whose pooled trunk feature doubles as
/// the disentangled feature encoder. Both heads read the same trunk output.
class EncoderNet : public Module {
public:
    EncoderNet(const NetConfig& cfg, uint64_t seed);

    EncoderOutput forward(const autograd::Variable& images);

    /// Trunk + pooling only (used for feature extraction).
    autograd::Variable features(const autograd::Variable& images);

    const NetConfig& config() const { return cfg_; }

private:
    autograd::Variable trunk(const autograd::Variable& images);

    NetConfig cfg_;
    std::unique_ptr<Conv2d> stem_;
    std::unique_ptr<BatchNorm2d> stem_bn_;
    std::vector<std::unique_ptr<ResidualUnit>> units_;
    std::unique_ptr<Linear> head_adv_, head_cls_;
};

/// Feature-to-image reconstruction decoder; mirrors the generator's
/// upsampling stack but starts from a concatenated feature vector.
class DecoderNet : public Module {
public:
    DecoderNet(const NetConfig& cfg, int in_features, uint64_t seed);

    /// features [B, in_features] -> images [B, 3, resolution, resolution]
    autograd::Variable forward(const autograd::Variable& features);

    const NetConfig& config() const { return cfg_; }
    int in_features() const { return in_features_; }

private:
    NetConfig cfg_;
    int in_features_;
    std::unique_ptr<Linear> fc_;
    std::unique_ptr<BatchNorm2d> fc_bn_;
    std::vector<std::unique_ptr<ConvTranspose2d>> stages_;
    std::vector<std::unique_ptr<BatchNorm2d>> stage_bns_;
    std::vector<int> channels_;
};

/// Affine map from a feature vector to a single liveness logit;
/// sigmoid(logit) is the liveness probability.
class LinearClassifier : public Module {
public:
    LinearClassifier(int in_features, uint64_t seed);

    autograd::Variable forward(const autograd::Variable& features);

    int in_features() const { return fc_->in_features(); }

private:
    std::unique_ptr<Linear> fc_;
};

/// Transposed-convolution channel schedule shared by generator and decoder:
/// widest at the low-resolution end (capped at 512), 3 output channels last.
std::vector<int> upsample_channels(const NetConfig& cfg);

}  // namespace mddr::nets
