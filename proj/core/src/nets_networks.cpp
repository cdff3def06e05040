#include "mddr/nets/networks.hpp"

#include <algorithm>

#include "mddr/common/errors.hpp"

namespace mddr::nets {

namespace ag = autograd;

std::vector<int> upsample_channels(const NetConfig& cfg) {
    std::vector<int> c(static_cast<size_t>(cfg.upsample_stages) + 1);
    for (int i = 0; i < cfg.upsample_stages; ++i) {
        const int width = cfg.base_channels << (cfg.upsample_stages - 1 - i);
        c[static_cast<size_t>(i)] = std::clamp(width, 8, 512);
    }
    c[static_cast<size_t>(cfg.upsample_stages)] = 3;
    return c;
}

namespace {

// Shared construction of the FC + transposed-conv upsampling stack.
struct UpsampleStack {
    std::unique_ptr<Linear> fc;
    std::unique_ptr<BatchNorm2d> fc_bn;
    std::vector<std::unique_ptr<ConvTranspose2d>> stages;
    std::vector<std::unique_ptr<BatchNorm2d>> bns;
};

UpsampleStack build_upsample_stack(const NetConfig& cfg, int in_features,
                                   const std::vector<int>& channels, Rng& rng) {
    UpsampleStack s;
    const int s0 = cfg.initial_size();
    s.fc = std::make_unique<Linear>(in_features, channels[0] * s0 * s0, rng);
    if (cfg.generator_batchnorm) {
        s.fc_bn = std::make_unique<BatchNorm2d>(channels[0]);
    }
    for (int i = 0; i < cfg.upsample_stages; ++i) {
        s.stages.push_back(std::make_unique<ConvTranspose2d>(
            channels[static_cast<size_t>(i)], channels[static_cast<size_t>(i) + 1], 3, 2, 1,
            1, rng));
        const bool last = i + 1 == cfg.upsample_stages;
        if (!last && cfg.generator_batchnorm) {
            s.bns.push_back(std::make_unique<BatchNorm2d>(channels[static_cast<size_t>(i) + 1]));
        } else {
            s.bns.push_back(nullptr);
        }
    }
    return s;
}

}  // namespace

GeneratorNet::GeneratorNet(const NetConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(mix_seed(seed, "generator"));
    channels_ = upsample_channels(cfg_);
    auto stack = build_upsample_stack(cfg_, cfg_.noise_dim + cfg_.num_class_outputs,
                                      channels_, rng);
    fc_ = std::move(stack.fc);
    add_child("fc", fc_.get());
    fc_bn_ = std::move(stack.fc_bn);
    if (fc_bn_) add_child("fc_bn", fc_bn_.get());
    stages_ = std::move(stack.stages);
    stage_bns_ = std::move(stack.bns);
    for (size_t i = 0; i < stages_.size(); ++i) {
        add_child("up" + std::to_string(i), stages_[i].get());
        if (stage_bns_[i]) add_child("up" + std::to_string(i) + "_bn", stage_bns_[i].get());
    }
}

ag::Variable GeneratorNet::forward(const ag::Variable& noise, const ag::Variable& class_codes) {
    const Tensor& nv = noise.value();
    const Tensor& cv = class_codes.value();
    if (nv.ndim() != 2 || nv.dim(1) != cfg_.noise_dim) {
        throw ShapeError("GeneratorNet: noise must be [B," + std::to_string(cfg_.noise_dim) +
                         "], got " + nv.dims_str());
    }
    if (cv.ndim() != 2 || cv.dim(0) != nv.dim(0) || cv.dim(1) != cfg_.num_class_outputs) {
        throw ShapeError("GeneratorNet: class codes must be [B," +
                         std::to_string(cfg_.num_class_outputs) + "], got " + cv.dims_str());
    }
    auto in = ag::concat_features({noise, class_codes});
    const int s0 = cfg_.initial_size();
    auto h = fc_->forward(in);
    h = ag::reshape(h, {nv.dim(0), channels_[0], s0, s0});
    if (fc_bn_) h = fc_bn_->forward(h);
    h = ag::relu(h);
    for (size_t i = 0; i < stages_.size(); ++i) {
        h = stages_[i]->forward(h);
        const bool last = i + 1 == stages_.size();
        if (last) {
            h = ag::sigmoid(h);
        } else {
            if (stage_bns_[i]) h = stage_bns_[i]->forward(h);
            h = ag::relu(h);
        }
    }
    return h;
}

EncoderNet::EncoderNet(const NetConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(mix_seed(seed, "encoder"));
    stem_ = std::make_unique<Conv2d>(3, cfg_.base_channels, 3, cfg_.stem_stride, 1, rng);
    add_child("stem", stem_.get());
    if (cfg_.trunk_batchnorm) {
        stem_bn_ = std::make_unique<BatchNorm2d>(cfg_.base_channels);
        add_child("stem_bn", stem_bn_.get());
    }
    int in_ch = cfg_.base_channels;
    for (int blk = 0; blk < cfg_.residual_blocks; ++blk) {
        const bool last = blk == cfg_.residual_blocks - 1;
        const int out_ch = last ? cfg_.feature_dim : cfg_.base_channels << (blk + 1);
        units_.push_back(std::make_unique<ResidualUnit>(in_ch, out_ch, 2, cfg_.trunk_batchnorm, rng));
        add_child("block" + std::to_string(blk) + "a", units_.back().get());
        units_.push_back(std::make_unique<ResidualUnit>(out_ch, out_ch, 1, cfg_.trunk_batchnorm, rng));
        add_child("block" + std::to_string(blk) + "b", units_.back().get());
        in_ch = out_ch;
    }
    head_adv_ = std::make_unique<Linear>(cfg_.feature_dim, 1, rng);
    add_child("head_adv", head_adv_.get());
    head_cls_ = std::make_unique<Linear>(cfg_.feature_dim, cfg_.num_class_outputs, rng);
    add_child("head_cls", head_cls_.get());
}

ag::Variable EncoderNet::trunk(const ag::Variable& images) {
    const Tensor& xv = images.value();
    if (xv.ndim() != 4 || xv.dim(1) != 3 || xv.dim(2) != cfg_.resolution ||
        xv.dim(3) != cfg_.resolution) {
        throw ShapeError("EncoderNet: expected images [B,3," + std::to_string(cfg_.resolution) +
                         "," + std::to_string(cfg_.resolution) + "], got " + xv.dims_str());
    }
    auto h = stem_->forward(images);
    if (stem_bn_) h = stem_bn_->forward(h);
    h = ag::relu(h);
    for (auto& unit : units_) h = unit->forward(h);
    return ag::global_avg_pool(h);
}

EncoderOutput EncoderNet::forward(const ag::Variable& images) {
    auto feat = trunk(images);
    EncoderOutput out;
    out.features = feat;
    out.adv_logits = head_adv_->forward(feat);
    out.cls_logits = head_cls_->forward(feat);
    return out;
}

ag::Variable EncoderNet::features(const ag::Variable& images) { return trunk(images); }

DecoderNet::DecoderNet(const NetConfig& cfg, int in_features, uint64_t seed)
    : cfg_(cfg), in_features_(in_features) {
    cfg_.validate();
    if (in_features <= 0) throw ValidationError("DecoderNet: in_features must be positive");
    Rng rng(mix_seed(seed, "decoder"));
    channels_ = upsample_channels(cfg_);
    auto stack = build_upsample_stack(cfg_, in_features, channels_, rng);
    fc_ = std::move(stack.fc);
    add_child("fc", fc_.get());
    fc_bn_ = std::move(stack.fc_bn);
    if (fc_bn_) add_child("fc_bn", fc_bn_.get());
    stages_ = std::move(stack.stages);
    stage_bns_ = std::move(stack.bns);
    for (size_t i = 0; i < stages_.size(); ++i) {
        add_child("up" + std::to_string(i), stages_[i].get());
        if (stage_bns_[i]) add_child("up" + std::to_string(i) + "_bn", stage_bns_[i].get());
    }
}

ag::Variable DecoderNet::forward(const ag::Variable& features) {
    const Tensor& fv = features.value();
    if (fv.ndim() != 2 || fv.dim(1) != in_features_) {
        throw ShapeError("DecoderNet: expected features [B," + std::to_string(in_features_) +
                         "], got " + fv.dims_str());
    }
    const int s0 = cfg_.initial_size();
    auto h = fc_->forward(features);
    h = ag::reshape(h, {fv.dim(0), channels_[0], s0, s0});
    if (fc_bn_) h = fc_bn_->forward(h);
    h = ag::relu(h);
    for (size_t i = 0; i < stages_.size(); ++i) {
        h = stages_[i]->forward(h);
        const bool last = i + 1 == stages_.size();
        if (last) {
            h = ag::sigmoid(h);
        } else {
            if (stage_bns_[i]) h = stage_bns_[i]->forward(h);
            h = ag::relu(h);
        }
    }
    return h;
}

LinearClassifier::LinearClassifier(int in_features, uint64_t seed) {
    if (in_features <= 0) throw ValidationError("LinearClassifier: in_features must be positive");
    Rng rng(mix_seed(seed, "linear_classifier"));
    fc_ = std::make_unique<Linear>(in_features, 1, rng);
    add_child("fc", fc_.get());
}

ag::Variable LinearClassifier::forward(const ag::Variable& features) {
    const Tensor& fv = features.value();
    if (fv.ndim() != 2 || fv.dim(1) != fc_->in_features()) {
        throw ShapeError("LinearClassifier: expected features [B," +
                         std::to_string(fc_->in_features()) + "], got " + fv.dims_str());
    }
    return fc_->forward(features);
}

}  // namespace mddr::nets
