#include "mddr/mdnet/features.hpp"

#include <cstring>

#include "mddr/autograd/ops.hpp"
#include "mddr/common/errors.hpp"
#include "mddr/datakit/batch.hpp"

namespace mddr::mdnet {

namespace ag = autograd;

DisentangledFeature extract_feature(nets::EncoderNet& encoder,
                                    const datakit::FaceSample& sample, EncoderRole role,
                                    const std::string& source_domain) {
    const bool was_training = encoder.is_training();
    encoder.set_training(false);
    ag::NoGradGuard no_grad;

    Tensor batch({1, sample.image.dim(0), sample.image.dim(1), sample.image.dim(2)},
                 sample.image.vec());
    auto feat = encoder.features(ag::Variable::leaf(std::move(batch), false));
    encoder.set_training(was_training);

    DisentangledFeature out;
    out.vector = feat.value().vec();
    out.source_domain = source_domain;
    out.role = role;
    return out;
}

MultiDomainFeature cross_concat(const DisentangledFeature& pad_feature,
                                const DisentangledFeature& id_feature) {
    if (pad_feature.vector.size() != id_feature.vector.size()) {
        throw ShapeError("cross_concat: feature dimension mismatch (" +
                         std::to_string(pad_feature.vector.size()) + " vs " +
                         std::to_string(id_feature.vector.size()) + ")");
    }
    MultiDomainFeature out;
    out.feature_dim = static_cast<int>(pad_feature.vector.size());
    out.vector = pad_feature.vector;
    out.vector.insert(out.vector.end(), id_feature.vector.begin(), id_feature.vector.end());
    return out;
}

Tensor extract_features_batch(nets::EncoderNet& encoder, const datakit::DomainDataset& ds,
                              const std::vector<int>& indices) {
    const bool was_training = encoder.is_training();
    encoder.set_training(false);
    ag::NoGradGuard no_grad;

    const int D = encoder.config().feature_dim;
    Tensor out({static_cast<int>(indices.size()), D});
    const int chunk = 64;
    for (size_t start = 0; start < indices.size(); start += chunk) {
        std::vector<int> part(indices.begin() + static_cast<long>(start),
                              indices.begin() +
                                  static_cast<long>(std::min(indices.size(), start + chunk)));
        auto x = ag::Variable::leaf(datakit::stack_images(ds, part), false);
        const Tensor feats = encoder.features(x).value();
        std::memcpy(out.data() + static_cast<int64_t>(start) * D, feats.data(),
                    static_cast<size_t>(feats.numel()) * sizeof(float));
    }
    encoder.set_training(was_training);
    return out;
}

Tensor concat_encoder_features(const std::vector<nets::EncoderNet*>& encoders,
                               const datakit::DomainDataset& ds,
                               const std::vector<int>& indices) {
    if (encoders.empty()) throw ValidationError("concat_encoder_features: no encoders");
    const int D = encoders[0]->config().feature_dim;
    for (const auto* e : encoders) {
        if (e->config().feature_dim != D) {
            throw ShapeError("concat_encoder_features: encoders disagree on feature_dim");
        }
    }
    const int N = static_cast<int>(indices.size());
    const int total = static_cast<int>(encoders.size()) * D;
    Tensor out({N, total});
    for (size_t k = 0; k < encoders.size(); ++k) {
        const Tensor feats = extract_features_batch(*encoders[k], ds, indices);
        for (int i = 0; i < N; ++i) {
            std::memcpy(out.data() + static_cast<int64_t>(i) * total + k * D,
                        feats.data() + static_cast<int64_t>(i) * D,
                        static_cast<size_t>(D) * sizeof(float));
        }
    }
    return out;
}

}  // namespace mddr::mdnet
