#pragma once

#include <string>
#include <vector>

#include "mddr/datakit/dataset.hpp"
#include "mddr/nets/networks.hpp"

namespace mddr::mdnet {

enum class EncoderRole { pad, id };

/// A single encoder's pooled trunk feature for one sample, tagged with
/// where it came from.
struct DisentangledFeature {
    std::vector<float> vector;  // feature_dim entries
    std::string source_domain;
    EncoderRole role = EncoderRole::pad;
};

/// PAD-part-first concatenation of a PAD and an ID feature (2 x feature_dim).
struct MultiDomainFeature {
    std::vector<float> vector;
    int feature_dim = 0;  // width of each half
};

/// Inference-mode feature extraction through a frozen encoder.
DisentangledFeature extract_feature(nets::EncoderNet& encoder,
                                    const datakit::FaceSample& sample,
                                    EncoderRole role, const std::string& source_domain);

MultiDomainFeature cross_concat(const DisentangledFeature& pad_feature,
                                const DisentangledFeature& id_feature);

/// Inference-mode features of the selected samples, [N, feature_dim].
Tensor extract_features_batch(nets::EncoderNet& encoder, const datakit::DomainDataset& ds,
                              const std::vector<int>& indices);

/// Row-wise concatenation of every encoder's features in encoder order,
/// [N, num_encoders * feature_dim]. This is the classifier input layout of
/// the final liveness model.
Tensor concat_encoder_features(const std::vector<nets::EncoderNet*>& encoders,
                               const datakit::DomainDataset& ds,
                               const std::vector<int>& indices);

}  // namespace mddr::mdnet
