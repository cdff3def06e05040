#pragma once

#include <cstdint>
#include <vector>

#include "mddr/common/tensor.hpp"

namespace mddr::evalkit {

struct ProbeResult {
    double subject_acc = 0.0;
    double liveness_acc = 0.0;
};

/// Held-out accuracy of a multinomial logistic probe fit on frozen features
/// ([N, D] rows) with a deterministic stratified 75/25 split. `labels` must
/// contain at least two distinct classes in 0..num_classes-1.
double linear_probe_accuracy(const Tensor& features, const std::vector<int>& labels,
                             int num_classes, uint64_t seed);

/// Two independent probes over the same frozen features: how much subject
/// identity and how much liveness they expose.
ProbeResult disentanglement_probe(const Tensor& features, const std::vector<int>& subject_ids,
                                  const std::vector<int>& pad_labels, uint64_t seed = 17);

}  // namespace mddr::evalkit
