#pragma once

#include <vector>

#include "mddr/datakit/augment.hpp"
#include "mddr/datakit/dataset.hpp"

namespace mddr::datakit {

/// Stacks the selected samples into a [B,3,H,W] batch tensor (counted
/// dataset access).
Tensor stack_images(const DomainDataset& ds, const std::vector<int>& indices);

/// Same, with per-sample augmentation drawing from `rng`.
Tensor stack_images_augmented(const DomainDataset& ds, const std::vector<int>& indices,
                              Rng& rng, const AugmentPolicy& policy);

/// Liveness labels (1 = live, 0 = spoof) for the selected samples.
std::vector<int> liveness_labels(const DomainDataset& ds, const std::vector<int>& indices);

}  // namespace mddr::datakit
