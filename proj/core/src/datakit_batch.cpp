#include "mddr/datakit/batch.hpp"

#include <cstring>

#include "mddr/common/errors.hpp"

namespace mddr::datakit {

namespace {

Tensor stack_impl(const DomainDataset& ds, const std::vector<int>& indices,
                  Rng* rng, const AugmentPolicy* policy) {
    if (indices.empty()) throw ValidationError("stack_images: empty index list");
    const auto& first = ds.sample(static_cast<size_t>(indices[0]));
    const int C = first.image.dim(0), H = first.image.dim(1), W = first.image.dim(2);
    Tensor batch({static_cast<int>(indices.size()), C, H, W});
    const int64_t plane = static_cast<int64_t>(C) * H * W;
    for (size_t b = 0; b < indices.size(); ++b) {
        const auto& s = ds.sample(static_cast<size_t>(indices[b]));
        if (s.image.dim(0) != C || s.image.dim(1) != H || s.image.dim(2) != W) {
            throw ShapeError("stack_images: inconsistent image shapes in dataset '" +
                             ds.domain_id() + "'");
        }
        const Tensor* img = &s.image;
        FaceSample augmented;
        if (rng && policy && policy->any()) {
            augmented = augment(s, *rng, *policy);
            img = &augmented.image;
        }
        std::memcpy(batch.data() + static_cast<int64_t>(b) * plane, img->data(),
                    static_cast<size_t>(plane) * sizeof(float));
    }
    return batch;
}

}  // namespace

Tensor stack_images(const DomainDataset& ds, const std::vector<int>& indices) {
    return stack_impl(ds, indices, nullptr, nullptr);
}

Tensor stack_images_augmented(const DomainDataset& ds, const std::vector<int>& indices,
                              Rng& rng, const AugmentPolicy& policy) {
    return stack_impl(ds, indices, &rng, &policy);
}

std::vector<int> liveness_labels(const DomainDataset& ds, const std::vector<int>& indices) {
    std::vector<int> labels;
    labels.reserve(indices.size());
    for (int i : indices) {
        labels.push_back(ds.sample(static_cast<size_t>(i)).pad_label == PadLabel::live ? 1 : 0);
    }
    return labels;
}

}  // namespace mddr::datakit
