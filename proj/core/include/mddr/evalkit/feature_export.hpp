#pragma once

#include <filesystem>
#include <vector>

#include "mddr/common/tensor.hpp"
#include "mddr/datakit/dataset.hpp"

namespace mddr::evalkit {

struct FeatureMeta {
    std::string domain_id;
    int subject_id = 0;
    datakit::PadLabel pad_label = datakit::PadLabel::live;
};

/// CSV with header `domain_id,subject_id,pad_label,f0..f{D-1}`, one row per
/// feature in input order. Values round-trip through text at 1e-6.
void export_features_csv(const Tensor& features, const std::vector<FeatureMeta>& meta,
                         const std::filesystem::path& path);

}  // namespace mddr::evalkit
