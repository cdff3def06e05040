#pragma once

#include <filesystem>

#include "mddr/datakit/dataset.hpp"

namespace mddr::datakit {

/// On-disk dataset format: `index.csv` with header `path,pad_label,subject_id`
/// (pad_label is live or spoof, paths are relative, forward slashes) plus the
/// referenced 8-bit RGB PNG files.

/// Loads a dataset directory; each image is decoded and preprocessed to
/// `resolution`. Row order in the index is preserved. Errors name the
/// offending row.
DomainDataset load_directory_dataset(const std::filesystem::path& dir,
                                     const std::string& domain_id, int resolution);

/// Writes index.csv plus images/NNNN.png, one per sample, in dataset order.
void export_directory_dataset(const DomainDataset& dataset,
                              const std::filesystem::path& dir);

}  // namespace mddr::datakit
