#pragma once

#include <vector>

#include "mddr/cli/run_config.hpp"
#include "mddr/datakit/dataset.hpp"

namespace mddr::cli {

/// Materialize the configured data source: synthetic specs are regenerated
/// in memory (bit-identical for a given config), directory sources are
/// loaded and preprocessed.
std::vector<datakit::DomainDataset> load_domains(const RunConfig& cfg);

// Subcommands. All validate before writing, write outputs atomically and
// record a manifest under <output_dir>/manifests/. Failures throw; the
// binary maps them to a nonzero exit with a one-line error.
void cmd_synth(const RunConfig& cfg);
void cmd_train_dr(const RunConfig& cfg);
void cmd_train_md(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_protocol_run(const RunConfig& cfg);
void cmd_export_features(const RunConfig& cfg);

}  // namespace mddr::cli
