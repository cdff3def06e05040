#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mddr/datakit/synthetic.hpp"
#include "mddr/drnet/trainer.hpp"
#include "mddr/evalkit/protocol.hpp"
#include "mddr/mdnet/trainer.hpp"
#include "mddr/nets/config.hpp"

namespace mddr::cli {

/// Command failure with a stable machine-parsable code; main prints it as
/// "error: <code>: <message>" and exits nonzero.
class CliError : public std::runtime_error {
public:
    CliError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// Data source: either an in-memory synthetic recipe (regenerated
/// deterministically by every command) or per-domain dataset directories.
struct DataConfig {
    std::optional<datakit::SyntheticSpec> synthetic;
    std::vector<std::pair<std::string, std::string>> directories;  // (domain_id, path)
    double val_fraction = 0.25;
    int resolution = 32;  // preprocessing target for directory sources
};

struct ProtocolConfig {
    evalkit::Protocol protocol = evalkit::Protocol::II;
    std::vector<std::string> train_domains;
    std::string test_domain;
};

struct ExportConfig {
    std::string domain;  // defaults to the protocol's test domain
};

/// Whole-run configuration; strict JSON schema (unknown keys are rejected).
struct RunConfig {
    uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    DataConfig data;
    nets::NetConfig net;
    drnet::DRConfig dr;
    mdnet::MDConfig md;
    ProtocolConfig protocol;
    ExportConfig export_cfg;
    bool use_dr = true;
    bool use_md = true;
    std::vector<std::string> methods = {"full"};  // protocol-run rows

    static RunConfig from_json_string(const std::string& text);
    static RunConfig from_json_file(const std::filesystem::path& path);

    /// Normalized full config as JSON; hashed into every manifest.
    std::string canonical_json() const;

    void validate() const;

    /// Human-readable method label derived from the ablation flags.
    std::string method_name() const;
};

struct Overrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> output_dir;
    bool no_dr = false, no_md = false, no_ce = false, no_rec = false;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

/// Ablation flag bundle for one named method row.
struct MethodFlags {
    bool use_dr = true, use_md = true, use_ce = true, use_rec = true;
};
MethodFlags method_flags(const std::string& method);

}  // namespace mddr::cli
