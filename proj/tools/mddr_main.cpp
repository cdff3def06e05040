// mddr: multi-domain disentangled-representation toolkit for face
// presentation-attack detection. Subcommands cover the full pipeline:
// synth -> train-dr -> train-md -> eval, plus protocol-run and
// export-features.

#include <CLI11.hpp>
#include <iostream>

#include "mddr/cli/commands.hpp"
#include "mddr/common/errors.hpp"

using mddr::cli::Overrides;
using mddr::cli::RunConfig;

int main(int argc, char** argv) {
    CLI::App app{"multi-domain disentangled representation learning for face PAD"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;
    std::string output_dir;
    uint64_t seed = 0;
    bool have_seed = false, have_output = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration JSON")->required();
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { have_seed = true; });
        cmd->add_option("--output", output_dir, "override the output directory")
            ->each([&](const std::string&) { have_output = true; });
        cmd->add_flag("--no-dr", overrides.no_dr,
                      "replace adversarial stage 1 with plainly supervised trunks");
        cmd->add_flag("--no-md", overrides.no_md,
                      "skip stage 2; the final classifier reads stage-1 features");
        cmd->add_flag("--no-ce", overrides.no_ce, "drop the stage-2 classification loss");
        cmd->add_flag("--no-rec", overrides.no_rec, "drop the stage-2 reconstruction loss");
        return cmd;
    };

    auto* synth = add_common(app.add_subcommand("synth", "materialize synthetic datasets"));
    auto* train_dr = add_common(app.add_subcommand("train-dr", "stage-1 training per source domain"));
    auto* train_md = add_common(app.add_subcommand("train-md", "stage-2 training + final classifier"));
    auto* eval = add_common(app.add_subcommand("eval", "score the unseen test domain"));
    auto* protocol_run =
        add_common(app.add_subcommand("protocol-run", "run every spec of the configured protocol"));
    auto* export_features =
        add_common(app.add_subcommand("export-features", "dump encoder features as CSV"));

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = RunConfig::from_json_file(config_path);
        if (have_seed) overrides.seed = seed;
        if (have_output) overrides.output_dir = output_dir;
        apply_overrides(cfg, overrides);

        if (synth->parsed()) mddr::cli::cmd_synth(cfg);
        if (train_dr->parsed()) mddr::cli::cmd_train_dr(cfg);
        if (train_md->parsed()) mddr::cli::cmd_train_md(cfg);
        if (eval->parsed()) mddr::cli::cmd_eval(cfg);
        if (protocol_run->parsed()) mddr::cli::cmd_protocol_run(cfg);
        if (export_features->parsed()) mddr::cli::cmd_export_features(cfg);
        return 0;
    } catch (const mddr::cli::CliError& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    } catch (const mddr::ValidationError& e) {
        std::cerr << "error: invalid-config: " << e.what() << "\n";
    } catch (const mddr::IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
    } catch (const mddr::TrainingError& e) {
        std::cerr << "error: training: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
    }
    return 1;
}
