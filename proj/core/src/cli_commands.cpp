#include "mddr/cli/commands.hpp"

#include <cstdlib>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mddr/cli/manifest.hpp"
#include "mddr/common/errors.hpp"
#include "mddr/datakit/directory.hpp"
#include "mddr/evalkit/feature_export.hpp"
#include "mddr/evalkit/runner.hpp"
#include "mddr/mdnet/features.hpp"
#include "mddr/nets/checkpoint.hpp"

namespace mddr::cli {

using datakit::DomainDataset;
using nlohmann::json;

namespace {

int log_level() {
    const char* env = std::getenv("MDDR_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[mddr] " << msg << "\n";
}

namespace paths {

std::filesystem::path dr_ckpt(const RunConfig& cfg, const std::string& domain,
                              const std::string& which) {
    return cfg.output_dir / "checkpoints" / "dr" / (domain + "_" + which + ".ckpt");
}

std::filesystem::path md_ckpt(const RunConfig& cfg, const std::string& name) {
    return cfg.output_dir / "checkpoints" / "md" / (name + ".ckpt");
}

std::filesystem::path history(const RunConfig& cfg, const std::string& name) {
    return cfg.output_dir / "history" / (name + ".jsonl");
}

}  // namespace paths

Manifest make_manifest(const RunConfig& cfg, const std::string& command) {
    Manifest m;
    m.command = command;
    m.seed = cfg.seed;
    m.config_sha256 = sha256_hex(cfg.canonical_json());
    return m;
}

const DomainDataset& find_domain(const std::vector<DomainDataset>& ds, const std::string& id) {
    for (const auto& d : ds) {
        if (d.domain_id() == id) return d;
    }
    throw CliError("missing-domain", "domain '" + id + "' not found in the configured data");
}

void require_train_selection(const RunConfig& cfg) {
    if (cfg.protocol.train_domains.empty() || cfg.protocol.test_domain.empty()) {
        throw CliError("invalid-config",
                       "protocol.train_domains and protocol.test_domain must be set");
    }
    evalkit::ProtocolSpec spec{cfg.protocol.protocol, cfg.protocol.train_domains,
                               cfg.protocol.test_domain};
    spec.validate();
}

std::string gan_history_jsonl(const std::vector<drnet::GanHistoryEntry>& history) {
    std::ostringstream os;
    for (const auto& h : history) {
        os << json{{"epoch", h.epoch},   {"d_total", h.d_total}, {"d_gan", h.d_gan},
                   {"d_cls", h.d_cls},   {"g_total", h.g_total}, {"g_gan", h.g_gan},
                   {"g_cls", h.g_cls}}
                  .dump()
           << "\n";
    }
    return os.str();
}

std::string md_history_jsonl(const std::vector<mdnet::MDHistoryEntry>& history) {
    std::ostringstream os;
    for (const auto& h : history) {
        os << json{{"epoch", h.epoch}, {"total", h.total}, {"ce", h.ce}, {"rec", h.rec}}.dump()
           << "\n";
    }
    return os.str();
}

struct SplitData {
    std::vector<DomainDataset> train, val;
};

SplitData split_train_domains(const RunConfig& cfg, const std::vector<DomainDataset>& domains) {
    SplitData out;
    for (const auto& id : cfg.protocol.train_domains) {
        auto [train, val] = datakit::split_train_val(find_domain(domains, id),
                                                     cfg.data.val_fraction, cfg.seed);
        out.train.push_back(std::move(train));
        out.val.push_back(std::move(val));
    }
    return out;
}

struct MdArtifactPaths {
    std::vector<std::filesystem::path> encoders;
    std::filesystem::path f_md;
};

MdArtifactPaths md_paths(const RunConfig& cfg) {
    MdArtifactPaths p;
    for (const auto& id : cfg.protocol.train_domains) {
        p.encoders.push_back(paths::md_ckpt(cfg, "e_pad_" + id));
    }
    p.f_md = paths::md_ckpt(cfg, "f_md");
    return p;
}

}  // namespace

std::vector<DomainDataset> load_domains(const RunConfig& cfg) {
    if (cfg.data.synthetic) {
        return datakit::generate_synthetic_domains(*cfg.data.synthetic);
    }
    std::vector<DomainDataset> out;
    for (const auto& [id, dir] : cfg.data.directories) {
        out.push_back(datakit::load_directory_dataset(dir, id, cfg.data.resolution));
    }
    return out;
}

void cmd_synth(const RunConfig& cfg) {
    if (!cfg.data.synthetic) {
        throw CliError("invalid-config", "synth requires data.synthetic");
    }
    const auto domains = datakit::generate_synthetic_domains(*cfg.data.synthetic);

    Manifest manifest = make_manifest(cfg, "synth");
    for (const auto& d : domains) {
        const auto dir = cfg.output_dir / "datasets" / d.domain_id();
        datakit::export_directory_dataset(d, dir);
        log_info("wrote dataset " + dir.string() + " (" + std::to_string(d.size()) + " samples)");
        manifest.add_output(cfg.output_dir, dir / "index.csv");
        for (size_t i = 0; i < d.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "%04zu.png", i);
            manifest.add_output(cfg.output_dir, dir / "images" / name);
        }
    }
    manifest.write(cfg.output_dir);
}

void cmd_train_dr(const RunConfig& cfg) {
    require_train_selection(cfg);
    const auto domains = load_domains(cfg);
    const auto split = split_train_domains(cfg, domains);

    Manifest manifest = make_manifest(cfg, "train-dr");
    std::filesystem::create_directories(cfg.output_dir / "checkpoints" / "dr");

    for (const auto& train : split.train) {
        const std::string& id = train.domain_id();
        if (cfg.use_dr) {
            log_info("training PAD-GAN on " + id);
            auto pad = drnet::train_pad_gan(train, cfg.net, cfg.dr);
            log_info("training ID-GAN on " + id);
            auto idr = drnet::train_id_gan(train, cfg.net, cfg.dr);

            nets::save_checkpoint(*pad.generator,
                                  {"generator", "pad_gan_G", cfg.dr.epochs, pad.generator->config(), 0},
                                  paths::dr_ckpt(cfg, id, "pad_g"));
            nets::save_checkpoint(*pad.encoder,
                                  {"encoder", "pad_gan_D", cfg.dr.epochs, pad.encoder->config(), 0},
                                  paths::dr_ckpt(cfg, id, "pad_d"));
            nets::save_checkpoint(*idr.generator,
                                  {"generator", "id_gan_G", cfg.dr.epochs, idr.generator->config(), 0},
                                  paths::dr_ckpt(cfg, id, "id_g"));
            nets::save_checkpoint(*idr.encoder,
                                  {"encoder", "id_gan_D", cfg.dr.epochs, idr.encoder->config(), 0},
                                  paths::dr_ckpt(cfg, id, "id_d"));
            write_text_atomic(paths::history(cfg, "dr_" + id + "_pad"),
                              gan_history_jsonl(pad.history));
            write_text_atomic(paths::history(cfg, "dr_" + id + "_id"),
                              gan_history_jsonl(idr.history));
            for (const char* which : {"pad_g", "pad_d", "id_g", "id_d"}) {
                manifest.add_output(cfg.output_dir, paths::dr_ckpt(cfg, id, which));
            }
        } else {
            log_info("training plain PAD/ID trunks on " + id);
            auto pad = drnet::train_plain_encoder(train, cfg.net, cfg.dr,
                                                  drnet::PlainLabel::liveness);
            auto idr = drnet::train_plain_encoder(train, cfg.net, cfg.dr,
                                                  drnet::PlainLabel::subject);
            nets::save_checkpoint(*pad.encoder,
                                  {"encoder", "pad_plain_D", cfg.dr.epochs, pad.encoder->config(), 0},
                                  paths::dr_ckpt(cfg, id, "pad_d"));
            nets::save_checkpoint(*idr.encoder,
                                  {"encoder", "id_plain_D", cfg.dr.epochs, idr.encoder->config(), 0},
                                  paths::dr_ckpt(cfg, id, "id_d"));
            write_text_atomic(paths::history(cfg, "dr_" + id + "_pad"),
                              gan_history_jsonl(pad.history));
            write_text_atomic(paths::history(cfg, "dr_" + id + "_id"),
                              gan_history_jsonl(idr.history));
            for (const char* which : {"pad_d", "id_d"}) {
                manifest.add_output(cfg.output_dir, paths::dr_ckpt(cfg, id, which));
            }
        }
        manifest.add_output(cfg.output_dir, paths::history(cfg, "dr_" + id + "_pad"));
        manifest.add_output(cfg.output_dir, paths::history(cfg, "dr_" + id + "_id"));
    }
    manifest.write(cfg.output_dir);
}

void cmd_train_md(const RunConfig& cfg) {
    require_train_selection(cfg);
    const auto domains = load_domains(cfg);
    const auto split = split_train_domains(cfg, domains);

    // stage-1 artifacts
    std::vector<drnet::EncoderPair> pairs;
    Manifest manifest = make_manifest(cfg, "train-md");
    for (const auto& id : cfg.protocol.train_domains) {
        const auto pad_path = paths::dr_ckpt(cfg, id, "pad_d");
        const auto id_path = paths::dr_ckpt(cfg, id, "id_d");
        if (!std::filesystem::exists(pad_path) || !std::filesystem::exists(id_path)) {
            throw CliError("missing-artifact", "stage-1 checkpoints for domain '" + id +
                                                   "' not found; run train-dr first");
        }
        drnet::EncoderPair pair;
        pair.domain_id = id;
        pair.e_pad = nets::load_encoder_checkpoint(pad_path);
        pair.e_id = nets::load_encoder_checkpoint(id_path);
        pairs.push_back(std::move(pair));
        manifest.add_input(cfg.output_dir, pad_path);
        manifest.add_input(cfg.output_dir, id_path);
    }

    std::filesystem::create_directories(cfg.output_dir / "checkpoints" / "md");
    std::vector<std::unique_ptr<nets::EncoderNet>> encoders;
    if (cfg.use_md) {
        log_info("stage-2 cross-verified training over " +
                 std::to_string(cfg.protocol.train_domains.size()) + " domains");
        std::vector<drnet::EncoderPair*> pair_ptrs;
        std::vector<const DomainDataset*> train_ptrs;
        for (size_t i = 0; i < pairs.size(); ++i) {
            pair_ptrs.push_back(&pairs[i]);
            train_ptrs.push_back(&split.train[i]);
        }
        auto artifacts = mdnet::generalize_to_n_domains(pair_ptrs, train_ptrs, cfg.md);
        encoders = std::move(artifacts.pad_encoders);
        write_text_atomic(paths::history(cfg, "md"), md_history_jsonl(artifacts.history));
        manifest.add_output(cfg.output_dir, paths::history(cfg, "md"));

        for (size_t i = 0; i < artifacts.domain_ids.size(); ++i) {
            const auto& id = artifacts.domain_ids[i];
            if (cfg.md.use_ce) {
                const auto p = paths::md_ckpt(cfg, "f_" + id);
                nets::save_checkpoint(*artifacts.heads[i],
                                      {"linear", "f_" + id, cfg.md.epochs, cfg.net,
                                       artifacts.heads[i]->in_features()},
                                      p);
                manifest.add_output(cfg.output_dir, p);
            }
            if (cfg.md.use_rec) {
                const auto p = paths::md_ckpt(cfg, "decoder_" + id);
                nets::save_checkpoint(*artifacts.decoders[i],
                                      {"decoder", "d_rec_" + id, cfg.md.epochs,
                                       artifacts.decoders[i]->config(),
                                       artifacts.decoders[i]->in_features()},
                                      p);
                manifest.add_output(cfg.output_dir, p);
            }
        }
    } else {
        log_info("stage 2 skipped (--no-md); exporting stage-1 PAD encoders");
        write_text_atomic(paths::history(cfg, "md"), "");
        manifest.add_output(cfg.output_dir, paths::history(cfg, "md"));
        for (auto& p : pairs) encoders.push_back(std::move(p.e_pad));
    }

    for (size_t i = 0; i < encoders.size(); ++i) {
        const auto& id = cfg.protocol.train_domains[i];
        const auto p = paths::md_ckpt(cfg, "e_pad_" + id);
        nets::save_checkpoint(*encoders[i],
                              {"encoder", "e_pad_" + id, cfg.md.epochs, encoders[i]->config(), 0},
                              p);
        manifest.add_output(cfg.output_dir, p);
    }

    log_info("training final classifier");
    std::vector<nets::EncoderNet*> enc_ptrs;
    for (auto& e : encoders) enc_ptrs.push_back(e.get());
    std::vector<const DomainDataset*> train_ptrs;
    for (const auto& t : split.train) train_ptrs.push_back(&t);
    auto f_md = mdnet::train_final_classifier(enc_ptrs, train_ptrs, cfg.md);
    nets::save_checkpoint(*f_md, {"linear", "f_md", cfg.md.epochs, cfg.net, f_md->in_features()},
                          md_paths(cfg).f_md);
    manifest.add_output(cfg.output_dir, md_paths(cfg).f_md);

    manifest.write(cfg.output_dir);
}

namespace {

struct LoadedMdArtifacts {
    std::vector<std::unique_ptr<nets::EncoderNet>> encoders;
    std::unique_ptr<nets::LinearClassifier> f_md;
};

LoadedMdArtifacts load_md_artifacts(const RunConfig& cfg, Manifest& manifest) {
    const auto p = md_paths(cfg);
    LoadedMdArtifacts out;
    for (size_t i = 0; i < p.encoders.size(); ++i) {
        if (!std::filesystem::exists(p.encoders[i])) {
            throw CliError("missing-artifact", "stage-2 checkpoint " + p.encoders[i].string() +
                                                   " not found; run train-md first");
        }
        out.encoders.push_back(nets::load_encoder_checkpoint(p.encoders[i]));
        manifest.add_input(cfg.output_dir, p.encoders[i]);
    }
    if (!std::filesystem::exists(p.f_md)) {
        throw CliError("missing-artifact",
                       "final classifier " + p.f_md.string() + " not found; run train-md first");
    }
    out.f_md = nets::load_linear_checkpoint(p.f_md);
    manifest.add_input(cfg.output_dir, p.f_md);
    return out;
}

}  // namespace

void cmd_eval(const RunConfig& cfg) {
    require_train_selection(cfg);
    const auto domains = load_domains(cfg);
    const auto split = split_train_domains(cfg, domains);
    const DomainDataset& test_set = find_domain(domains, cfg.protocol.test_domain);

    Manifest manifest = make_manifest(cfg, "eval");
    auto artifacts = load_md_artifacts(cfg, manifest);
    std::vector<nets::EncoderNet*> enc_ptrs;
    for (auto& e : artifacts.encoders) enc_ptrs.push_back(e.get());

    evalkit::ScoreSet val_scores;
    val_scores.source = "val";
    for (const auto& val : split.val) {
        val_scores.append(evalkit::infer_scores(enc_ptrs, *artifacts.f_md, val));
    }
    const double tau = evalkit::eer_threshold(val_scores);
    const auto test_scores = evalkit::infer_scores(enc_ptrs, *artifacts.f_md, test_set);
    const auto report = evalkit::evaluate(test_scores, tau);

    json j = json::parse(report.to_json_string());
    j["protocol"] = evalkit::to_string(cfg.protocol.protocol);
    j["train_domains"] = cfg.protocol.train_domains;
    j["test_domain"] = cfg.protocol.test_domain;
    j["method"] = cfg.method_name();

    const auto report_path = cfg.output_dir / "report.json";
    write_text_atomic(report_path, j.dump(2) + "\n");
    manifest.add_output(cfg.output_dir, report_path);
    manifest.write(cfg.output_dir);
    log_info("HTER " + std::to_string(report.hter_percent) + "%  AUC " +
             std::to_string(report.auc_percent) + "%");
}

void cmd_protocol_run(const RunConfig& cfg) {
    const auto domains = load_domains(cfg);
    std::vector<std::string> ids;
    for (const auto& d : domains) ids.push_back(d.domain_id());
    const auto specs = evalkit::enumerate_protocols(ids, cfg.protocol.protocol);

    std::ostringstream csv;
    csv << "method";
    for (const auto& s : specs) csv << "," << s.name() << " HTER(%)," << s.name() << " AUC(%)";
    csv << "\n";

    for (const auto& method : cfg.methods) {
        const auto flags = method_flags(method);
        csv << method;
        for (size_t si = 0; si < specs.size(); ++si) {
            evalkit::RunOptions opts;
            opts.val_fraction = cfg.data.val_fraction;
            opts.use_dr = flags.use_dr;
            opts.use_md = flags.use_md;

            drnet::DRConfig dr = cfg.dr;
            mdnet::MDConfig md = cfg.md;
            md.use_ce = flags.use_ce;
            md.use_rec = flags.use_rec;
            const uint64_t run_seed = mix_seed(cfg.seed, "protocol/" + std::to_string(si));
            dr.seed = run_seed;
            md.seed = run_seed;

            log_info("protocol " + std::string(evalkit::to_string(cfg.protocol.protocol)) + " " +
                     specs[si].name() + " method=" + method);
            const auto report = evalkit::run_protocol(specs[si], domains, cfg.net, dr, md, opts);
            char buf[64];
            std::snprintf(buf, sizeof(buf), ",%.4f,%.4f", report.hter_percent, report.auc_percent);
            csv << buf;
        }
        csv << "\n";
    }

    Manifest manifest = make_manifest(cfg, "protocol-run");
    const auto results_path = cfg.output_dir / "results.csv";
    write_text_atomic(results_path, csv.str());
    manifest.add_output(cfg.output_dir, results_path);
    manifest.write(cfg.output_dir);
}

void cmd_export_features(const RunConfig& cfg) {
    require_train_selection(cfg);
    const auto domains = load_domains(cfg);
    const std::string domain_id =
        cfg.export_cfg.domain.empty() ? cfg.protocol.test_domain : cfg.export_cfg.domain;
    const DomainDataset& ds = find_domain(domains, domain_id);

    Manifest manifest = make_manifest(cfg, "export-features");
    auto artifacts = load_md_artifacts(cfg, manifest);
    std::vector<nets::EncoderNet*> enc_ptrs;
    for (auto& e : artifacts.encoders) enc_ptrs.push_back(e.get());

    std::vector<int> idx(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) idx[i] = static_cast<int>(i);
    const Tensor feats = mdnet::concat_encoder_features(enc_ptrs, ds, idx);

    std::vector<evalkit::FeatureMeta> meta;
    for (size_t i = 0; i < ds.size(); ++i) {
        const auto& s = ds.sample(i);
        meta.push_back({s.domain_id, s.subject_id, s.pad_label});
    }
    const auto out_path = cfg.output_dir / "features.csv";
    evalkit::export_features_csv(feats, meta, out_path);
    manifest.add_output(cfg.output_dir, out_path);
    manifest.write(cfg.output_dir);
    log_info("exported " + std::to_string(ds.size()) + " feature rows to " + out_path.string());
}

}  // namespace mddr::cli
