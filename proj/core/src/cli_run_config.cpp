#include "mddr/cli/run_config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "mddr/common/errors.hpp"

namespace mddr::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    if (!j.is_object()) throw ValidationError("config: " + ctx + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (allowed.count(key) == 0) {
            throw ValidationError("config: unknown key '" + key + "' in " + ctx);
        }
    }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

datakit::AugmentPolicy parse_augment(const json& j) {
    check_keys(j, {"horizontal_flip", "rotate", "scale_crop", "color_jitter"}, "dr.augment");
    datakit::AugmentPolicy p;
    read_if(j, "horizontal_flip", p.horizontal_flip);
    read_if(j, "rotate", p.rotate);
    read_if(j, "scale_crop", p.scale_crop);
    read_if(j, "color_jitter", p.color_jitter);
    return p;
}

json augment_to_json(const datakit::AugmentPolicy& p) {
    return json{{"horizontal_flip", p.horizontal_flip},
                {"rotate", p.rotate},
                {"scale_crop", p.scale_crop},
                {"color_jitter", p.color_jitter}};
}

}  // namespace

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j,
               {"seed", "output_dir", "data", "net", "dr", "md", "protocol", "export",
                "ablation", "methods"},
               "top level");

    RunConfig cfg;
    read_if(j, "seed", cfg.seed);
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();

    if (j.contains("data")) {
        const json& d = j.at("data");
        check_keys(d, {"synthetic", "directories", "val_fraction", "resolution"}, "data");
        if (d.contains("synthetic") && d.contains("directories")) {
            throw ValidationError("config: data.synthetic and data.directories are exclusive");
        }
        if (d.contains("synthetic")) {
            cfg.data.synthetic = datakit::SyntheticSpec::from_json_string(d.at("synthetic").dump());
        }
        if (d.contains("directories")) {
            if (!d.at("directories").is_object()) {
                throw ValidationError("config: data.directories must map domain ids to paths");
            }
            for (const auto& [id, path] : d.at("directories").items()) {
                cfg.data.directories.emplace_back(id, path.get<std::string>());
            }
        }
        read_if(d, "val_fraction", cfg.data.val_fraction);
        read_if(d, "resolution", cfg.data.resolution);
    }

    if (j.contains("net")) {
        const json& n = j.at("net");
        check_keys(n,
                   {"resolution", "noise_dim", "feature_dim", "residual_blocks", "upsample_stages",
                    "base_channels", "stem_stride", "trunk_batchnorm", "generator_batchnorm",
                    "preset"},
                   "net");
        if (n.contains("preset")) {
            const auto preset = n.at("preset").get<std::string>();
            if (preset == "desk") {
                cfg.net = nets::NetConfig::desk_default();
            } else if (preset == "paper") {
                cfg.net = nets::NetConfig::paper_scale();
            } else {
                throw ValidationError("config: net.preset must be 'desk' or 'paper'");
            }
        }
        read_if(n, "resolution", cfg.net.resolution);
        read_if(n, "noise_dim", cfg.net.noise_dim);
        read_if(n, "feature_dim", cfg.net.feature_dim);
        read_if(n, "residual_blocks", cfg.net.residual_blocks);
        read_if(n, "upsample_stages", cfg.net.upsample_stages);
        read_if(n, "base_channels", cfg.net.base_channels);
        read_if(n, "stem_stride", cfg.net.stem_stride);
        read_if(n, "trunk_batchnorm", cfg.net.trunk_batchnorm);
        read_if(n, "generator_batchnorm", cfg.net.generator_batchnorm);
    }

    if (j.contains("dr")) {
        const json& d = j.at("dr");
        check_keys(d,
                   {"epochs", "batch_size", "learning_rate", "lambda", "d_steps_per_g_step",
                    "adam_beta1", "adam_beta2", "augment"},
                   "dr");
        read_if(d, "epochs", cfg.dr.epochs);
        read_if(d, "batch_size", cfg.dr.batch_size);
        read_if(d, "learning_rate", cfg.dr.learning_rate);
        read_if(d, "lambda", cfg.dr.lambda_cls);
        read_if(d, "d_steps_per_g_step", cfg.dr.d_steps_per_g_step);
        read_if(d, "adam_beta1", cfg.dr.adam_beta1);
        read_if(d, "adam_beta2", cfg.dr.adam_beta2);
        if (d.contains("augment")) cfg.dr.augment = parse_augment(d.at("augment"));
    }

    if (j.contains("md")) {
        const json& m = j.at("md");
        check_keys(m,
                   {"epochs", "batch_size", "encoder_lr", "head_lr", "use_ce", "use_rec",
                    "adam_beta1", "adam_beta2"},
                   "md");
        read_if(m, "epochs", cfg.md.epochs);
        read_if(m, "batch_size", cfg.md.batch_size);
        read_if(m, "encoder_lr", cfg.md.encoder_lr);
        read_if(m, "head_lr", cfg.md.head_lr);
        read_if(m, "use_ce", cfg.md.use_ce);
        read_if(m, "use_rec", cfg.md.use_rec);
        read_if(m, "adam_beta1", cfg.md.adam_beta1);
        read_if(m, "adam_beta2", cfg.md.adam_beta2);
    }

    if (j.contains("protocol")) {
        const json& p = j.at("protocol");
        check_keys(p, {"protocol", "train_domains", "test_domain"}, "protocol");
        if (p.contains("protocol")) {
            cfg.protocol.protocol = evalkit::protocol_from_string(p.at("protocol").get<std::string>());
        }
        read_if(p, "train_domains", cfg.protocol.train_domains);
        read_if(p, "test_domain", cfg.protocol.test_domain);
    }

    if (j.contains("export")) {
        const json& e = j.at("export");
        check_keys(e, {"domain"}, "export");
        read_if(e, "domain", cfg.export_cfg.domain);
    }

    if (j.contains("ablation")) {
        const json& a = j.at("ablation");
        check_keys(a, {"use_dr", "use_md", "use_ce", "use_rec"}, "ablation");
        read_if(a, "use_dr", cfg.use_dr);
        read_if(a, "use_md", cfg.use_md);
        read_if(a, "use_ce", cfg.md.use_ce);
        read_if(a, "use_rec", cfg.md.use_rec);
    }

    read_if(j, "methods", cfg.methods);

    cfg.dr.seed = cfg.seed;
    cfg.md.seed = cfg.seed;
    if (cfg.data.synthetic) cfg.data.synthetic->seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

std::string RunConfig::canonical_json() const {
    json data;
    if (data.is_null()) data = json::object();
    if (this->data.synthetic) {
        data["synthetic"] = json::parse(this->data.synthetic->to_json_string());
    }
    if (!this->data.directories.empty()) {
        json dirs = json::object();
        for (const auto& [id, path] : this->data.directories) dirs[id] = path;
        data["directories"] = dirs;
    }
    data["val_fraction"] = this->data.val_fraction;
    data["resolution"] = this->data.resolution;

    json j{{"seed", seed},
           {"output_dir", output_dir.string()},
           {"data", data},
           {"net", json::parse(net.to_json_string())},
           {"dr",
            {{"epochs", dr.epochs},
             {"batch_size", dr.batch_size},
             {"learning_rate", dr.learning_rate},
             {"lambda", dr.lambda_cls},
             {"d_steps_per_g_step", dr.d_steps_per_g_step},
             {"adam_beta1", dr.adam_beta1},
             {"adam_beta2", dr.adam_beta2},
             {"augment", augment_to_json(dr.augment)}}},
           {"md",
            {{"epochs", md.epochs},
             {"batch_size", md.batch_size},
             {"encoder_lr", md.encoder_lr},
             {"head_lr", md.head_lr},
             {"use_ce", md.use_ce},
             {"use_rec", md.use_rec},
             {"adam_beta1", md.adam_beta1},
             {"adam_beta2", md.adam_beta2}}},
           {"protocol",
            {{"protocol", evalkit::to_string(protocol.protocol)},
             {"train_domains", protocol.train_domains},
             {"test_domain", protocol.test_domain}}},
           {"export", {{"domain", export_cfg.domain}}},
           {"ablation", {{"use_dr", use_dr}, {"use_md", use_md}}},
           {"methods", methods}};
    return j.dump(2);
}

void RunConfig::validate() const {
    if (!data.synthetic && data.directories.empty()) {
        throw ValidationError("config: data must provide either synthetic or directories");
    }
    if (data.val_fraction <= 0.0 || data.val_fraction >= 1.0) {
        throw ValidationError("config: data.val_fraction must be in (0, 1)");
    }
    net.validate();
    dr.validate();
    md.validate();
    const int data_res = data.synthetic ? data.synthetic->resolution : data.resolution;
    if (data_res != net.resolution) {
        throw ValidationError("config: data resolution " + std::to_string(data_res) +
                              " does not match net.resolution " + std::to_string(net.resolution));
    }
    static const std::set<std::string> known_methods{"full",       "no_dr",       "no_md",
                                                     "no_dr_no_md", "no_ce",      "no_rec"};
    for (const auto& m : methods) {
        if (known_methods.count(m) == 0) {
            throw ValidationError("config: unknown method '" + m + "'");
        }
    }
    if (methods.empty()) throw ValidationError("config: methods must not be empty");
}

std::string RunConfig::method_name() const {
    if (!use_dr && !use_md) return "no_dr_no_md";
    if (!use_dr) return "no_dr";
    if (!use_md) return "no_md";
    if (!md.use_ce) return "no_ce";
    if (!md.use_rec) return "no_rec";
    return "full";
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.dr.seed = *o.seed;
        cfg.md.seed = *o.seed;
        if (cfg.data.synthetic) cfg.data.synthetic->seed = *o.seed;
    }
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    if (o.no_dr) cfg.use_dr = false;
    if (o.no_md) cfg.use_md = false;
    if (o.no_ce) cfg.md.use_ce = false;
    if (o.no_rec) cfg.md.use_rec = false;
    cfg.validate();
}

MethodFlags method_flags(const std::string& method) {
    if (method == "full") return {};
    if (method == "no_dr") return {false, true, true, true};
    if (method == "no_md") return {true, false, true, true};
    if (method == "no_dr_no_md") return {false, false, true, true};
    if (method == "no_ce") return {true, true, false, true};
    if (method == "no_rec") return {true, true, true, false};
    throw ValidationError("unknown method '" + method + "'");
}

}  // namespace mddr::cli
