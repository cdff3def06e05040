#include "mddr/nets/config.hpp"

#include <nlohmann/json.hpp>

#include "mddr/common/errors.hpp"

namespace mddr::nets {

using nlohmann::json;

void NetConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v <= 0) throw ValidationError(std::string("NetConfig: ") + name + " must be positive");
    };
    positive(resolution, "resolution");
    positive(noise_dim, "noise_dim");
    positive(feature_dim, "feature_dim");
    positive(residual_blocks, "residual_blocks");
    positive(upsample_stages, "upsample_stages");
    positive(base_channels, "base_channels");
    positive(stem_stride, "stem_stride");
    if (num_class_outputs < 2) {
        throw ValidationError("NetConfig: num_class_outputs must be >= 2");
    }
    if (resolution % (1 << upsample_stages) != 0 || initial_size() < 1) {
        throw ValidationError(
            "NetConfig: resolution must be initial_size * 2^upsample_stages with initial_size >= 1");
    }
    const int trunk_down = stem_stride << residual_blocks;
    if (resolution % trunk_down != 0 || resolution / trunk_down < 1) {
        throw ValidationError("NetConfig: resolution too small for residual_blocks/stem_stride");
    }
}

NetConfig NetConfig::desk_default() { return NetConfig{}; }

NetConfig NetConfig::paper_scale() {
    NetConfig cfg;
    cfg.resolution = 256;
    cfg.noise_dim = 512;
    cfg.feature_dim = 1024;
    cfg.residual_blocks = 4;
    cfg.upsample_stages = 7;
    cfg.base_channels = 64;
    cfg.stem_stride = 2;
    return cfg;
}

std::string NetConfig::to_json_string() const {
    json j{{"resolution", resolution},
           {"noise_dim", noise_dim},
           {"feature_dim", feature_dim},
           {"num_class_outputs", num_class_outputs},
           {"residual_blocks", residual_blocks},
           {"upsample_stages", upsample_stages},
           {"base_channels", base_channels},
           {"stem_stride", stem_stride},
           {"trunk_batchnorm", trunk_batchnorm},
           {"generator_batchnorm", generator_batchnorm}};
    return j.dump();
}

NetConfig NetConfig::from_json_string(const std::string& s) {
    const json j = json::parse(s);
    NetConfig cfg;
    cfg.resolution = j.at("resolution").get<int>();
    cfg.noise_dim = j.at("noise_dim").get<int>();
    cfg.feature_dim = j.at("feature_dim").get<int>();
    cfg.num_class_outputs = j.at("num_class_outputs").get<int>();
    cfg.residual_blocks = j.at("residual_blocks").get<int>();
    cfg.upsample_stages = j.at("upsample_stages").get<int>();
    cfg.base_channels = j.at("base_channels").get<int>();
    cfg.stem_stride = j.at("stem_stride").get<int>();
    cfg.trunk_batchnorm = j.at("trunk_batchnorm").get<bool>();
    cfg.generator_batchnorm = j.at("generator_batchnorm").get<bool>();
    cfg.validate();
    return cfg;
}

}  // namespace mddr::nets
