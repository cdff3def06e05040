#include "mddr/nets/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "mddr/common/errors.hpp"
#include "mddr/nets/snapshot.hpp"

namespace mddr::nets {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'D', 'D', 'R', 'C', 'K', 'P', '1'};

void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

json meta_to_json(const CheckpointMeta& meta) {
    return json{{"format_version", 1},
                {"net_kind", meta.net_kind},
                {"role", meta.role},
                {"step", meta.step},
                {"config", json::parse(meta.config.to_json_string())},
                {"in_features", meta.in_features}};
}

CheckpointMeta meta_from_json(const json& j) {
    CheckpointMeta meta;
    meta.net_kind = j.at("net_kind").get<std::string>();
    meta.role = j.at("role").get<std::string>();
    meta.step = j.at("step").get<long>();
    meta.config = NetConfig::from_json_string(j.at("config").dump());
    meta.in_features = j.at("in_features").get<int>();
    return meta;
}

struct RawCheckpoint {
    CheckpointMeta meta;
    ParamSnapshot snapshot;
};

RawCheckpoint read_raw(const std::filesystem::path& path, bool with_blobs) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("checkpoint: cannot open " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) {
        throw IoError("checkpoint: bad magic in " + path.string());
    }
    const uint32_t manifest_len = read_u32(is);
    std::string manifest(manifest_len, '\0');
    is.read(manifest.data(), manifest_len);
    RawCheckpoint raw;
    raw.meta = meta_from_json(json::parse(manifest));
    const uint32_t n = read_u32(is);
    if (!with_blobs) return raw;
    for (uint32_t i = 0; i < n; ++i) {
        ParamSnapshot::Entry e;
        const uint32_t path_len = read_u32(is);
        e.path.resize(path_len);
        is.read(e.path.data(), path_len);
        char kind = 0;
        is.read(&kind, 1);
        e.is_buffer = kind == 1;
        const uint32_t ndim = read_u32(is);
        e.dims.resize(ndim);
        for (uint32_t d = 0; d < ndim; ++d) e.dims[d] = static_cast<int>(read_u32(is));
        const uint32_t count = read_u32(is);
        e.values.resize(count);
        is.read(reinterpret_cast<char*>(e.values.data()),
                static_cast<std::streamsize>(count) * 4);
        raw.snapshot.entries.push_back(std::move(e));
    }
    if (!is) throw IoError("checkpoint: truncated file " + path.string());
    return raw;
}

}  // namespace

void save_checkpoint(const Module& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
    const auto snap = snapshot_params(net);
    const std::string manifest = meta_to_json(meta).dump();

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("checkpoint: cannot write " + tmp);
        os.write(kMagic, 8);
        write_u32(os, static_cast<uint32_t>(manifest.size()));
        os.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
        write_u32(os, static_cast<uint32_t>(snap.entries.size()));
        for (const auto& e : snap.entries) {
            write_u32(os, static_cast<uint32_t>(e.path.size()));
            os.write(e.path.data(), static_cast<std::streamsize>(e.path.size()));
            const char kind = e.is_buffer ? 1 : 0;
            os.write(&kind, 1);
            write_u32(os, static_cast<uint32_t>(e.dims.size()));
            for (int d : e.dims) write_u32(os, static_cast<uint32_t>(d));
            write_u32(os, static_cast<uint32_t>(e.values.size()));
            os.write(reinterpret_cast<const char*>(e.values.data()),
                     static_cast<std::streamsize>(e.values.size()) * 4);
        }
        if (!os) throw IoError("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path) {
    return read_raw(path, false).meta;
}

CheckpointMeta load_checkpoint_into(Module& net, const std::filesystem::path& path) {
    auto raw = read_raw(path, true);
    restore_params(net, raw.snapshot);
    return raw.meta;
}

namespace {

CheckpointMeta expect_kind(const std::filesystem::path& path, const std::string& kind) {
    auto meta = read_checkpoint_meta(path);
    if (meta.net_kind != kind) {
        throw ValidationError("checkpoint " + path.string() + " holds a '" + meta.net_kind +
                              "' net, expected '" + kind + "'");
    }
    return meta;
}

}  // namespace

std::unique_ptr<GeneratorNet> load_generator_checkpoint(const std::filesystem::path& path) {
    auto meta = expect_kind(path, "generator");
    auto net = std::make_unique<GeneratorNet>(meta.config, 0);
    load_checkpoint_into(*net, path);
    return net;
}

std::unique_ptr<EncoderNet> load_encoder_checkpoint(const std::filesystem::path& path) {
    auto meta = expect_kind(path, "encoder");
    auto net = std::make_unique<EncoderNet>(meta.config, 0);
    load_checkpoint_into(*net, path);
    return net;
}

std::unique_ptr<DecoderNet> load_decoder_checkpoint(const std::filesystem::path& path) {
    auto meta = expect_kind(path, "decoder");
    auto net = std::make_unique<DecoderNet>(meta.config, meta.in_features, 0);
    load_checkpoint_into(*net, path);
    return net;
}

std::unique_ptr<LinearClassifier> load_linear_checkpoint(const std::filesystem::path& path) {
    auto meta = expect_kind(path, "linear");
    auto net = std::make_unique<LinearClassifier>(meta.in_features, 0);
    load_checkpoint_into(*net, path);
    return net;
}

}  // namespace mddr::nets
