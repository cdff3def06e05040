#include "mddr/cli/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "mddr/common/errors.hpp"

namespace mddr::cli {

namespace {

std::string digest_to_hex(const unsigned char* digest, unsigned int len) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
        throw IoError("sha256: digest failed");
    }
    return digest_to_hex(digest, len);
}

std::string sha256_file_hex(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("sha256: cannot open " + path.string());

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw IoError("sha256: context allocation failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        const std::streamsize got = is.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    return digest_to_hex(digest, len);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write " + tmp);
        os << content;
        if (!os) throw IoError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void Manifest::add_input(const std::filesystem::path& base, const std::filesystem::path& file) {
    inputs.emplace_back(std::filesystem::relative(file, base).generic_string(),
                        sha256_file_hex(file));
}

void Manifest::add_output(const std::filesystem::path& base, const std::filesystem::path& file) {
    outputs.emplace_back(std::filesystem::relative(file, base).generic_string(),
                         sha256_file_hex(file));
}

void Manifest::write(const std::filesystem::path& dir) const {
    nlohmann::json ins = nlohmann::json::object();
    for (const auto& [path, hash] : inputs) ins[path] = hash;
    nlohmann::json outs = nlohmann::json::object();
    for (const auto& [path, hash] : outputs) outs[path] = hash;
    const nlohmann::json j{{"command", command},
                           {"seed", seed},
                           {"config_sha256", config_sha256},
                           {"inputs", ins},
                           {"outputs", outs},
                           {"tool", "mddr 0.1.0"}};
    write_text_atomic(dir / "manifests" / (command + ".json"), j.dump(2) + "\n");
}

}  // namespace mddr::cli
