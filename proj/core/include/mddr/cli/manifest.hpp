#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mddr::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::filesystem::path& path);

/// Atomic text write (temp file + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// Provenance record written next to every command's outputs: the command,
/// seed, a hash of the normalized config, and content hashes of all inputs
/// and outputs. No timestamps, so reruns are byte-identical.
struct Manifest {
    std::string command;
    uint64_t seed = 0;
    std::string config_sha256;
    std::vector<std::pair<std::string, std::string>> inputs;   // (relpath, sha256)
    std::vector<std::pair<std::string, std::string>> outputs;  // (relpath, sha256)

    void add_input(const std::filesystem::path& base, const std::filesystem::path& file);
    void add_output(const std::filesystem::path& base, const std::filesystem::path& file);
    void write(const std::filesystem::path& dir) const;  // dir/manifests/<command>.json
};

}  // namespace mddr::cli
