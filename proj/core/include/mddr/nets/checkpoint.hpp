#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "mddr/nets/config.hpp"
#include "mddr/nets/networks.hpp"

namespace mddr::nets {

/// Checkpoint files are a single binary archive: a JSON manifest (net kind,
/// role tag, training step, NetConfig, auxiliary input width) followed by
/// raw little-endian float32 parameter blobs keyed by layer path.
struct CheckpointMeta {
    std::string net_kind;  // generator | encoder | decoder | linear
    std::string role;      // e.g. pad_gan_D, f_md
    long step = 0;
    NetConfig config;
    int in_features = 0;   // decoder/linear input width; 0 otherwise
};

void save_checkpoint(const Module& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path);

/// Loads parameters into an already constructed net; throws ValidationError
/// if the checkpoint's architecture does not match.
CheckpointMeta load_checkpoint_into(Module& net, const std::filesystem::path& path);

// Factories constructing the net from the embedded config.
std::unique_ptr<GeneratorNet> load_generator_checkpoint(const std::filesystem::path& path);
std::unique_ptr<EncoderNet> load_encoder_checkpoint(const std::filesystem::path& path);
std::unique_ptr<DecoderNet> load_decoder_checkpoint(const std::filesystem::path& path);
std::unique_ptr<LinearClassifier> load_linear_checkpoint(const std::filesystem::path& path);

}  // namespace mddr::nets
