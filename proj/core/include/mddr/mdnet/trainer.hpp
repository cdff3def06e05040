#pragma once

#include <memory>
#include <vector>

#include "mddr/drnet/trainer.hpp"
#include "mddr/mdnet/features.hpp"

namespace mddr::mdnet {

/// Stage-2 settings. The two learning rates follow the fine-tuning split:
/// the smaller one updates the pretrained PAD encoders, the larger one the
/// fresh classification heads and reconstruction decoders.
struct MDConfig {
    int epochs = 20;
    int batch_size = 32;
    double encoder_lr = 1e-5;
    double head_lr = 1e-4;
    bool use_ce = true;
    bool use_rec = true;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    uint64_t seed = 0;

    void validate() const;
};

struct MDHistoryEntry {
    int epoch = 0;
    double total = 0, ce = 0, rec = 0;
};

/// Stage-2 outputs in domain order. The classification heads and decoders
/// are always constructed so the frozen-parameter contracts can be checked;
/// a disabled loss leaves its modules untouched.
struct MDArtifacts {
    std::vector<std::string> domain_ids;
    std::vector<std::unique_ptr<nets::EncoderNet>> pad_encoders;     // fine-tuned copies
    std::vector<std::unique_ptr<nets::LinearClassifier>> heads;      // F_i on U_i
    std::vector<std::unique_ptr<nets::DecoderNet>> decoders;         // D_REC^i
    std::vector<MDHistoryEntry> history;
};

/// Cross-verified multi-domain feature learning over two source domains:
/// per step, U_A pairs the PAD feature of A's images under domain B's PAD
/// encoder with A's own frozen ID feature (and symmetrically for B). The
/// PAD encoders are fine-tuned at encoder_lr; heads and decoders train at
/// head_lr; the ID encoders stay fixed.
MDArtifacts train_mdnet(drnet::EncoderPair& pair_a, drnet::EncoderPair& pair_b,
                        const datakit::DomainDataset& data_a,
                        const datakit::DomainDataset& data_b, const MDConfig& cfg);

/// N-domain extension with cyclic PAD-encoder assignment: domain i's images
/// are encoded by domain (i+1 mod N)'s PAD encoder. N=2 reduces exactly to
/// train_mdnet.
MDArtifacts generalize_to_n_domains(const std::vector<drnet::EncoderPair*>& pairs,
                                    const std::vector<const datakit::DomainDataset*>& datasets,
                                    const MDConfig& cfg);

/// Final liveness classifier over the concatenation of every PAD encoder's
/// features (domain order), trained with binary cross-entropy on all
/// training images. The encoders are frozen.
std::unique_ptr<nets::LinearClassifier> train_final_classifier(
    const std::vector<nets::EncoderNet*>& pad_encoders,
    const std::vector<const datakit::DomainDataset*>& datasets, const MDConfig& cfg);

}  // namespace mddr::mdnet
