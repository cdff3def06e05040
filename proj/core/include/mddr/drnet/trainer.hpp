#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mddr/datakit/batch.hpp"
#include "mddr/datakit/dataset.hpp"
#include "mddr/nets/networks.hpp"

namespace mddr::drnet {

/// Stage-1 training settings. One epoch is a full pass over the dataset in a
/// seeded shuffled order; the final partial batch is kept.
struct DRConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 2e-3;   // Adam, fixed
    double lambda_cls = 1.0;       // weight of the classification term
    int d_steps_per_g_step = 1;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    uint64_t seed = 0;
    datakit::AugmentPolicy augment{};  // disabled by default

    void validate() const;
};

struct GanHistoryEntry {
    int epoch = 0;
    double d_total = 0, d_gan = 0, d_cls = 0;
    double g_total = 0, g_gan = 0, g_cls = 0;
};

struct GanTrainResult {
    std::unique_ptr<nets::GeneratorNet> generator;  // null for the plain ablation
    std::unique_ptr<nets::EncoderNet> encoder;
    std::vector<GanHistoryEntry> history;           // one entry per epoch
};

/// Adversarial liveness model: the discriminator classifies real-vs-generated
/// through one head and live-vs-spoof through the other; the generator is
/// conditioned on a sampled class code that serves as the generated image's
/// class label. Fully deterministic given (dataset, configs).
GanTrainResult train_pad_gan(const datakit::DomainDataset& dataset,
                             const nets::NetConfig& net_cfg, const DRConfig& cfg);

/// Same procedure with one class per subject.
GanTrainResult train_id_gan(const datakit::DomainDataset& dataset,
                            const nets::NetConfig& net_cfg, const DRConfig& cfg);

/// Supervised stand-in used by the --no-dr ablation: the same encoder trunk
/// trained with plain cross-entropy, no generator. History carries the CE
/// loss in the d_* fields.
enum class PlainLabel { liveness, subject };
GanTrainResult train_plain_encoder(const datakit::DomainDataset& dataset,
                                   const nets::NetConfig& net_cfg, const DRConfig& cfg,
                                   PlainLabel label_kind);

/// The per-domain pair of disentangled feature encoders.
struct EncoderPair {
    std::unique_ptr<nets::EncoderNet> e_pad;
    std::unique_ptr<nets::EncoderNet> e_id;
    std::string domain_id;
    std::vector<int> subject_ids;  // dense class order of e_id's head
};

/// Runs PAD-GAN and ID-GAN independently in every source domain, in input
/// order. No parameters are shared across domains.
std::vector<EncoderPair> train_dr_all(const std::vector<datakit::DomainDataset>& domains,
                                      const nets::NetConfig& net_cfg, const DRConfig& cfg);

/// --no-dr variant: plainly supervised PAD and ID trunks per domain.
std::vector<EncoderPair> train_plain_all(const std::vector<datakit::DomainDataset>& domains,
                                         const nets::NetConfig& net_cfg, const DRConfig& cfg);

/// Mean head_cls accuracy of the encoder on a dataset, with labels produced
/// by `label_kind` (liveness or dense subject index).
double head_cls_accuracy(nets::EncoderNet& encoder, const datakit::DomainDataset& dataset,
                         PlainLabel label_kind);

/// Dense class index of each sample's subject id within the dataset.
std::vector<int> subject_class_indices(const datakit::DomainDataset& dataset,
                                       const std::vector<int>& sample_indices);

/// One no-gradient sweep over the given datasets that replaces every
/// batchnorm layer's running statistics with the cumulative average of the
/// sweep's batch statistics. Inference-mode features then reflect the real
/// training distribution; without this, a discriminator's running stats also
/// track the generated batches it saw during training.
void recalibrate_encoder_stats(nets::EncoderNet& encoder,
                               const std::vector<const datakit::DomainDataset*>& datasets,
                               int batch_size = 256);

}  // namespace mddr::drnet
