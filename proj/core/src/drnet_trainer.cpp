#include "mddr/drnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mddr/autograd/ops.hpp"
#include "mddr/common/errors.hpp"
#include "mddr/nets/optim.hpp"

namespace mddr::drnet {

namespace ag = autograd;
using datakit::DomainDataset;
using datakit::PadLabel;

void DRConfig::validate() const {
    if (epochs < 0) throw ValidationError("DRConfig: epochs must be >= 0");
    if (batch_size <= 0) throw ValidationError("DRConfig: batch_size must be positive");
    if (!(learning_rate > 0)) throw ValidationError("DRConfig: learning_rate must be positive");
    if (!(lambda_cls > 0)) throw ValidationError("DRConfig: lambda must be positive");
    if (d_steps_per_g_step < 1) throw ValidationError("DRConfig: d_steps_per_g_step must be >= 1");
}

namespace {

Tensor one_hot(const std::vector<int>& labels, int num_classes) {
    Tensor t({static_cast<int>(labels.size()), num_classes});
    for (size_t i = 0; i < labels.size(); ++i) {
        t[static_cast<int64_t>(i) * num_classes + labels[i]] = 1.0f;
    }
    return t;
}

Tensor draw_noise(Rng& rng, int batch, int dim) {
    Tensor t({batch, dim});
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.normal());
    return t;
}

std::vector<int> draw_class_codes(Rng& rng, int batch, int num_classes) {
    std::vector<int> codes(static_cast<size_t>(batch));
    for (auto& c : codes) c = rng.uniform_int(num_classes);
    return codes;
}

void check_finite(double v, const char* what, int epoch) {
    if (!std::isfinite(v)) {
        throw TrainingError(std::string("training aborted: non-finite ") + what + " at epoch " +
                            std::to_string(epoch));
    }
}

std::vector<std::vector<int>> epoch_batches(Rng& rng, int n, int batch_size) {
    const auto order = rng.permutation(n);
    std::vector<std::vector<int>> batches;
    for (int start = 0; start < n; start += batch_size) {
        const int end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
}

struct LabelMaker {
    PlainLabel kind;
    std::map<int, int> subject_index;

    static LabelMaker liveness() { return {PlainLabel::liveness, {}}; }
    static LabelMaker subjects(const DomainDataset& ds) {
        LabelMaker m{PlainLabel::subject, {}};
        int next = 0;
        for (int id : ds.subject_ids()) m.subject_index[id] = next++;
        return m;
    }

    int num_classes() const {
        return kind == PlainLabel::liveness ? 2 : static_cast<int>(subject_index.size());
    }

    std::vector<int> labels(const DomainDataset& ds, const std::vector<int>& indices) const {
        std::vector<int> out;
        out.reserve(indices.size());
        for (int i : indices) {
            const auto& s = ds.sample(static_cast<size_t>(i));
            out.push_back(kind == PlainLabel::liveness
                              ? (s.pad_label == PadLabel::live ? 1 : 0)
                              : subject_index.at(s.subject_id));
        }
        return out;
    }
};

GanTrainResult train_gan(const DomainDataset& dataset, const nets::NetConfig& net_cfg,
                         const DRConfig& cfg, const LabelMaker& labeler,
                         const std::string& tag) {
    cfg.validate();
    if (dataset.empty()) {
        throw ValidationError("train " + tag + ": dataset '" + dataset.domain_id() + "' is empty");
    }

    const int num_classes = labeler.num_classes();
    nets::NetConfig arch = net_cfg;
    arch.num_class_outputs = num_classes;
    arch.validate();

    const uint64_t seed = mix_seed(cfg.seed, tag + "/" + dataset.domain_id());
    GanTrainResult result;
    result.generator = std::make_unique<nets::GeneratorNet>(arch, mix_seed(seed, "G"));
    result.encoder = std::make_unique<nets::EncoderNet>(arch, mix_seed(seed, "D"));
    auto& G = *result.generator;
    auto& D = *result.encoder;

    nets::Adam opt_d, opt_g;
    const nets::AdamConfig adam{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, 1e-8};
    opt_d.add_group(D.parameters(), adam);
    opt_g.add_group(G.parameters(), adam);

    Rng rng(mix_seed(seed, "train"));
    const int n = static_cast<int>(dataset.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        GanHistoryEntry entry;
        entry.epoch = epoch;
        int steps = 0;

        for (const auto& batch : epoch_batches(rng, n, cfg.batch_size)) {
            const int B = static_cast<int>(batch.size());
            Tensor real = cfg.augment.any()
                              ? datakit::stack_images_augmented(dataset, batch, rng, cfg.augment)
                              : datakit::stack_images(dataset, batch);
            const auto real_labels = labeler.labels(dataset, batch);
            auto real_var = ag::Variable::leaf(std::move(real), false);

            for (int d_step = 0; d_step < cfg.d_steps_per_g_step; ++d_step) {
                // generated batch, detached from G
                Tensor fake_images;
                const auto codes = draw_class_codes(rng, B, num_classes);
                {
                    ag::NoGradGuard no_grad;
                    auto z = ag::Variable::leaf(draw_noise(rng, B, arch.noise_dim), false);
                    auto c = ag::Variable::leaf(one_hot(codes, num_classes), false);
                    fake_images = G.forward(z, c).value();
                }
                auto fake_var = ag::Variable::leaf(std::move(fake_images), false);

                auto out_real = D.forward(real_var);
                auto out_fake = D.forward(fake_var);
                auto d_gan = ag::gan_d_loss(out_real.adv_logits, out_fake.adv_logits);
                auto d_cls = ag::aux_class_loss(out_real.cls_logits, real_labels,
                                                out_fake.cls_logits, codes);
                auto d_total = ag::add_scaled(d_gan, d_cls, cfg.lambda_cls);

                check_finite(d_total.value()[0], "discriminator loss", epoch);
                opt_d.zero_grad();
                ag::backward(d_total);
                opt_d.step();

                entry.d_gan += d_gan.value()[0];
                entry.d_cls += d_cls.value()[0];
                entry.d_total += d_total.value()[0];
            }

            // generator step; the discriminator's parameters are excluded
            // from the graph but its activations still carry the gradient
            const auto codes_g = draw_class_codes(rng, B, num_classes);
            auto z = ag::Variable::leaf(draw_noise(rng, B, arch.noise_dim), false);
            auto c = ag::Variable::leaf(one_hot(codes_g, num_classes), false);
            auto fake = G.forward(z, c);

            D.set_requires_grad(false);
            auto out_fake = D.forward(fake);
            auto g_gan = ag::gan_g_loss(out_fake.adv_logits);
            auto g_cls = ag::aux_class_loss(ag::Variable(), {}, out_fake.cls_logits, codes_g);
            auto g_total = ag::add_scaled(g_gan, g_cls, cfg.lambda_cls);

            check_finite(g_total.value()[0], "generator loss", epoch);
            opt_g.zero_grad();
            ag::backward(g_total);
            opt_g.step();
            D.set_requires_grad(true);

            entry.g_gan += g_gan.value()[0];
            entry.g_cls += g_cls.value()[0];
            entry.g_total += g_total.value()[0];
            ++steps;
        }

        if (steps > 0) {
            const double d_norm = static_cast<double>(steps) * cfg.d_steps_per_g_step;
            entry.d_total /= d_norm;
            entry.d_gan /= d_norm;
            entry.d_cls /= d_norm;
            entry.g_total /= steps;
            entry.g_gan /= steps;
            entry.g_cls /= steps;
        }
        result.history.push_back(entry);
    }
    if (cfg.epochs > 0) recalibrate_encoder_stats(D, {&dataset});
    return result;
}

}  // namespace

GanTrainResult train_pad_gan(const DomainDataset& dataset, const nets::NetConfig& net_cfg,
                             const DRConfig& cfg) {
    if (!dataset.has_both_classes()) {
        throw ValidationError("train_pad_gan: dataset '" + dataset.domain_id() +
                              "' must contain both live and spoof samples");
    }
    return train_gan(dataset, net_cfg, cfg, LabelMaker::liveness(), "pad_gan");
}

GanTrainResult train_id_gan(const DomainDataset& dataset, const nets::NetConfig& net_cfg,
                            const DRConfig& cfg) {
    if (dataset.subject_ids().size() < 2) {
        throw ValidationError("train_id_gan: dataset '" + dataset.domain_id() +
                              "' must contain at least 2 subjects");
    }
    return train_gan(dataset, net_cfg, cfg, LabelMaker::subjects(dataset), "id_gan");
}

GanTrainResult train_plain_encoder(const DomainDataset& dataset, const nets::NetConfig& net_cfg,
                                   const DRConfig& cfg, PlainLabel label_kind) {
    cfg.validate();
    if (label_kind == PlainLabel::liveness && !dataset.has_both_classes()) {
        throw ValidationError("train_plain_encoder: dataset '" + dataset.domain_id() +
                              "' must contain both live and spoof samples");
    }
    if (label_kind == PlainLabel::subject && dataset.subject_ids().size() < 2) {
        throw ValidationError("train_plain_encoder: dataset '" + dataset.domain_id() +
                              "' must contain at least 2 subjects");
    }

    const auto labeler = label_kind == PlainLabel::liveness ? LabelMaker::liveness()
                                                            : LabelMaker::subjects(dataset);
    const std::string tag = label_kind == PlainLabel::liveness ? "plain_pad" : "plain_id";

    nets::NetConfig arch = net_cfg;
    arch.num_class_outputs = labeler.num_classes();
    arch.validate();

    const uint64_t seed = mix_seed(cfg.seed, tag + "/" + dataset.domain_id());
    GanTrainResult result;
    result.encoder = std::make_unique<nets::EncoderNet>(arch, mix_seed(seed, "D"));
    auto& D = *result.encoder;

    nets::Adam opt;
    opt.add_group(D.parameters(), {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, 1e-8});

    Rng rng(mix_seed(seed, "train"));
    const int n = static_cast<int>(dataset.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        GanHistoryEntry entry;
        entry.epoch = epoch;
        int steps = 0;
        for (const auto& batch : epoch_batches(rng, n, cfg.batch_size)) {
            Tensor images = cfg.augment.any()
                                ? datakit::stack_images_augmented(dataset, batch, rng, cfg.augment)
                                : datakit::stack_images(dataset, batch);
            auto x = ag::Variable::leaf(std::move(images), false);
            auto out = D.forward(x);
            auto loss = ag::softmax_ce(out.cls_logits, labeler.labels(dataset, batch));
            check_finite(loss.value()[0], "classification loss", epoch);
            opt.zero_grad();
            ag::backward(loss);
            opt.step();
            entry.d_cls += loss.value()[0];
            entry.d_total += loss.value()[0];
            ++steps;
        }
        if (steps > 0) {
            entry.d_cls /= steps;
            entry.d_total /= steps;
        }
        result.history.push_back(entry);
    }
    if (cfg.epochs > 0) recalibrate_encoder_stats(D, {&dataset});
    return result;
}

namespace {

std::vector<EncoderPair> train_all_impl(const std::vector<DomainDataset>& domains,
                                        const nets::NetConfig& net_cfg, const DRConfig& cfg,
                                        bool adversarial) {
    if (domains.empty()) throw ValidationError("train_dr_all: need at least one domain");
    std::vector<EncoderPair> pairs;
    pairs.reserve(domains.size());
    for (const auto& domain : domains) {
        try {
            EncoderPair pair;
            pair.domain_id = domain.domain_id();
            pair.subject_ids = domain.subject_ids();
            if (adversarial) {
                pair.e_pad = train_pad_gan(domain, net_cfg, cfg).encoder;
                pair.e_id = train_id_gan(domain, net_cfg, cfg).encoder;
            } else {
                pair.e_pad =
                    train_plain_encoder(domain, net_cfg, cfg, PlainLabel::liveness).encoder;
                pair.e_id =
                    train_plain_encoder(domain, net_cfg, cfg, PlainLabel::subject).encoder;
            }
            pairs.push_back(std::move(pair));
        } catch (const std::runtime_error& e) {
            throw TrainingError("domain '" + domain.domain_id() + "': " + e.what());
        }
    }
    return pairs;
}

}  // namespace

std::vector<EncoderPair> train_dr_all(const std::vector<DomainDataset>& domains,
                                      const nets::NetConfig& net_cfg, const DRConfig& cfg) {
    return train_all_impl(domains, net_cfg, cfg, true);
}

std::vector<EncoderPair> train_plain_all(const std::vector<DomainDataset>& domains,
                                         const nets::NetConfig& net_cfg, const DRConfig& cfg) {
    return train_all_impl(domains, net_cfg, cfg, false);
}

double head_cls_accuracy(nets::EncoderNet& encoder, const DomainDataset& dataset,
                         PlainLabel label_kind) {
    if (dataset.empty()) throw ValidationError("head_cls_accuracy: empty dataset");
    const auto labeler = label_kind == PlainLabel::liveness ? LabelMaker::liveness()
                                                            : LabelMaker::subjects(dataset);
    const bool was_training = encoder.is_training();
    encoder.set_training(false);
    ag::NoGradGuard no_grad;

    const int n = static_cast<int>(dataset.size());
    const int chunk = 64;
    int correct = 0;
    for (int start = 0; start < n; start += chunk) {
        std::vector<int> idx;
        for (int i = start; i < std::min(n, start + chunk); ++i) idx.push_back(i);
        auto x = ag::Variable::leaf(datakit::stack_images(dataset, idx), false);
        const Tensor logits = encoder.forward(x).cls_logits.value();
        const auto labels = labeler.labels(dataset, idx);
        const int K = logits.dim(1);
        for (size_t b = 0; b < idx.size(); ++b) {
            int best = 0;
            for (int k = 1; k < K; ++k) {
                if (logits[static_cast<int64_t>(b) * K + k] > logits[static_cast<int64_t>(b) * K + best]) {
                    best = k;
                }
            }
            if (best == labels[b]) ++correct;
        }
    }
    encoder.set_training(was_training);
    return static_cast<double>(correct) / n;
}

void recalibrate_encoder_stats(nets::EncoderNet& encoder,
                               const std::vector<const DomainDataset*>& datasets,
                               int batch_size) {
    std::vector<nets::BatchNorm2d*> bns;
    for (auto* m : encoder.submodules()) {
        if (auto* bn = dynamic_cast<nets::BatchNorm2d*>(m)) bns.push_back(bn);
    }
    if (bns.empty()) return;

    const bool was_training = encoder.is_training();
    encoder.set_training(true);
    ag::NoGradGuard no_grad;

    int k = 0;
    for (const auto* ds : datasets) {
        const int n = static_cast<int>(ds->size());
        for (int start = 0; start < n; start += batch_size) {
            ++k;
            for (auto* bn : bns) bn->set_momentum(1.0 / k);
            std::vector<int> idx;
            for (int i = start; i < std::min(n, start + batch_size); ++i) idx.push_back(i);
            auto x = ag::Variable::leaf(datakit::stack_images(*ds, idx), false);
            encoder.features(x);
        }
    }
    for (auto* bn : bns) bn->set_momentum(0.1);
    encoder.set_training(was_training);
}

std::vector<int> subject_class_indices(const DomainDataset& dataset,
                                       const std::vector<int>& sample_indices) {
    std::map<int, int> index;
    int next = 0;
    for (int id : dataset.subject_ids()) index[id] = next++;
    std::vector<int> out;
    out.reserve(sample_indices.size());
    for (int i : sample_indices) {
        out.push_back(index.at(dataset.sample(static_cast<size_t>(i)).subject_id));
    }
    return out;
}

}  // namespace mddr::drnet
