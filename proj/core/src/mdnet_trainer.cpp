#include "mddr/mdnet/trainer.hpp"

#include <cmath>

#include "mddr/autograd/ops.hpp"
#include "mddr/common/errors.hpp"
#include "mddr/nets/optim.hpp"
#include "mddr/nets/snapshot.hpp"

namespace mddr::mdnet {

namespace ag = autograd;
using datakit::DomainDataset;

void MDConfig::validate() const {
    if (epochs < 0) throw ValidationError("MDConfig: epochs must be >= 0");
    if (batch_size <= 0) throw ValidationError("MDConfig: batch_size must be positive");
    if (!(encoder_lr > 0) || !(head_lr > 0)) {
        throw ValidationError("MDConfig: learning rates must be positive");
    }
    if (!use_ce && !use_rec) {
        throw ValidationError("MDConfig: at least one of use_ce/use_rec must be enabled");
    }
}

namespace {

std::unique_ptr<nets::EncoderNet> clone_encoder(const nets::EncoderNet& src) {
    auto copy = std::make_unique<nets::EncoderNet>(src.config(), 0);
    nets::restore_params(*copy, nets::snapshot_params(src));
    return copy;
}

std::vector<int> draw_indices(Rng& rng, int n, int batch) {
    std::vector<int> idx(static_cast<size_t>(batch));
    for (auto& i : idx) i = rng.uniform_int(n);
    return idx;
}

}  // namespace

MDArtifacts generalize_to_n_domains(const std::vector<drnet::EncoderPair*>& pairs,
                                    const std::vector<const DomainDataset*>& datasets,
                                    const MDConfig& cfg) {
    cfg.validate();
    const int N = static_cast<int>(pairs.size());
    if (N < 2) throw ValidationError("generalize_to_n_domains: need at least 2 domains");
    if (datasets.size() != pairs.size()) {
        throw ValidationError("generalize_to_n_domains: pairs/datasets count mismatch");
    }
    for (const auto* p : pairs) {
        if (!p || !p->e_pad || !p->e_id) {
            throw ValidationError("generalize_to_n_domains: pair is missing an encoder");
        }
    }
    const int D = pairs[0]->e_pad->config().feature_dim;
    for (const auto* p : pairs) {
        if (p->e_pad->config().feature_dim != D || p->e_id->config().feature_dim != D) {
            throw ShapeError("generalize_to_n_domains: feature_dim mismatch across encoder pairs");
        }
    }
    for (int i = 0; i < N; ++i) {
        if (datasets[static_cast<size_t>(i)]->domain_id() != pairs[static_cast<size_t>(i)]->domain_id) {
            throw ValidationError("generalize_to_n_domains: dataset order must match pair order");
        }
        if (datasets[static_cast<size_t>(i)]->empty()) {
            throw ValidationError("generalize_to_n_domains: dataset '" +
                                  datasets[static_cast<size_t>(i)]->domain_id() + "' is empty");
        }
    }

    MDArtifacts art;
    for (int i = 0; i < N; ++i) {
        const auto& pair = *pairs[static_cast<size_t>(i)];
        art.domain_ids.push_back(pair.domain_id);
        art.pad_encoders.push_back(clone_encoder(*pair.e_pad));
        const uint64_t sub = mix_seed(cfg.seed, "mdnet/" + pair.domain_id);
        art.heads.push_back(std::make_unique<nets::LinearClassifier>(2 * D, mix_seed(sub, "head")));
        art.decoders.push_back(std::make_unique<nets::DecoderNet>(pair.e_pad->config(), 2 * D,
                                                                  mix_seed(sub, "decoder")));
    }

    // ID encoders stay frozen: inference mode, no gradient, not optimized.
    for (auto* p : pairs) p->e_id->set_training(false);

    nets::Adam opt;
    {
        std::vector<ag::Variable> enc_params;
        for (auto& e : art.pad_encoders) {
            for (auto& v : e->parameters()) enc_params.push_back(v);
        }
        opt.add_group(enc_params, {cfg.encoder_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});

        std::vector<ag::Variable> head_params;
        if (cfg.use_ce) {
            for (auto& h : art.heads) {
                for (auto& v : h->parameters()) head_params.push_back(v);
            }
        }
        if (cfg.use_rec) {
            for (auto& d : art.decoders) {
                for (auto& v : d->parameters()) head_params.push_back(v);
            }
        }
        if (!head_params.empty()) {
            opt.add_group(head_params, {cfg.head_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});
        }
    }

    Rng rng(mix_seed(cfg.seed, "mdnet/train"));
    size_t max_n = 0;
    for (const auto* d : datasets) max_n = std::max(max_n, d->size());
    const int steps_per_epoch =
        static_cast<int>((max_n + static_cast<size_t>(cfg.batch_size) - 1) / cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        MDHistoryEntry entry;
        entry.epoch = epoch;
        for (int step = 0; step < steps_per_epoch; ++step) {
            ag::Variable total;
            double ce_sum = 0.0, rec_sum = 0.0;
            for (int i = 0; i < N; ++i) {
                const DomainDataset& ds = *datasets[static_cast<size_t>(i)];
                const auto idx = draw_indices(rng, static_cast<int>(ds.size()), cfg.batch_size);
                Tensor images = datakit::stack_images(ds, idx);
                auto x = ag::Variable::leaf(images, false);

                // PAD part from the next domain's encoder (with gradient)
                nets::EncoderNet& pad_enc = *art.pad_encoders[static_cast<size_t>((i + 1) % N)];
                pad_enc.set_training(true);
                auto pad_feat = pad_enc.features(x);

                // ID part from this domain's frozen encoder (constant)
                Tensor id_feat_v;
                {
                    ag::NoGradGuard no_grad;
                    id_feat_v = pairs[static_cast<size_t>(i)]->e_id->features(x).value();
                }
                auto id_feat = ag::Variable::leaf(std::move(id_feat_v), false);

                auto u = ag::concat_features({pad_feat, id_feat});

                if (cfg.use_ce) {
                    auto logits = art.heads[static_cast<size_t>(i)]->forward(u);
                    auto ce = ag::bce_with_logits(logits, datakit::liveness_labels(ds, idx));
                    ce_sum += ce.value()[0];
                    total = total.defined() ? ag::add(total, ce) : ce;
                }
                if (cfg.use_rec) {
                    auto recon = art.decoders[static_cast<size_t>(i)]->forward(u);
                    auto rec = ag::l1_loss(recon, images);
                    rec_sum += rec.value()[0];
                    total = total.defined() ? ag::add(total, rec) : rec;
                }
            }

            const double total_v = total.value()[0];
            if (!std::isfinite(total_v)) {
                throw TrainingError("mdnet: non-finite loss at epoch " + std::to_string(epoch));
            }
            opt.zero_grad();
            ag::backward(total);
            opt.step();

            entry.total += total_v;
            entry.ce += ce_sum;
            entry.rec += rec_sum;
        }
        if (steps_per_epoch > 0) {
            entry.total /= steps_per_epoch;
            entry.ce /= steps_per_epoch;
            entry.rec /= steps_per_epoch;
        }
        art.history.push_back(entry);
    }
    if (cfg.epochs > 0) {
        for (auto& enc : art.pad_encoders) {
            drnet::recalibrate_encoder_stats(*enc, datasets);
        }
    }
    return art;
}

MDArtifacts train_mdnet(drnet::EncoderPair& pair_a, drnet::EncoderPair& pair_b,
                        const DomainDataset& data_a, const DomainDataset& data_b,
                        const MDConfig& cfg) {
    std::vector<drnet::EncoderPair*> pairs{&pair_a, &pair_b};
    std::vector<const DomainDataset*> datasets{&data_a, &data_b};
    return generalize_to_n_domains(pairs, datasets, cfg);
}

std::unique_ptr<nets::LinearClassifier> train_final_classifier(
    const std::vector<nets::EncoderNet*>& pad_encoders,
    const std::vector<const DomainDataset*>& datasets, const MDConfig& cfg) {
    cfg.validate();
    if (pad_encoders.empty()) {
        throw ValidationError("train_final_classifier: no PAD encoders");
    }
    if (datasets.empty()) throw ValidationError("train_final_classifier: no datasets");

    const int D = pad_encoders[0]->config().feature_dim;
    const int width = static_cast<int>(pad_encoders.size()) * D;

    // Frozen encoders: extract all features once, then fit the linear head.
    std::vector<float> rows;
    std::vector<int> labels;
    for (const auto* ds : datasets) {
        std::vector<int> idx(ds->size());
        for (size_t i = 0; i < ds->size(); ++i) idx[i] = static_cast<int>(i);
        const Tensor feats = concat_encoder_features(pad_encoders, *ds, idx);
        rows.insert(rows.end(), feats.vec().begin(), feats.vec().end());
        const auto ls = datakit::liveness_labels(*ds, idx);
        labels.insert(labels.end(), ls.begin(), ls.end());
    }
    const int n = static_cast<int>(labels.size());
    Tensor features({n, width}, std::move(rows));

    auto clf = std::make_unique<nets::LinearClassifier>(width, mix_seed(cfg.seed, "f_md"));
    nets::Adam opt;
    opt.add_group(clf->parameters(), {cfg.head_lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8});

    Rng rng(mix_seed(cfg.seed, "f_md/train"));
    for (int epoch = 0; epoch < std::max(1, cfg.epochs); ++epoch) {
        const auto order = rng.permutation(n);
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int end = std::min(n, start + cfg.batch_size);
            const int B = end - start;
            Tensor batch({B, width});
            std::vector<int> y(static_cast<size_t>(B));
            for (int b = 0; b < B; ++b) {
                const int src = order[static_cast<size_t>(start + b)];
                std::copy_n(features.data() + static_cast<int64_t>(src) * width, width,
                            batch.data() + static_cast<int64_t>(b) * width);
                y[static_cast<size_t>(b)] = labels[static_cast<size_t>(src)];
            }
            auto logits = clf->forward(ag::Variable::leaf(std::move(batch), false));
            auto loss = ag::bce_with_logits(logits, y);
            if (!std::isfinite(static_cast<double>(loss.value()[0]))) {
                throw TrainingError("train_final_classifier: non-finite loss");
            }
            opt.zero_grad();
            ag::backward(loss);
            opt.step();
        }
    }
    return clf;
}

}  // namespace mddr::mdnet
