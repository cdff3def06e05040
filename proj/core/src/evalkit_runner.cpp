#include "mddr/evalkit/runner.hpp"

#include <algorithm>

#include "mddr/autograd/ops.hpp"
#include "mddr/common/errors.hpp"
#include "mddr/datakit/batch.hpp"
#include "mddr/mdnet/features.hpp"
#include "mddr/objectives/losses.hpp"

namespace mddr::evalkit {

using datakit::DomainDataset;

namespace {

std::vector<int> all_indices(const DomainDataset& ds) {
    std::vector<int> idx(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
}

const DomainDataset& find_domain(const std::vector<DomainDataset>& datasets,
                                 const std::string& id) {
    for (const auto& d : datasets) {
        if (d.domain_id() == id) return d;
    }
    throw ValidationError("run_protocol: domain '" + id + "' not found among the datasets");
}

}  // namespace

ScoreSet infer_scores(const std::vector<nets::EncoderNet*>& pad_encoders,
                      nets::LinearClassifier& f_md, const DomainDataset& dataset) {
    if (dataset.empty()) throw ValidationError("infer_scores: empty dataset");
    const auto idx = all_indices(dataset);
    const Tensor feats = mdnet::concat_encoder_features(pad_encoders, dataset, idx);

    autograd::NoGradGuard no_grad;
    const Tensor logits = f_md.forward(autograd::Variable::leaf(feats, false)).value();

    ScoreSet out;
    out.source = dataset.domain_id();
    out.scores.reserve(dataset.size());
    for (int64_t i = 0; i < logits.numel(); ++i) {
        out.scores.push_back(objectives::stable_sigmoid(logits[i]));
    }
    out.labels = datakit::liveness_labels(dataset, idx);
    return out;
}

ScoreSet infer_scores_cls_head(nets::EncoderNet& pad_encoder, const DomainDataset& dataset) {
    if (dataset.empty()) throw ValidationError("infer_scores_cls_head: empty dataset");
    if (pad_encoder.config().num_class_outputs != 2) {
        throw ValidationError("infer_scores_cls_head: encoder head is not binary");
    }
    const bool was_training = pad_encoder.is_training();
    pad_encoder.set_training(false);
    autograd::NoGradGuard no_grad;

    ScoreSet out;
    out.source = dataset.domain_id();
    const auto idx = all_indices(dataset);
    const int chunk = 64;
    for (size_t start = 0; start < idx.size(); start += chunk) {
        std::vector<int> part(idx.begin() + static_cast<long>(start),
                              idx.begin() + static_cast<long>(std::min(idx.size(), start + chunk)));
        auto x = autograd::Variable::leaf(datakit::stack_images(dataset, part), false);
        const Tensor probs = autograd::softmax_rows(pad_encoder.forward(x).cls_logits.value());
        for (size_t b = 0; b < part.size(); ++b) {
            out.scores.push_back(probs[static_cast<int64_t>(b) * 2 + 1]);  // live class
        }
    }
    out.labels = datakit::liveness_labels(dataset, idx);
    pad_encoder.set_training(was_training);
    return out;
}

ProtocolRunResult run_protocol_full(const ProtocolSpec& spec,
                                    const std::vector<DomainDataset>& datasets,
                                    const nets::NetConfig& net_cfg, const drnet::DRConfig& dr_cfg,
                                    const mdnet::MDConfig& md_cfg, const RunOptions& opts) {
    spec.validate();
    if (opts.val_fraction <= 0.0 || opts.val_fraction >= 1.0) {
        throw ValidationError("run_protocol: val_fraction must be in (0, 1)");
    }

    const DomainDataset& test_set = find_domain(datasets, spec.test_domain);

    std::vector<DomainDataset> train_splits, val_splits;
    for (const auto& id : spec.train_domains) {
        auto [train, val] = datakit::split_train_val(find_domain(datasets, id),
                                                     opts.val_fraction, dr_cfg.seed);
        train_splits.push_back(std::move(train));
        val_splits.push_back(std::move(val));
    }

    ProtocolRunResult result;
    result.train_domain_ids = spec.train_domains;

    if (spec.protocol == Protocol::III) {
        auto trained = opts.use_dr
                           ? drnet::train_pad_gan(train_splits[0], net_cfg, dr_cfg)
                           : drnet::train_plain_encoder(train_splits[0], net_cfg, dr_cfg,
                                                        drnet::PlainLabel::liveness);
        result.val_scores = infer_scores_cls_head(*trained.encoder, val_splits[0]);
        result.val_scores.source = "val";
        result.test_scores = infer_scores_cls_head(*trained.encoder, test_set);
        result.pad_encoders.push_back(std::move(trained.encoder));
    } else {
        auto pairs = opts.use_dr ? drnet::train_dr_all(train_splits, net_cfg, dr_cfg)
                                 : drnet::train_plain_all(train_splits, net_cfg, dr_cfg);

        if (opts.use_md) {
            std::vector<drnet::EncoderPair*> pair_ptrs;
            std::vector<const DomainDataset*> train_ptrs;
            for (size_t i = 0; i < pairs.size(); ++i) {
                pair_ptrs.push_back(&pairs[i]);
                train_ptrs.push_back(&train_splits[i]);
            }
            auto artifacts = mdnet::generalize_to_n_domains(pair_ptrs, train_ptrs, md_cfg);
            result.pad_encoders = std::move(artifacts.pad_encoders);
        } else {
            for (auto& p : pairs) result.pad_encoders.push_back(std::move(p.e_pad));
        }

        std::vector<nets::EncoderNet*> enc_ptrs;
        for (auto& e : result.pad_encoders) enc_ptrs.push_back(e.get());
        std::vector<const DomainDataset*> train_ptrs;
        for (const auto& t : train_splits) train_ptrs.push_back(&t);
        result.f_md = mdnet::train_final_classifier(enc_ptrs, train_ptrs, md_cfg);

        result.val_scores.source = "val";
        for (const auto& val : val_splits) {
            result.val_scores.append(infer_scores(enc_ptrs, *result.f_md, val));
        }
        result.test_scores = infer_scores(enc_ptrs, *result.f_md, test_set);
    }

    const double tau = eer_threshold(result.val_scores);
    result.report = evaluate(result.test_scores, tau);
    return result;
}

EvalReport run_protocol(const ProtocolSpec& spec, const std::vector<DomainDataset>& datasets,
                        const nets::NetConfig& net_cfg, const drnet::DRConfig& dr_cfg,
                        const mdnet::MDConfig& md_cfg, const RunOptions& opts) {
    return run_protocol_full(spec, datasets, net_cfg, dr_cfg, md_cfg, opts).report;
}

}  // namespace mddr::evalkit
