#pragma once

#include <memory>
#include <vector>

#include "mddr/drnet/trainer.hpp"
#include "mddr/evalkit/metrics.hpp"
#include "mddr/evalkit/protocol.hpp"
#include "mddr/mdnet/trainer.hpp"

namespace mddr::evalkit {

/// Harness knobs that are not part of the method itself: the train/val
/// split used for threshold selection, and the ablation toggles.
struct RunOptions {
    double val_fraction = 0.25;
    bool use_dr = true;  // false: plainly supervised encoder trunks
    bool use_md = true;  // false: skip stage 2, F_MD reads stage-1 features
};

/// Per-sample liveness scores sigma(F_MD(concat of PAD features)), in
/// dataset order.
ScoreSet infer_scores(const std::vector<nets::EncoderNet*>& pad_encoders,
                      nets::LinearClassifier& f_md, const datakit::DomainDataset& dataset);

/// Single-source scoring through the PAD model's own classification head
/// (live-class softmax probability).
ScoreSet infer_scores_cls_head(nets::EncoderNet& pad_encoder,
                               const datakit::DomainDataset& dataset);

struct ProtocolRunResult {
    EvalReport report;
    ScoreSet val_scores;   // pooled source validation scores (threshold source)
    ScoreSet test_scores;
    std::vector<std::string> train_domain_ids;
    std::vector<std::unique_ptr<nets::EncoderNet>> pad_encoders;  // inference encoders
    std::unique_ptr<nets::LinearClassifier> f_md;                 // null under protocol III
};

/// Runs one leave-domain-out experiment end to end: stage-1 training on the
/// train split of each source domain, stage-2 cross-verified learning (for
/// protocols I/II), the final classifier, and evaluation on the unseen test
/// domain at the EER threshold of the pooled source validation scores.
/// Protocol III instead trains a single PAD model and scores through its
/// classification head.
ProtocolRunResult run_protocol_full(const ProtocolSpec& spec,
                                    const std::vector<datakit::DomainDataset>& datasets,
                                    const nets::NetConfig& net_cfg, const drnet::DRConfig& dr_cfg,
                                    const mdnet::MDConfig& md_cfg, const RunOptions& opts = {});

EvalReport run_protocol(const ProtocolSpec& spec,
                        const std::vector<datakit::DomainDataset>& datasets,
                        const nets::NetConfig& net_cfg, const drnet::DRConfig& dr_cfg,
                        const mdnet::MDConfig& md_cfg, const RunOptions& opts = {});

}  // namespace mddr::evalkit
