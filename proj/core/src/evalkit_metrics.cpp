#include "mddr/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "mddr/common/errors.hpp"

namespace mddr::evalkit {

size_t ScoreSet::live_count() const {
    return static_cast<size_t>(std::count(labels.begin(), labels.end(), 1));
}

size_t ScoreSet::spoof_count() const {
    return static_cast<size_t>(std::count(labels.begin(), labels.end(), 0));
}

void ScoreSet::validate_two_class(const char* op) const {
    if (scores.size() != labels.size()) {
        throw ValidationError(std::string(op) + ": scores/labels length mismatch");
    }
    for (int l : labels) {
        if (l != 0 && l != 1) {
            throw ValidationError(std::string(op) + ": labels must be 0 (spoof) or 1 (live)");
        }
    }
    if (live_count() == 0 || spoof_count() == 0) {
        throw ValidationError(std::string(op) + ": need at least one live and one spoof score");
    }
}

void ScoreSet::append(const ScoreSet& other) {
    scores.insert(scores.end(), other.scores.begin(), other.scores.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

FarFrr far_frr(const ScoreSet& s, double threshold) {
    s.validate_two_class("far_frr");
    size_t accepted_spoof = 0, rejected_live = 0;
    for (size_t i = 0; i < s.scores.size(); ++i) {
        if (s.labels[i] == 0 && s.scores[i] >= threshold) ++accepted_spoof;
        if (s.labels[i] == 1 && s.scores[i] < threshold) ++rejected_live;
    }
    FarFrr out;
    out.far = static_cast<double>(accepted_spoof) / static_cast<double>(s.spoof_count());
    out.frr = static_cast<double>(rejected_live) / static_cast<double>(s.live_count());
    return out;
}

double eer_threshold(const ScoreSet& s) {
    s.validate_two_class("eer_threshold");

    std::vector<double> distinct = s.scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates{0.0, 1.0};
    for (size_t i = 0; i + 1 < distinct.size(); ++i) {
        candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    }
    std::sort(candidates.begin(), candidates.end());

    double best_tau = candidates.front();
    double best_diff = std::numeric_limits<double>::infinity();
    for (double tau : candidates) {
        const auto ff = far_frr(s, tau);
        const double diff = std::abs(ff.far - ff.frr);
        if (diff < best_diff) {
            best_diff = diff;
            best_tau = tau;
        }
    }
    return best_tau;
}

double auc_percent(const ScoreSet& s) {
    s.validate_two_class("auc");
    const size_t n = s.scores.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return s.scores[a] < s.scores[b]; });

    // rank-sum with average ranks over tied groups
    double live_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && s.scores[order[j]] == s.scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (size_t k = i; k < j; ++k) {
            if (s.labels[order[k]] == 1) live_rank_sum += avg_rank;
        }
        i = j;
    }

    const double nl = static_cast<double>(s.live_count());
    const double ns = static_cast<double>(s.spoof_count());
    const double auc = (live_rank_sum - nl * (nl + 1.0) / 2.0) / (nl * ns);
    return 100.0 * auc;
}

std::string EvalReport::to_json_string() const {
    nlohmann::json j{{"hter_percent", hter_percent},
                     {"auc_percent", auc_percent},
                     {"eer_threshold", eer_threshold},
                     {"far", far},
                     {"frr", frr},
                     {"counts", {{"live", live_count}, {"spoof", spoof_count}}}};
    return j.dump(2);
}

EvalReport evaluate(const ScoreSet& test_scores, double threshold) {
    const auto ff = far_frr(test_scores, threshold);
    EvalReport r;
    r.far = ff.far;
    r.frr = ff.frr;
    r.hter_percent = (ff.far + ff.frr) / 2.0 * 100.0;
    r.auc_percent = auc_percent(test_scores);
    r.eer_threshold = threshold;
    r.live_count = static_cast<long>(test_scores.live_count());
    r.spoof_count = static_cast<long>(test_scores.spoof_count());
    return r;
}

}  // namespace mddr::evalkit
