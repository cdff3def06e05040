#pragma once

#include <string>
#include <vector>

namespace mddr::evalkit {

/// Liveness scores in [0,1] with parallel labels (1 = live, 0 = spoof).
struct ScoreSet {
    std::vector<double> scores;
    std::vector<int> labels;
    std::string source;

    size_t size() const { return scores.size(); }
    size_t live_count() const;
    size_t spoof_count() const;

    /// Throws ValidationError unless sizes match and both classes occur.
    void validate_two_class(const char* op) const;

    void append(const ScoreSet& other);
};

struct FarFrr {
    double far = 0.0;  // fraction of spoof with score >= threshold (accepted)
    double frr = 0.0;  // fraction of live with score < threshold (rejected)
};

FarFrr far_frr(const ScoreSet& s, double threshold);

/// Threshold minimizing |FAR - FRR| over the midpoints of consecutive
/// distinct sorted scores plus {0,1}; ties resolve to the smallest
/// threshold attaining the minimum.
double eer_threshold(const ScoreSet& s);

/// Probability that a random live sample outscores a random spoof sample,
/// ties counting one half; in percent. Computed from average ranks.
double auc_percent(const ScoreSet& s);

struct EvalReport {
    double hter_percent = 0.0;
    double auc_percent = 0.0;
    double eer_threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
    long live_count = 0;
    long spoof_count = 0;

    std::string to_json_string() const;
};

/// HTER/AUC report of a score set at the given (validation-derived) threshold.
EvalReport evaluate(const ScoreSet& test_scores, double threshold);

}  // namespace mddr::evalkit
