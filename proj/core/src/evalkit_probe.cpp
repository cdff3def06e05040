#include "mddr/evalkit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mddr/common/errors.hpp"
#include "mddr/common/rng.hpp"

namespace mddr::evalkit {

namespace {

// Softmax-regression fit in double precision; small and self-contained so
// probe results are independent of the training stack under test.
struct LogisticModel {
    int classes = 0, dim = 0;
    std::vector<double> w;  // [K, D]
    std::vector<double> b;  // [K]

    int predict(const double* x) const {
        int best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < classes; ++k) {
            double v = b[static_cast<size_t>(k)];
            for (int d = 0; d < dim; ++d) v += w[static_cast<size_t>(k) * dim + d] * x[d];
            if (v > best_v) {
                best_v = v;
                best = k;
            }
        }
        return best;
    }
};

LogisticModel fit_logistic(const std::vector<double>& x, const std::vector<int>& y, int n,
                           int dim, int classes) {
    LogisticModel m;
    m.classes = classes;
    m.dim = dim;
    m.w.assign(static_cast<size_t>(classes) * dim, 0.0);
    m.b.assign(static_cast<size_t>(classes), 0.0);

    std::vector<double> mw(m.w.size(), 0.0), vw(m.w.size(), 0.0);
    std::vector<double> mb(m.b.size(), 0.0), vb(m.b.size(), 0.0);
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const int iters = 300;

    std::vector<double> logits(static_cast<size_t>(classes));
    std::vector<double> gw(m.w.size()), gb(m.b.size());
    for (int t = 1; t <= iters; ++t) {
        std::fill(gw.begin(), gw.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* xi = x.data() + static_cast<size_t>(i) * dim;
            double mx = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < classes; ++k) {
                logits[static_cast<size_t>(k)] = m.b[static_cast<size_t>(k)];
                for (int d = 0; d < dim; ++d) {
                    logits[static_cast<size_t>(k)] += m.w[static_cast<size_t>(k) * dim + d] * xi[d];
                }
                mx = std::max(mx, logits[static_cast<size_t>(k)]);
            }
            double z = 0.0;
            for (int k = 0; k < classes; ++k) z += std::exp(logits[static_cast<size_t>(k)] - mx);
            for (int k = 0; k < classes; ++k) {
                const double p = std::exp(logits[static_cast<size_t>(k)] - mx) / z;
                const double g = (p - (k == y[static_cast<size_t>(i)] ? 1.0 : 0.0)) / n;
                gb[static_cast<size_t>(k)] += g;
                for (int d = 0; d < dim; ++d) gw[static_cast<size_t>(k) * dim + d] += g * xi[d];
            }
        }
        const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
        for (size_t i = 0; i < m.w.size(); ++i) {
            mw[i] = b1 * mw[i] + (1 - b1) * gw[i];
            vw[i] = b2 * vw[i] + (1 - b2) * gw[i] * gw[i];
            m.w[i] -= lr * (mw[i] / c1) / (std::sqrt(vw[i] / c2) + eps);
        }
        for (size_t i = 0; i < m.b.size(); ++i) {
            mb[i] = b1 * mb[i] + (1 - b1) * gb[i];
            vb[i] = b2 * vb[i] + (1 - b2) * gb[i] * gb[i];
            m.b[i] -= lr * (mb[i] / c1) / (std::sqrt(vb[i] / c2) + eps);
        }
    }
    return m;
}

}  // namespace

double linear_probe_accuracy(const Tensor& features, const std::vector<int>& labels,
                             int num_classes, uint64_t seed) {
    if (features.ndim() != 2) throw ShapeError("linear_probe: features must be [N, D]");
    const int n = features.dim(0), dim = features.dim(1);
    if (n != static_cast<int>(labels.size())) {
        throw ShapeError("linear_probe: features/labels length mismatch");
    }
    if (num_classes < 2) throw ValidationError("linear_probe: need at least 2 classes");
    std::set<int> present;
    for (int l : labels) {
        if (l < 0 || l >= num_classes) throw ValidationError("linear_probe: label out of range");
        present.insert(l);
    }
    if (present.size() < 2) {
        throw ValidationError("linear_probe: labels are degenerate (single class)");
    }

    // Stratified deterministic split, 75% train per class.
    Rng rng(mix_seed(seed, "probe_split"));
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < n; ++i) by_class[labels[static_cast<size_t>(i)]].push_back(i);
    std::vector<char> in_train(static_cast<size_t>(n), 0);
    for (auto& [cls, idx] : by_class) {
        auto perm = rng.permutation(static_cast<int>(idx.size()));
        int n_train = std::max(1, static_cast<int>(0.75 * static_cast<double>(idx.size()) + 0.5));
        if (n_train > static_cast<int>(idx.size())) n_train = static_cast<int>(idx.size());
        for (int k = 0; k < n_train; ++k) {
            in_train[static_cast<size_t>(idx[static_cast<size_t>(perm[static_cast<size_t>(k)])])] = 1;
        }
    }
    std::vector<int> train_idx, held_idx;
    for (int i = 0; i < n; ++i) (in_train[static_cast<size_t>(i)] ? train_idx : held_idx).push_back(i);
    if (held_idx.empty()) {
        throw ValidationError("linear_probe: not enough samples for a held-out split");
    }

    // Standardize with train-split statistics.
    std::vector<double> mean(static_cast<size_t>(dim), 0.0), sd(static_cast<size_t>(dim), 0.0);
    for (int i : train_idx) {
        for (int d = 0; d < dim; ++d) {
            mean[static_cast<size_t>(d)] += features[static_cast<int64_t>(i) * dim + d];
        }
    }
    for (double& v : mean) v /= static_cast<double>(train_idx.size());
    for (int i : train_idx) {
        for (int d = 0; d < dim; ++d) {
            const double c = features[static_cast<int64_t>(i) * dim + d] - mean[static_cast<size_t>(d)];
            sd[static_cast<size_t>(d)] += c * c;
        }
    }
    for (double& v : sd) v = std::max(1e-6, std::sqrt(v / static_cast<double>(train_idx.size())));

    auto standardized = [&](const std::vector<int>& idx) {
        std::vector<double> out(idx.size() * static_cast<size_t>(dim));
        for (size_t r = 0; r < idx.size(); ++r) {
            for (int d = 0; d < dim; ++d) {
                out[r * static_cast<size_t>(dim) + static_cast<size_t>(d)] =
                    (features[static_cast<int64_t>(idx[r]) * dim + d] - mean[static_cast<size_t>(d)]) /
                    sd[static_cast<size_t>(d)];
            }
        }
        return out;
    };

    std::vector<int> y_train, y_held;
    for (int i : train_idx) y_train.push_back(labels[static_cast<size_t>(i)]);
    for (int i : held_idx) y_held.push_back(labels[static_cast<size_t>(i)]);

    const auto x_train = standardized(train_idx);
    const auto x_held = standardized(held_idx);
    const auto model = fit_logistic(x_train, y_train, static_cast<int>(train_idx.size()), dim,
                                    num_classes);

    int correct = 0;
    for (size_t r = 0; r < held_idx.size(); ++r) {
        if (model.predict(x_held.data() + r * static_cast<size_t>(dim)) == y_held[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(held_idx.size());
}

ProbeResult disentanglement_probe(const Tensor& features, const std::vector<int>& subject_ids,
                                  const std::vector<int>& pad_labels, uint64_t seed) {
    if (features.ndim() != 2 || features.dim(0) != static_cast<int>(subject_ids.size()) ||
        subject_ids.size() != pad_labels.size()) {
        throw ShapeError("disentanglement_probe: features/subject_ids/pad_labels disagree");
    }

    std::map<int, int> dense;
    for (int id : subject_ids) dense.emplace(id, 0);
    if (dense.size() < 2) {
        throw ValidationError("disentanglement_probe: need at least 2 subjects");
    }
    int next = 0;
    for (auto& [id, idx] : dense) idx = next++;
    std::vector<int> subj_cls;
    subj_cls.reserve(subject_ids.size());
    for (int id : subject_ids) subj_cls.push_back(dense.at(id));

    ProbeResult out;
    out.subject_acc = linear_probe_accuracy(features, subj_cls, next, mix_seed(seed, "subject"));
    out.liveness_acc = linear_probe_accuracy(features, pad_labels, 2, mix_seed(seed, "liveness"));
    return out;
}

}  // namespace mddr::evalkit
