#include "mddr/objectives/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mddr/common/errors.hpp"

namespace mddr::objectives {

double LossValue::component(const std::string& name) const {
    for (const auto& [k, v] : components) {
        if (k == name) return v;
    }
    throw std::out_of_range("LossValue: no component named " + name);
}

void DRWeights::validate() const {
    if (!(lambda > 0.0)) {
        throw ValidationError("DRWeights: lambda must be positive");
    }
}

double stable_softplus(double x) {
    // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

void require_non_empty(std::span<const double> v, const char* what) {
    if (v.empty()) {
        throw ValidationError(std::string(what) + ": empty logit batch");
    }
}

}  // namespace

LossValue gan_loss_discriminator(std::span<const double> real_logits,
                                 std::span<const double> fake_logits) {
    return gan_loss_discriminator_grad(real_logits, fake_logits, {}, {});
}

LossValue gan_loss_discriminator_grad(std::span<const double> real_logits,
                                      std::span<const double> fake_logits,
                                      std::span<double> grad_real,
                                      std::span<double> grad_fake) {
    require_non_empty(real_logits, "gan_loss_discriminator");
    require_non_empty(fake_logits, "gan_loss_discriminator");

    // -mean log sigmoid(r) = mean softplus(-r); -mean log(1-sigmoid(f)) = mean softplus(f)
    double real_term = 0.0;
    for (size_t i = 0; i < real_logits.size(); ++i) {
        real_term += stable_softplus(-real_logits[i]);
        if (!grad_real.empty()) {
            grad_real[i] = (stable_sigmoid(real_logits[i]) - 1.0) / static_cast<double>(real_logits.size());
        }
    }
    real_term /= static_cast<double>(real_logits.size());

    double fake_term = 0.0;
    for (size_t i = 0; i < fake_logits.size(); ++i) {
        fake_term += stable_softplus(fake_logits[i]);
        if (!grad_fake.empty()) {
            grad_fake[i] = stable_sigmoid(fake_logits[i]) / static_cast<double>(fake_logits.size());
        }
    }
    fake_term /= static_cast<double>(fake_logits.size());

    LossValue out;
    out.value = real_term + fake_term;
    out.components = {{"gan_real", real_term}, {"gan_fake", fake_term}};
    return out;
}

LossValue gan_loss_generator(std::span<const double> fake_logits) {
    return gan_loss_generator_grad(fake_logits, {});
}

LossValue gan_loss_generator_grad(std::span<const double> fake_logits,
                                  std::span<double> grad_fake) {
    require_non_empty(fake_logits, "gan_loss_generator");

    double v = 0.0;
    for (size_t i = 0; i < fake_logits.size(); ++i) {
        v += stable_softplus(-fake_logits[i]);
        if (!grad_fake.empty()) {
            grad_fake[i] = (stable_sigmoid(fake_logits[i]) - 1.0) / static_cast<double>(fake_logits.size());
        }
    }
    v /= static_cast<double>(fake_logits.size());

    LossValue out;
    out.value = v;
    out.components = {{"gan", v}};
    return out;
}

namespace {

// Sum of row cross-entropies; writes per-element gradients scaled by `scale`
// into grad (if non-empty).
double ce_row_sum(std::span<const double> logits, std::span<const int> labels,
                  int num_classes, double scale, std::span<double> grad) {
    const size_t n = labels.size();
    if (logits.size() != n * static_cast<size_t>(num_classes)) {
        throw ShapeError("categorical_ce: logits size does not match labels x classes");
    }
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || y >= num_classes) {
            throw ValidationError("categorical_ce: label " + std::to_string(y) +
                                  " out of range [0, " + std::to_string(num_classes) + ")");
        }
        const double* row = logits.data() + i * static_cast<size_t>(num_classes);
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < num_classes; ++k) m = std::max(m, row[k]);
        double z = 0.0;
        for (int k = 0; k < num_classes; ++k) z += std::exp(row[k] - m);
        const double lse = m + std::log(z);
        total += lse - row[y];
        if (!grad.empty()) {
            double* grow = grad.data() + i * static_cast<size_t>(num_classes);
            for (int k = 0; k < num_classes; ++k) {
                const double p = std::exp(row[k] - m) / z;
                grow[k] = scale * (p - (k == y ? 1.0 : 0.0));
            }
        }
    }
    return total;
}

}  // namespace

LossValue categorical_ce(std::span<const double> logits, std::span<const int> labels,
                         int num_classes) {
    return categorical_ce_grad(logits, labels, num_classes, {});
}

LossValue categorical_ce_grad(std::span<const double> logits, std::span<const int> labels,
                              int num_classes, std::span<double> grad_logits) {
    if (labels.empty()) {
        throw ValidationError("categorical_ce: empty batch");
    }
    const double inv_n = 1.0 / static_cast<double>(labels.size());
    const double total = ce_row_sum(logits, labels, num_classes, inv_n, grad_logits);

    LossValue out;
    out.value = total * inv_n;
    out.components = {{"cls", out.value}};
    return out;
}

LossValue aux_class_loss(std::span<const double> cls_logits_real,
                         std::span<const int> labels_real,
                         std::span<const double> cls_logits_fake,
                         std::span<const int> labels_fake, int num_classes) {
    return aux_class_loss_grad(cls_logits_real, labels_real, cls_logits_fake, labels_fake,
                               num_classes, {}, {});
}

LossValue aux_class_loss_grad(std::span<const double> cls_logits_real,
                              std::span<const int> labels_real,
                              std::span<const double> cls_logits_fake,
                              std::span<const int> labels_fake, int num_classes,
                              std::span<double> grad_real, std::span<double> grad_fake) {
    const size_t n = labels_real.size() + labels_fake.size();
    if (n == 0) {
        throw ValidationError("aux_class_loss: both batches empty");
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    total += ce_row_sum(cls_logits_real, labels_real, num_classes, inv_n, grad_real);
    total += ce_row_sum(cls_logits_fake, labels_fake, num_classes, inv_n, grad_fake);

    LossValue out;
    out.value = total * inv_n;
    out.components = {{"cls", out.value}};
    return out;
}

LossValue dr_objective(double gan_part, double cls_part, const DRWeights& w) {
    w.validate();
    if (!std::isfinite(gan_part) || !std::isfinite(cls_part)) {
        throw ValidationError("dr_objective: non-finite loss part");
    }
    LossValue out;
    out.value = gan_part + w.lambda * cls_part;
    out.components = {{"gan", gan_part}, {"cls", cls_part}};
    return out;
}

LossValue binary_ce(std::span<const double> logits, std::span<const int> labels) {
    return binary_ce_grad(logits, labels, {});
}

LossValue binary_ce_grad(std::span<const double> logits, std::span<const int> labels,
                         std::span<double> grad_logits) {
    if (logits.empty()) {
        throw ValidationError("binary_ce: empty batch");
    }
    if (logits.size() != labels.size()) {
        throw ShapeError("binary_ce: logits/labels length mismatch");
    }
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    double total = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        const int y = labels[i];
        if (y != 0 && y != 1) {
            throw ValidationError("binary_ce: label must be 0 (spoof) or 1 (live)");
        }
        // -y log p - (1-y) log(1-p) with p = sigmoid(l), in logit space
        total += stable_softplus(logits[i]) - static_cast<double>(y) * logits[i];
        if (!grad_logits.empty()) {
            grad_logits[i] = (stable_sigmoid(logits[i]) - static_cast<double>(y)) * inv_n;
        }
    }

    LossValue out;
    out.value = total * inv_n;
    out.components = {{"ce", out.value}};
    return out;
}

LossValue l1_reconstruction(std::span<const double> original,
                            std::span<const double> reconstructed, int batch) {
    return l1_reconstruction_grad(original, reconstructed, batch, {}, {});
}

LossValue l1_reconstruction_grad(std::span<const double> original,
                                 std::span<const double> reconstructed, int batch,
                                 std::span<double> grad_original,
                                 std::span<double> grad_reconstructed) {
    if (original.size() != reconstructed.size()) {
        throw ShapeError("l1_reconstruction: shape mismatch");
    }
    if (batch <= 0 || original.size() % static_cast<size_t>(batch) != 0) {
        throw ShapeError("l1_reconstruction: batch does not divide element count");
    }
    const double inv = 1.0 / static_cast<double>(original.size());
    double total = 0.0;
    for (size_t i = 0; i < original.size(); ++i) {
        const double d = original[i] - reconstructed[i];
        total += std::abs(d);
        const double s = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        if (!grad_original.empty()) grad_original[i] = s * inv;
        if (!grad_reconstructed.empty()) grad_reconstructed[i] = -s * inv;
    }

    LossValue out;
    out.value = total * inv;
    out.components = {{"rec", out.value}};
    return out;
}

}  // namespace mddr::objectives
