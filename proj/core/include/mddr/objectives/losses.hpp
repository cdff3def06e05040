#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mddr::objectives {

/// A scalar loss plus the named parts it was combined from. The value is
/// always the documented combination of the components.
struct LossValue {
    double value = 0.0;
    std::vector<std::pair<std::string, double>> components;

    double component(const std::string& name) const;
};

/// Weighting between adversarial and classification terms of the stage-1
/// objective.
struct DRWeights {
    double lambda = 1.0;

    void validate() const;
};

// Numerically stable primitives, exposed for reuse in tests and graph ops.
double stable_softplus(double x);  // log(1 + e^x)
double stable_sigmoid(double x);

/// Discriminator loss: -mean(log sigmoid(real)) - mean(log(1 - sigmoid(fake))).
/// Components: gan_real, gan_fake.
LossValue gan_loss_discriminator(std::span<const double> real_logits,
                                 std::span<const double> fake_logits);
LossValue gan_loss_discriminator_grad(std::span<const double> real_logits,
                                      std::span<const double> fake_logits,
                                      std::span<double> grad_real,
                                      std::span<double> grad_fake);

/// Non-saturating generator loss: -mean(log sigmoid(fake)).
LossValue gan_loss_generator(std::span<const double> fake_logits);
LossValue gan_loss_generator_grad(std::span<const double> fake_logits,
                                  std::span<double> grad_fake);

/// Mean categorical cross-entropy over rows of `logits` ([n, num_classes],
/// row-major). Building block for aux_class_loss and the graph op.
LossValue categorical_ce(std::span<const double> logits,
                         std::span<const int> labels, int num_classes);
LossValue categorical_ce_grad(std::span<const double> logits,
                              std::span<const int> labels, int num_classes,
                              std::span<double> grad_logits);

/// Mean categorical cross-entropy over the union of a real and a generated
/// batch. Either side may be empty, but not both. Generated labels are the
/// class codes the generator was conditioned on.
LossValue aux_class_loss(std::span<const double> cls_logits_real,
                         std::span<const int> labels_real,
                         std::span<const double> cls_logits_fake,
                         std::span<const int> labels_fake, int num_classes);
LossValue aux_class_loss_grad(std::span<const double> cls_logits_real,
                              std::span<const int> labels_real,
                              std::span<const double> cls_logits_fake,
                              std::span<const int> labels_fake, int num_classes,
                              std::span<double> grad_real,
                              std::span<double> grad_fake);

/// Stage-1 combination: gan_part + lambda * cls_part.
LossValue dr_objective(double gan_part, double cls_part, const DRWeights& w);

/// Mean binary cross-entropy over liveness logits; labels are 1 = live,
/// 0 = spoof and the liveness probability is sigmoid(logit).
LossValue binary_ce(std::span<const double> logits, std::span<const int> labels);
LossValue binary_ce_grad(std::span<const double> logits, std::span<const int> labels,
                         std::span<double> grad_logits);

/// Mean over the batch of the per-image mean absolute pixel difference.
/// `batch` is the number of images; both arrays hold batch * per_image values.
LossValue l1_reconstruction(std::span<const double> original,
                            std::span<const double> reconstructed, int batch);
LossValue l1_reconstruction_grad(std::span<const double> original,
                                 std::span<const double> reconstructed, int batch,
                                 std::span<double> grad_original,
                                 std::span<double> grad_reconstructed);

}  // namespace mddr::objectives
