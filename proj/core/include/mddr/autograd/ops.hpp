#pragma once

#include <vector>

#include "mddr/autograd/variable.hpp"
#include "mddr/common/tensor.hpp"

namespace mddr::autograd {

// Dense / activation ops. Inputs are validated and shape errors are thrown
// as mddr::ShapeError.

/// x [B,I] * W [O,I]^T + b [O] -> [B,O]
Variable linear(const Variable& x, const Variable& w, const Variable& b);

/// x [B,C,H,W], w [O,C,k,k], b [O]; zero padding `pad`, square stride.
Variable conv2d(const Variable& x, const Variable& w, const Variable& b,
                int stride, int pad);

/// x [B,C,Hi,Wi], w [C,O,k,k], b [O];
/// Ho = (Hi-1)*stride - 2*pad + k + out_pad.
Variable conv_transpose2d(const Variable& x, const Variable& w, const Variable& b,
                          int stride, int pad, int out_pad);

/// Per-channel batch normalization over (B,H,W). In training mode the batch
/// statistics are used and the running buffers are updated in place; in
/// inference mode the running buffers are used.
Variable batch_norm2d(const Variable& x, const Variable& gamma, const Variable& beta,
                      Variable& running_mean, Variable& running_var,
                      bool training, double momentum, double eps);

Variable relu(const Variable& x);
Variable sigmoid(const Variable& x);
Variable add(const Variable& a, const Variable& b);
Variable reshape(const Variable& x, std::vector<int> dims);

/// Concatenate [B,F_i] feature blocks along the feature axis, left to right.
Variable concat_features(const std::vector<Variable>& parts);

/// [B,C,H,W] -> [B,C]
Variable global_avg_pool(const Variable& x);

/// Scalar combination a + alpha * b (both [1]).
Variable add_scaled(const Variable& a, const Variable& b, double alpha);

// Loss ops. Forward values and input gradients are computed in double
// precision by mddr::objectives and cast once.

/// Binary cross-entropy on liveness logits [B,1] or [B]; labels 1=live 0=spoof.
Variable bce_with_logits(const Variable& logits, const std::vector<int>& labels);

/// Mean categorical cross-entropy, logits [B,K].
Variable softmax_ce(const Variable& logits, const std::vector<int>& labels);

/// Discriminator adversarial loss from real/fake logits [B,1].
Variable gan_d_loss(const Variable& real_logits, const Variable& fake_logits);

/// Non-saturating generator adversarial loss from fake logits [B,1].
Variable gan_g_loss(const Variable& fake_logits);

/// Mean categorical CE over the union of real and fake classifier logits.
/// Either side may be undefined (empty), not both.
Variable aux_class_loss(const Variable& cls_real, const std::vector<int>& labels_real,
                        const Variable& cls_fake, const std::vector<int>& labels_fake);

/// Mean per-image mean absolute error between recon and a fixed target.
Variable l1_loss(const Variable& recon, const Tensor& target);

// Inference helpers (no graph).

/// Row-wise softmax probabilities for [B,K] logits.
Tensor softmax_rows(const Tensor& logits);

}  // namespace mddr::autograd
