#pragma once

#include <memory>

#include "mddr/autograd/ops.hpp"
#include "mddr/common/rng.hpp"
#include "mddr/nets/module.hpp"

namespace mddr::nets {

/// Conv weights are drawn from N(0, 0.02), biases start at zero.
Tensor gaussian_init(std::vector<int> dims, Rng& rng, double stddev = 0.02);

class Conv2d : public Module {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng);
    autograd::Variable forward(const autograd::Variable& x);
    int kernel() const { return kernel_; }

private:
    autograd::Variable weight_, bias_;
    int stride_, pad_, kernel_;
};

class ConvTranspose2d : public Module {
public:
    ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, int pad,
                    int out_pad, Rng& rng);
    autograd::Variable forward(const autograd::Variable& x);
    int kernel() const { return kernel_; }

private:
    autograd::Variable weight_, bias_;
    int stride_, pad_, out_pad_, kernel_;
};

class Linear : public Module {
public:
    Linear(int in_features, int out_features, Rng& rng);
    autograd::Variable forward(const autograd::Variable& x);
    int in_features() const { return in_features_; }
    int out_features() const { return out_features_; }

private:
    autograd::Variable weight_, bias_;
    int in_features_, out_features_;
};

class BatchNorm2d : public Module {
public:
    explicit BatchNorm2d(int channels);
    autograd::Variable forward(const autograd::Variable& x);

    /// Running-statistics update rate; recalibration sweeps set this to
    /// 1/k to average batch statistics cumulatively.
    void set_momentum(double m) { momentum_ = m; }
    double momentum() const { return momentum_; }

private:
    autograd::Variable gamma_, beta_, running_mean_, running_var_;
    double momentum_ = 0.1;
};

/// Two 3x3 convolutions with a skip connection; the first may downsample
/// (stride 2) with a 1x1 projection on the skip path. Two of these stacked
/// form one four-convolution residual block of the encoder trunk.
class ResidualUnit : public Module {
public:
    ResidualUnit(int in_channels, int out_channels, int stride, bool batchnorm, Rng& rng);
    autograd::Variable forward(const autograd::Variable& x);

private:
    std::unique_ptr<Conv2d> conv1_, conv2_, skip_;
    std::unique_ptr<BatchNorm2d> bn1_, bn2_, bn_skip_;
};

}  // namespace mddr::nets
