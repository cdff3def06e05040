#include "mddr/nets/layers.hpp"

namespace mddr::nets {

namespace ag = autograd;

Tensor gaussian_init(std::vector<int> dims, Rng& rng, double stddev) {
    Tensor t(std::move(dims));
    for (int64_t i = 0; i < t.numel(); ++i) {
        t[i] = static_cast<float>(rng.normal(0.0, stddev));
    }
    return t;
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng)
    : stride_(stride), pad_(pad), kernel_(kernel) {
    weight_ = add_parameter("weight", gaussian_init({out_channels, in_channels, kernel, kernel}, rng));
    bias_ = add_parameter("bias", Tensor({out_channels}));
}

ag::Variable Conv2d::forward(const ag::Variable& x) {
    return ag::conv2d(x, weight_, bias_, stride_, pad_);
}

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride,
                                 int pad, int out_pad, Rng& rng)
    : stride_(stride), pad_(pad), out_pad_(out_pad), kernel_(kernel) {
    weight_ = add_parameter("weight", gaussian_init({in_channels, out_channels, kernel, kernel}, rng));
    bias_ = add_parameter("bias", Tensor({out_channels}));
}

ag::Variable ConvTranspose2d::forward(const ag::Variable& x) {
    return ag::conv_transpose2d(x, weight_, bias_, stride_, pad_, out_pad_);
}

Linear::Linear(int in_features, int out_features, Rng& rng)
    : in_features_(in_features), out_features_(out_features) {
    weight_ = add_parameter("weight", gaussian_init({out_features, in_features}, rng));
    bias_ = add_parameter("bias", Tensor({out_features}));
}

ag::Variable Linear::forward(const ag::Variable& x) {
    return ag::linear(x, weight_, bias_);
}

BatchNorm2d::BatchNorm2d(int channels) {
    gamma_ = add_parameter("weight", Tensor({channels}, 1.0f));
    beta_ = add_parameter("bias", Tensor({channels}));
    running_mean_ = add_buffer("running_mean", Tensor({channels}));
    running_var_ = add_buffer("running_var", Tensor({channels}, 1.0f));
}

ag::Variable BatchNorm2d::forward(const ag::Variable& x) {
    return ag::batch_norm2d(x, gamma_, beta_, running_mean_, running_var_, is_training(),
                            momentum_, 1e-5);
}

ResidualUnit::ResidualUnit(int in_channels, int out_channels, int stride, bool batchnorm,
                           Rng& rng) {
    conv1_ = std::make_unique<Conv2d>(in_channels, out_channels, 3, stride, 1, rng);
    add_child("conv1", conv1_.get());
    if (batchnorm) {
        bn1_ = std::make_unique<BatchNorm2d>(out_channels);
        add_child("bn1", bn1_.get());
    }
    conv2_ = std::make_unique<Conv2d>(out_channels, out_channels, 3, 1, 1, rng);
    add_child("conv2", conv2_.get());
    if (batchnorm) {
        bn2_ = std::make_unique<BatchNorm2d>(out_channels);
        add_child("bn2", bn2_.get());
    }
    if (stride != 1 || in_channels != out_channels) {
        skip_ = std::make_unique<Conv2d>(in_channels, out_channels, 1, stride, 0, rng);
        add_child("skip", skip_.get());
        if (batchnorm) {
            bn_skip_ = std::make_unique<BatchNorm2d>(out_channels);
            add_child("bn_skip", bn_skip_.get());
        }
    }
}

ag::Variable ResidualUnit::forward(const ag::Variable& x) {
    auto h = conv1_->forward(x);
    if (bn1_) h = bn1_->forward(h);
    h = ag::relu(h);
    h = conv2_->forward(h);
    if (bn2_) h = bn2_->forward(h);

    ag::Variable s = x;
    if (skip_) {
        s = skip_->forward(x);
        if (bn_skip_) s = bn_skip_->forward(s);
    }
    return ag::relu(ag::add(h, s));
}

}  // namespace mddr::nets
