#include "mddr/nets/optim.hpp"

#include <cmath>

namespace mddr::nets {

void Adam::add_group(const std::vector<autograd::Variable>& params, const AdamConfig& cfg) {
    Group g;
    g.cfg = cfg;
    for (const auto& p : params) {
        State s;
        s.param = p;
        s.m.assign(static_cast<size_t>(p.value().numel()), 0.0f);
        s.v.assign(static_cast<size_t>(p.value().numel()), 0.0f);
        g.states.push_back(std::move(s));
    }
    groups_.push_back(std::move(g));
}

void Adam::zero_grad() {
    for (auto& g : groups_) {
        for (auto& s : g.states) s.param.zero_grad();
    }
}

void Adam::step() {
    for (auto& g : groups_) {
        g.t += 1;
        const double bc1 = 1.0 - std::pow(g.cfg.beta1, static_cast<double>(g.t));
        const double bc2 = 1.0 - std::pow(g.cfg.beta2, static_cast<double>(g.t));
        for (auto& s : g.states) {
            Tensor& value = s.param.mutable_value();
            const bool has_grad = s.param.has_grad();
            const float* grad = has_grad ? s.param.node()->grad.data() : nullptr;
            for (int64_t i = 0; i < value.numel(); ++i) {
                const double gi = grad ? grad[i] : 0.0;
                const size_t ui = static_cast<size_t>(i);
                const double m = g.cfg.beta1 * s.m[ui] + (1.0 - g.cfg.beta1) * gi;
                const double v = g.cfg.beta2 * s.v[ui] + (1.0 - g.cfg.beta2) * gi * gi;
                s.m[ui] = static_cast<float>(m);
                s.v[ui] = static_cast<float>(v);
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                value[i] -= static_cast<float>(g.cfg.lr * mhat / (std::sqrt(vhat) + g.cfg.eps));
            }
        }
    }
}

}  // namespace mddr::nets
