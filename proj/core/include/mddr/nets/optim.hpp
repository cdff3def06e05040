#pragma once

#include <vector>

#include "mddr/autograd/variable.hpp"

namespace mddr::nets {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with independent parameter groups (each with its own learning rate).
/// Parameters with no accumulated gradient are treated as having a zero
/// gradient. Update order follows registration order.
class Adam {
public:
    void add_group(const std::vector<autograd::Variable>& params, const AdamConfig& cfg);
    void zero_grad();
    void step();

private:
    struct State {
        autograd::Variable param;
        std::vector<float> m, v;
    };
    struct Group {
        AdamConfig cfg;
        std::vector<State> states;
        long t = 0;
    };
    std::vector<Group> groups_;
};

}  // namespace mddr::nets
