#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mddr/autograd/variable.hpp"
#include "mddr/common/tensor.hpp"

namespace mddr::nets {

/// Base for layers and networks: owns named parameters and buffers and
/// exposes them recursively under dotted paths (e.g. "trunk.0.conv1.weight").
/// Registration order is fixed by construction order, which keeps optimizer
/// updates and checkpoints deterministic.
class Module {
public:
    virtual ~Module() = default;
    Module() = default;
    Module(const Module&) = delete;
    Module& operator=(const Module&) = delete;

    using NamedVariables = std::vector<std::pair<std::string, autograd::Variable>>;

    NamedVariables named_parameters() const;
    NamedVariables named_buffers() const;
    std::vector<autograd::Variable> parameters() const;

    void set_training(bool training);
    bool is_training() const { return training_; }

    /// Toggle gradient accumulation for every parameter of this subtree.
    void set_requires_grad(bool enabled);

    void zero_grad();

    /// Pre-order walk over this module and all registered descendants.
    std::vector<Module*> submodules();

protected:
    autograd::Variable add_parameter(const std::string& name, Tensor init);
    autograd::Variable add_buffer(const std::string& name, Tensor init);
    void add_child(const std::string& name, Module* child);

private:
    void collect(const std::string& prefix, bool buffers, NamedVariables& out) const;

    NamedVariables params_;
    NamedVariables buffers_;
    std::vector<std::pair<std::string, Module*>> children_;
    bool training_ = true;
};

}  // namespace mddr::nets
