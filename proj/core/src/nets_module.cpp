#include "mddr/nets/module.hpp"

namespace mddr::nets {

Module::NamedVariables Module::named_parameters() const {
    NamedVariables out;
    collect("", false, out);
    return out;
}

Module::NamedVariables Module::named_buffers() const {
    NamedVariables out;
    collect("", true, out);
    return out;
}

std::vector<autograd::Variable> Module::parameters() const {
    std::vector<autograd::Variable> out;
    for (auto& [name, v] : named_parameters()) out.push_back(v);
    return out;
}

void Module::set_training(bool training) {
    training_ = training;
    for (auto& [name, child] : children_) child->set_training(training);
}

void Module::set_requires_grad(bool enabled) {
    for (auto& [name, v] : named_parameters()) {
        auto var = v;
        var.set_needs_grad(enabled);
    }
}

void Module::zero_grad() {
    for (auto& [name, v] : named_parameters()) {
        auto var = v;
        var.zero_grad();
    }
}

std::vector<Module*> Module::submodules() {
    std::vector<Module*> out{this};
    for (auto& [name, child] : children_) {
        auto sub = child->submodules();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

autograd::Variable Module::add_parameter(const std::string& name, Tensor init) {
    auto v = autograd::Variable::leaf(std::move(init), true);
    params_.emplace_back(name, v);
    return v;
}

autograd::Variable Module::add_buffer(const std::string& name, Tensor init) {
    auto v = autograd::Variable::leaf(std::move(init), false);
    buffers_.emplace_back(name, v);
    return v;
}

void Module::add_child(const std::string& name, Module* child) {
    children_.emplace_back(name, child);
}

void Module::collect(const std::string& prefix, bool buffers, NamedVariables& out) const {
    const auto& own = buffers ? buffers_ : params_;
    for (const auto& [name, v] : own) {
        out.emplace_back(prefix.empty() ? name : prefix + "." + name, v);
    }
    for (const auto& [name, child] : children_) {
        child->collect(prefix.empty() ? name : prefix + "." + name, buffers, out);
    }
}

}  // namespace mddr::nets
