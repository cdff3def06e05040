#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <vector>

#include "mddr/common/tensor.hpp"

namespace mddr::autograd {

/// One node of a define-by-run computation graph. Leaves hold parameters or
/// inputs; interior nodes carry a closure that routes the node's gradient to
/// its parents.
struct Node {
    Tensor value;
    Tensor grad;  // lazily allocated, same dims as value
    bool needs_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void ensure_grad() {
        if (!grad.defined()) grad = Tensor(value.dims());
    }
};

/// Shared handle to a graph node.
class Variable {
public:
    Variable() = default;

    static Variable leaf(Tensor value, bool needs_grad) {
        Variable v;
        v.node_ = std::make_shared<Node>();
        v.node_->value = std::move(value);
        v.node_->needs_grad = needs_grad;
        return v;
    }

    static Variable from_node(std::shared_ptr<Node> n) {
        Variable v;
        v.node_ = std::move(n);
        return v;
    }

    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }

    Tensor& grad() {
        node_->ensure_grad();
        return node_->grad;
    }
    bool has_grad() const { return node_ && node_->grad.defined(); }
    void zero_grad() {
        if (node_ && node_->grad.defined()) {
            std::fill(node_->grad.vec().begin(), node_->grad.vec().end(), 0.0f);
        }
    }

    bool needs_grad() const { return node_ && node_->needs_grad; }
    void set_needs_grad(bool b) { node_->needs_grad = b; }

    const std::shared_ptr<Node>& node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

/// Whether ops currently record backward closures (thread-local).
bool grad_mode();

/// RAII guard disabling gradient recording, used for inference-mode forward
/// passes through frozen networks.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

/// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
/// reachable node with needs_grad set.
void backward(const Variable& loss);

}  // namespace mddr::autograd
