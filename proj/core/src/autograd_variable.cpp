#include "mddr/autograd/variable.hpp"

#include <stdexcept>
#include <unordered_set>

namespace mddr::autograd {

namespace {
thread_local bool g_grad_mode = true;
}

bool grad_mode() { return g_grad_mode; }

NoGradGuard::NoGradGuard() : prev_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = prev_; }

void backward(const Variable& loss) {
    if (!loss.defined() || loss.value().numel() != 1) {
        throw std::invalid_argument("autograd::backward: loss must be a defined scalar");
    }

    // Iterative post-order DFS; the visit order depends only on graph
    // structure, so repeated runs are identical.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    struct Frame {
        Node* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    Node* root = loss.node().get();
    visited.insert(root);
    stack.push_back({root, 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Node* p = f.node->parents[f.next_parent++].get();
            if (visited.insert(p).second) {
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] = 1.0f;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (!n->backward_fn) continue;
        n->ensure_grad();
        n->backward_fn(*n);
    }
}

}  // namespace mddr::autograd
