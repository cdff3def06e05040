#include "mddr/nets/snapshot.hpp"

#include <cstring>

#include "mddr/common/errors.hpp"

namespace mddr::nets {

namespace {

void append_entries(const Module::NamedVariables& vars, bool is_buffer, ParamSnapshot& snap) {
    for (const auto& [path, v] : vars) {
        ParamSnapshot::Entry e;
        e.path = path;
        e.is_buffer = is_buffer;
        e.dims = v.value().dims();
        e.values = v.value().vec();
        snap.entries.push_back(std::move(e));
    }
}

bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

ParamSnapshot snapshot_params(const Module& net) {
    ParamSnapshot snap;
    append_entries(net.named_parameters(), false, snap);
    append_entries(net.named_buffers(), true, snap);
    return snap;
}

void restore_params(Module& net, const ParamSnapshot& snapshot) {
    auto params = net.named_parameters();
    auto buffers = net.named_buffers();
    if (snapshot.entries.size() != params.size() + buffers.size()) {
        throw ValidationError("restore_params: entry count mismatch (snapshot " +
                              std::to_string(snapshot.entries.size()) + ", net " +
                              std::to_string(params.size() + buffers.size()) + ")");
    }
    size_t i = 0;
    for (auto* group : {&params, &buffers}) {
        for (auto& [path, v] : *group) {
            const auto& e = snapshot.entries[i++];
            if (e.path != path) {
                throw ValidationError("restore_params: path mismatch at entry " +
                                      std::to_string(i - 1) + ": snapshot '" + e.path +
                                      "' vs net '" + path + "'");
            }
            if (e.dims != v.value().dims()) {
                throw ValidationError("restore_params: shape mismatch for '" + path + "'");
            }
            auto var = v;
            var.mutable_value().vec() = e.values;
        }
    }
}

bool params_equal(const ParamSnapshot& a, const ParamSnapshot& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (size_t i = 0; i < a.entries.size(); ++i) {
        const auto& ea = a.entries[i];
        const auto& eb = b.entries[i];
        if (ea.path != eb.path || ea.dims != eb.dims) return false;
        if (!bitwise_equal(ea.values, eb.values)) return false;
    }
    return true;
}

bool params_equal(const Module& net, const ParamSnapshot& snapshot) {
    return params_equal(snapshot_params(net), snapshot);
}

}  // namespace mddr::nets
