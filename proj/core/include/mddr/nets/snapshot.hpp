#pragma once

#include <string>
#include <vector>

#include "mddr/nets/module.hpp"

namespace mddr::nets {

/// Deep value copy of all parameters and buffers of a network, keyed by
/// layer path. Comparison is exact (bitwise on the float payloads), which is
/// what the frozen-parameter contracts of stage 2 require.
struct ParamSnapshot {
    struct Entry {
        std::string path;
        bool is_buffer = false;
        std::vector<int> dims;
        std::vector<float> values;
    };
    std::vector<Entry> entries;
};

ParamSnapshot snapshot_params(const Module& net);

/// Restores a snapshot into a structurally identical network; throws
/// ValidationError if paths or shapes do not line up.
void restore_params(Module& net, const ParamSnapshot& snapshot);

bool params_equal(const ParamSnapshot& a, const ParamSnapshot& b);
bool params_equal(const Module& net, const ParamSnapshot& snapshot);

}  // namespace mddr::nets
