#pragma once

// Internal spatial-region arithmetic shared by the fusion cost model and the
// tiled reference executor.

#include <vector>

#include "framepipe/memcost.hpp"

namespace framepipe::detail {

struct Region {
    long long r0 = 0;
    long long c0 = 0;
    long long h = 0;
    long long w = 0;
};

// Input region an op needs to produce `out` on its output, clamped to the
// input extents. conv3x3 expands by 1 (zero padding at true borders),
// upsample_nearest2x halves, pointwise kinds pass through.
Region input_region(OpKind kind, const Region& out, long long in_h, long long in_w);

bool is_spatial(const TensorSpec& t);

// Group nodes as a single-consumer chain: op i+1 consumes op i's output and
// nothing else does (elementwise_add may take its second operand from
// outside the group). Throws PlanError when the ids do not form one.
struct Chain {
    std::vector<const OpNode*> ops;
    const TensorSpec* input = nullptr;   // first op's chain-activation input
    const TensorSpec* output = nullptr;  // last op's output
};

Chain chain_view(const OpGraph& graph, const std::vector<std::string>& node_ids);

}  // namespace framepipe::detail
