#pragma once

#include <map>
#include <string>
#include <vector>

#include "framepipe/memcost.hpp"

namespace framepipe {

class Rng;

struct Tensor {
    std::vector<long long> dims;
    std::vector<float> data;

    long long count() const;
    static Tensor zeros(std::vector<long long> dims);
};

using TensorMap = std::map<std::string, Tensor>;

Tensor random_tensor(const std::vector<long long>& dims, Rng& rng);  // uniform [-1, 1)

// Desk-scale execution. plan == nullptr: op-at-a-time oracle, returns every
// node output. With a plan: per-group tiled execution where intermediates
// live only as tile regions and each fused group_norm takes its statistics
// from a full-precision pre-pass; returns group-external outputs only.
TensorMap execute_reference(const OpGraph& graph, const TensorMap& inputs,
                            const FusionPlan* plan = nullptr);

struct EquivalenceReport {
    bool ok = true;
    double max_rel_err = 0.0;
    std::string worst_tensor;
    long long worst_index = -1;
};

// Compares the fused-tiled run against the unfused oracle on every tensor
// the fused run materializes.
EquivalenceReport check_equivalence(const OpGraph& graph, const TensorMap& inputs,
                                    const FusionPlan& plan, double rel_tol = 1e-5);

}  // namespace framepipe
