#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace framepipe {

// Activations are NCHW; matmul operands are 2D (rows, cols).
struct TensorSpec {
    std::string id;
    std::vector<long long> dims;
    long long elem_bytes = 4;

    long long count() const;
    long long size_bytes() const;
};

enum class OpKind { upsample_nearest2x, conv3x3, group_norm, silu, matmul, elementwise_add };

OpKind op_kind_from_string(const std::string& name);
std::string to_string(OpKind kind);

struct OpNode {
    std::string id;
    OpKind kind = OpKind::silu;
    std::vector<std::string> inputs;  // activation tensor ids
    std::string output;
    std::optional<std::string> weight;  // conv3x3: (Cout,Cin,3,3); matmul: (K,N)
    int gn_groups = 1;
    long long flops = 0;  // filled by validate() when left at 0
};

struct OpGraph {
    std::map<std::string, TensorSpec> tensors;
    std::vector<OpNode> nodes;  // topological order required

    const TensorSpec& tensor(const std::string& id) const;
    const OpNode& node(const std::string& id) const;
    std::vector<std::string> consumers(const std::string& tensor_id) const;
    bool produced(const std::string& tensor_id) const;

    // Shape compatibility per kind, SSA (each tensor produced once),
    // producers before consumers, known tensor ids; fills default flops.
    void validate();
};

OpGraph parse_graph(const std::string& text, const std::string& source);
OpGraph load_graph(const std::string& path);
std::string graph_to_json(const OpGraph& graph);

// Transactions are whole-tensor access events; weights are tracked apart so
// the activation counts line up with kernel-launch accounting.
struct MemCost {
    long long activation_bytes = 0;
    long long weight_bytes = 0;
    long long activation_transactions = 0;
    long long weight_transactions = 0;

    long long total_bytes() const { return activation_bytes + weight_bytes; }
    long long total_transactions() const {
        return activation_transactions + weight_transactions;
    }
};

// Every op pays a read per input tensor and a write per output tensor.
MemCost baseline_cost(const OpGraph& graph);

struct FusionGroup {
    std::vector<std::string> node_ids;
    long long tile_h = 0;  // 0: untiled (singleton 2D ops)
    long long tile_w = 0;
    int halo = 0;  // accumulated conv3x3 count in the chain
    bool tile_feasible = true;
    MemCost baseline;
    MemCost fused;
};

struct FusionPlan {
    std::vector<FusionGroup> groups;
    std::vector<std::string> notes;  // per-node infeasibility reports
};

// Per group: external reads and writes only; internal tensors stay on chip.
// A group_norm fused below other ops charges one extra read of its input
// (global-statistics pass), in bytes only.
MemCost fused_cost(const OpGraph& graph, const FusionPlan& plan);

FusionPlan singleton_plan(const OpGraph& graph);

// Greedy longest-chain grouping in topological order; a chain extends while
// its sole-consumer link holds and some square power-of-two tile (>= 8)
// keeps the per-tile working set within s_sram. Matmuls stay singleton.
FusionPlan plan_vertical_fusion(const OpGraph& graph, long long s_sram);

// Worst per-tile working set over the row-major tile sweep: chain-input
// region (with halo), every intermediate region, output tile, plus weights.
// Independent checker for the planner's feasibility claims.
long long group_working_set_bytes(const OpGraph& graph,
                                  const std::vector<std::string>& node_ids, long long tile_h,
                                  long long tile_w);

struct HorizontalFusion {
    std::vector<std::string> node_ids;
    long long launches_before = 0;
    long long launches_after = 1;
    long long m_dim = 0;
    long long k_dim = 0;
    long long n_dim_total = 0;
    std::vector<double> per_op_ai;
    double ai_before = 0.0;  // aggregate, shared input charged per launch
    double ai_after = 0.0;   // shared input charged once
};

// Column-concatenates same-input matmul weights into one launch.
HorizontalFusion plan_horizontal_fusion(const OpGraph& graph,
                                        const std::vector<std::string>& matmul_ids);

// Maximal sets of matmul nodes sharing one input tensor (size >= 2),
// in graph order.
std::vector<std::vector<std::string>> same_input_matmul_sets(const OpGraph& graph);

std::string fusion_report_csv(const OpGraph& graph, const FusionPlan& plan);
std::string plan_to_json(const FusionPlan& plan);

}  // namespace framepipe
