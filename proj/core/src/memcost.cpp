#include "framepipe/memcost.hpp"

#include <algorithm>
#include <set>

#include "framepipe/errors.hpp"
#include "framepipe/jsonio.hpp"
#include "json_util.hpp"
#include "tiling.hpp"

namespace framepipe {

long long TensorSpec::count() const {
    long long n = 1;
    for (long long d : dims) n *= d;
    return n;
}

long long TensorSpec::size_bytes() const { return count() * elem_bytes; }

OpKind op_kind_from_string(const std::string& name) {
    if (name == "upsample_nearest2x") return OpKind::upsample_nearest2x;
    if (name == "conv3x3") return OpKind::conv3x3;
    if (name == "group_norm") return OpKind::group_norm;
    if (name == "silu") return OpKind::silu;
    if (name == "matmul") return OpKind::matmul;
    if (name == "elementwise_add") return OpKind::elementwise_add;
    throw GraphError("unknown op kind: " + name);
}

std::string to_string(OpKind kind) {
    switch (kind) {
        case OpKind::upsample_nearest2x: return "upsample_nearest2x";
        case OpKind::conv3x3: return "conv3x3";
        case OpKind::group_norm: return "group_norm";
        case OpKind::silu: return "silu";
        case OpKind::matmul: return "matmul";
        case OpKind::elementwise_add: return "elementwise_add";
    }
    return "?";
}

const TensorSpec& OpGraph::tensor(const std::string& id) const {
    auto it = tensors.find(id);
    if (it == tensors.end()) throw GraphError("unknown tensor: " + id);
    return it->second;
}

const OpNode& OpGraph::node(const std::string& id) const {
    for (const OpNode& n : nodes) {
        if (n.id == id) return n;
    }
    throw GraphError("unknown node: " + id);
}

std::vector<std::string> OpGraph::consumers(const std::string& tensor_id) const {
    std::vector<std::string> out;
    for (const OpNode& n : nodes) {
        for (const std::string& in : n.inputs) {
            if (in == tensor_id) {
                out.push_back(n.id);
                break;
            }
        }
    }
    return out;
}

bool OpGraph::produced(const std::string& tensor_id) const {
    for (const OpNode& n : nodes) {
        if (n.output == tensor_id) return true;
    }
    return false;
}

namespace {

void require_dims(const TensorSpec& t, std::size_t rank, const std::string& ctx) {
    if (t.dims.size() != rank) {
        throw GraphError(ctx + ": tensor " + t.id + " must have rank " +
                         std::to_string(rank));
    }
    for (long long d : t.dims) {
        if (d < 1) throw GraphError(ctx + ": tensor " + t.id + " has non-positive extent");
    }
}

void require_same_dims(const TensorSpec& a, const TensorSpec& b, const std::string& ctx) {
    if (a.dims != b.dims) {
        throw GraphError(ctx + ": shape mismatch between " + a.id + " and " + b.id);
    }
}

long long default_flops(const OpGraph& g, const OpNode& n) {
    const TensorSpec& out = g.tensor(n.output);
    switch (n.kind) {
        case OpKind::upsample_nearest2x:
            return 0;
        case OpKind::conv3x3: {
            const TensorSpec& in = g.tensor(n.inputs[0]);
            return out.count() * 2 * 9 * in.dims[1];
        }
        case OpKind::group_norm:
            return 5 * out.count();
        case OpKind::silu:
            return 4 * out.count();
        case OpKind::matmul: {
            const TensorSpec& in = g.tensor(n.inputs[0]);
            return 2 * in.dims[0] * in.dims[1] * out.dims[1];
        }
        case OpKind::elementwise_add:
            return out.count();
    }
    return 0;
}

}  // namespace

void OpGraph::validate() {
    std::set<std::string> node_ids;
    std::set<std::string> produced_ids;
    for (OpNode& n : nodes) {
        if (!node_ids.insert(n.id).second) throw GraphError("duplicate node id: " + n.id);
        const std::string ctx = "node " + n.id;

        for (const std::string& in : n.inputs) {
            tensor(in);
            // producers must precede consumers; a tensor produced later
            // (or never) but not a pure graph input indicates a cycle.
            if (produced(in) && !produced_ids.count(in)) {
                throw GraphError(ctx + ": input " + in + " is produced after use");
            }
        }
        const TensorSpec& out = tensor(n.output);
        if (!produced_ids.insert(n.output).second) {
            throw GraphError(ctx + ": tensor " + n.output + " produced twice");
        }

        switch (n.kind) {
            case OpKind::upsample_nearest2x: {
                if (n.inputs.size() != 1 || n.weight) {
                    throw GraphError(ctx + ": upsample takes one input, no weight");
                }
                const TensorSpec& in = tensor(n.inputs[0]);
                require_dims(in, 4, ctx);
                require_dims(out, 4, ctx);
                if (out.dims[0] != in.dims[0] || out.dims[1] != in.dims[1] ||
                    out.dims[2] != 2 * in.dims[2] || out.dims[3] != 2 * in.dims[3]) {
                    throw GraphError(ctx + ": output must be (N,C,2H,2W)");
                }
                break;
            }
            case OpKind::conv3x3: {
                if (n.inputs.size() != 1 || !n.weight) {
                    throw GraphError(ctx + ": conv3x3 takes one input and a weight");
                }
                const TensorSpec& in = tensor(n.inputs[0]);
                const TensorSpec& w = tensor(*n.weight);
                require_dims(in, 4, ctx);
                require_dims(out, 4, ctx);
                require_dims(w, 4, ctx);
                if (w.dims[1] != in.dims[1] || w.dims[2] != 3 || w.dims[3] != 3) {
                    throw GraphError(ctx + ": weight must be (Cout,Cin,3,3)");
                }
                if (out.dims[0] != in.dims[0] || out.dims[1] != w.dims[0] ||
                    out.dims[2] != in.dims[2] || out.dims[3] != in.dims[3]) {
                    throw GraphError(ctx + ": output must be (N,Cout,H,W)");
                }
                break;
            }
            case OpKind::group_norm: {
                if (n.inputs.size() != 1 || n.weight) {
                    throw GraphError(ctx + ": group_norm takes one input, no weight");
                }
                const TensorSpec& in = tensor(n.inputs[0]);
                require_dims(in, 4, ctx);
                require_same_dims(in, out, ctx);
                if (n.gn_groups < 1 || in.dims[1] % n.gn_groups != 0) {
                    throw GraphError(ctx + ": gn_groups must divide the channel count");
                }
                break;
            }
            case OpKind::silu: {
                if (n.inputs.size() != 1 || n.weight) {
                    throw GraphError(ctx + ": silu takes one input, no weight");
                }
                require_same_dims(tensor(n.inputs[0]), out, ctx);
                break;
            }
            case OpKind::matmul: {
                if (n.inputs.size() != 1 || !n.weight) {
                    throw GraphError(ctx + ": matmul takes one input and a weight");
                }
                const TensorSpec& in = tensor(n.inputs[0]);
                const TensorSpec& w = tensor(*n.weight);
                require_dims(in, 2, ctx);
                require_dims(w, 2, ctx);
                require_dims(out, 2, ctx);
                if (w.dims[0] != in.dims[1] || out.dims[0] != in.dims[0] ||
                    out.dims[1] != w.dims[1]) {
                    throw GraphError(ctx + ": shapes must satisfy (M,K)x(K,N)=(M,N)");
                }
                break;
            }
            case OpKind::elementwise_add: {
                if (n.inputs.size() != 2 || n.weight) {
                    throw GraphError(ctx + ": elementwise_add takes two inputs, no weight");
                }
                require_same_dims(tensor(n.inputs[0]), out, ctx);
                require_same_dims(tensor(n.inputs[1]), out, ctx);
                break;
            }
        }
        if (n.flops == 0) n.flops = default_flops(*this, n);
    }
}

OpGraph parse_graph(const std::string& text, const std::string& source) {
    detail::json doc = detail::parse_json_strict(text, source);
    detail::ObjectView root(doc, source);
    OpGraph g;

    const detail::json& tensors = root.child("tensors");
    if (!tensors.is_array()) detail::fail_field(source + ".tensors", "expected an array");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        detail::ObjectView tv(tensors[i], source + ".tensors[" + std::to_string(i) + "]");
        TensorSpec t;
        t.id = tv.str("id");
        const detail::json& dims = tv.child("dims");
        if (!dims.is_array() || dims.empty()) {
            detail::fail_field(tv.key_path("dims"), "expected a non-empty array");
        }
        for (const auto& d : dims) {
            if (!d.is_number_integer()) {
                detail::fail_field(tv.key_path("dims"), "expected integers");
            }
            t.dims.push_back(d.get<long long>());
        }
        t.elem_bytes = tv.integer_or("elem_bytes", 4);
        if (t.elem_bytes < 1) detail::fail_field(tv.key_path("elem_bytes"), "must be >= 1");
        tv.finish();
        if (!g.tensors.emplace(t.id, t).second) {
            throw GraphError(source + ": duplicate tensor id " + t.id);
        }
    }

    const detail::json& nodes = root.child("nodes");
    if (!nodes.is_array()) detail::fail_field(source + ".nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        detail::ObjectView nv(nodes[i], source + ".nodes[" + std::to_string(i) + "]");
        OpNode n;
        n.id = nv.str("id");
        n.kind = op_kind_from_string(nv.str("kind"));
        n.inputs = nv.str_list("inputs");
        n.output = nv.str("output");
        if (nv.has("weight")) n.weight = nv.str("weight");
        n.gn_groups = static_cast<int>(nv.integer_or("gn_groups", 1));
        nv.finish();
        g.nodes.push_back(std::move(n));
    }
    root.finish();
    g.validate();
    return g;
}

OpGraph load_graph(const std::string& path) { return parse_graph(read_text_file(path), path); }

std::string graph_to_json(const OpGraph& graph) {
    detail::json doc;
    doc["tensors"] = detail::json::array();
    for (const auto& [id, t] : graph.tensors) {
        detail::json jt;
        jt["id"] = id;
        jt["dims"] = t.dims;
        jt["elem_bytes"] = t.elem_bytes;
        doc["tensors"].push_back(jt);
    }
    doc["nodes"] = detail::json::array();
    for (const OpNode& n : graph.nodes) {
        detail::json jn;
        jn["id"] = n.id;
        jn["kind"] = to_string(n.kind);
        jn["inputs"] = n.inputs;
        jn["output"] = n.output;
        if (n.weight) jn["weight"] = *n.weight;
        if (n.kind == OpKind::group_norm) jn["gn_groups"] = n.gn_groups;
        doc["nodes"].push_back(jn);
    }
    return doc.dump(2) + "\n";
}

MemCost baseline_cost(const OpGraph& graph) {
    MemCost cost;
    for (const OpNode& n : graph.nodes) {
        for (const std::string& in : n.inputs) {
            cost.activation_bytes += graph.tensor(in).size_bytes();
            cost.activation_transactions += 1;
        }
        if (n.weight) {
            cost.weight_bytes += graph.tensor(*n.weight).size_bytes();
            cost.weight_transactions += 1;
        }
        cost.activation_bytes += graph.tensor(n.output).size_bytes();
        cost.activation_transactions += 1;
    }
    return cost;
}

namespace {

MemCost group_fused_cost(const OpGraph& graph, const std::vector<std::string>& node_ids) {
    std::set<std::string> members(node_ids.begin(), node_ids.end());
    std::set<std::string> internal_outputs;
    for (const std::string& id : node_ids) internal_outputs.insert(graph.node(id).output);

    MemCost cost;
    std::set<std::string> externals_read;
    for (const std::string& id : node_ids) {
        const OpNode& n = graph.node(id);
        for (const std::string& in : n.inputs) {
            if (internal_outputs.count(in) || externals_read.count(in)) continue;
            externals_read.insert(in);
            cost.activation_bytes += graph.tensor(in).size_bytes();
            cost.activation_transactions += 1;
        }
        if (n.weight) {
            cost.weight_bytes += graph.tensor(*n.weight).size_bytes();
            cost.weight_transactions += 1;
        }
        // Two-pass normalization: the statistics pass re-reads the op input;
        // charged in bytes only (it is not an extra kernel-level tensor
        // round-trip).
        if (n.kind == OpKind::group_norm && node_ids.size() > 1) {
            cost.activation_bytes += graph.tensor(n.inputs[0]).size_bytes();
        }
    }
    for (const std::string& id : node_ids) {
        const OpNode& n = graph.node(id);
        bool external = graph.consumers(n.output).empty();
        for (const std::string& consumer : graph.consumers(n.output)) {
            if (!members.count(consumer)) external = true;
        }
        if (external) {
            cost.activation_bytes += graph.tensor(n.output).size_bytes();
            cost.activation_transactions += 1;
        }
    }
    return cost;
}

MemCost group_baseline_cost(const OpGraph& graph, const std::vector<std::string>& node_ids) {
    MemCost cost;
    for (const std::string& id : node_ids) {
        const OpNode& n = graph.node(id);
        for (const std::string& in : n.inputs) {
            cost.activation_bytes += graph.tensor(in).size_bytes();
            cost.activation_transactions += 1;
        }
        if (n.weight) {
            cost.weight_bytes += graph.tensor(*n.weight).size_bytes();
            cost.weight_transactions += 1;
        }
        cost.activation_bytes += graph.tensor(n.output).size_bytes();
        cost.activation_transactions += 1;
    }
    return cost;
}

void add_to(MemCost& total, const MemCost& part) {
    total.activation_bytes += part.activation_bytes;
    total.weight_bytes += part.weight_bytes;
    total.activation_transactions += part.activation_transactions;
    total.weight_transactions += part.weight_transactions;
}

}  // namespace

MemCost fused_cost(const OpGraph& graph, const FusionPlan& plan) {
    std::set<std::string> covered;
    std::size_t total_nodes = 0;
    for (const FusionGroup& g : plan.groups) {
        for (const std::string& id : g.node_ids) {
            graph.node(id);
            if (!covered.insert(id).second) {
                throw PlanError("plan assigns node twice: " + id);
            }
        }
        total_nodes += g.node_ids.size();
    }
    if (total_nodes != graph.nodes.size()) {
        throw PlanError("plan does not cover every node exactly once");
    }
    MemCost cost;
    for (const FusionGroup& g : plan.groups) {
        add_to(cost, group_fused_cost(graph, g.node_ids));
    }
    return cost;
}

namespace {

long long pow2_cap(long long extent) {
    long long p = 8;
    while (p < extent) p *= 2;
    return p;
}

// Largest square power-of-two tile (>= 8) whose working set fits; 0 if none.
long long best_tile(const OpGraph& graph, const std::vector<std::string>& ids,
                    long long s_sram) {
    detail::Chain chain = detail::chain_view(graph, ids);
    long long cap = pow2_cap(std::max(chain.output->dims[2], chain.output->dims[3]));
    for (long long t = cap; t >= 8; t /= 2) {
        if (group_working_set_bytes(graph, ids, t, t) <= s_sram) return t;
    }
    return 0;
}

int halo_of(const OpGraph& graph, const std::vector<std::string>& ids) {
    int halo = 0;
    for (const std::string& id : ids) {
        if (graph.node(id).kind == OpKind::conv3x3) ++halo;
    }
    return halo;
}

FusionGroup make_group(const OpGraph& graph, std::vector<std::string> ids, long long tile,
                       bool feasible) {
    FusionGroup g;
    g.node_ids = std::move(ids);
    g.tile_h = tile;
    g.tile_w = tile;
    g.halo = halo_of(graph, g.node_ids);
    g.tile_feasible = feasible;
    g.baseline = group_baseline_cost(graph, g.node_ids);
    g.fused = group_fused_cost(graph, g.node_ids);
    return g;
}

}  // namespace

FusionPlan singleton_plan(const OpGraph& graph) {
    FusionPlan plan;
    for (const OpNode& n : graph.nodes) {
        plan.groups.push_back(make_group(graph, {n.id}, 0, true));
    }
    return plan;
}

FusionPlan plan_vertical_fusion(const OpGraph& graph, long long s_sram) {
    if (s_sram <= 0) throw ConfigError("plan_vertical_fusion: s_sram must be positive");
    FusionPlan plan;

    std::vector<std::string> chain;
    long long chain_tile = 0;

    auto flush = [&]() {
        if (chain.empty()) return;
        plan.groups.push_back(make_group(graph, chain, chain_tile, true));
        chain.clear();
        chain_tile = 0;
    };

    for (const OpNode& n : graph.nodes) {
        const bool spatial = detail::is_spatial(graph.tensor(n.output)) &&
                             n.kind != OpKind::matmul;
        if (!spatial) {
            flush();
            plan.groups.push_back(make_group(graph, {n.id}, 0, true));
            continue;
        }

        if (!chain.empty()) {
            const OpNode& tail = graph.node(chain.back());
            const bool linked = !n.inputs.empty() &&
                                std::find(n.inputs.begin(), n.inputs.end(), tail.output) !=
                                    n.inputs.end() &&
                                graph.consumers(tail.output).size() == 1;
            if (linked) {
                std::vector<std::string> extended = chain;
                extended.push_back(n.id);
                long long t = best_tile(graph, extended, s_sram);
                if (t > 0) {
                    chain = std::move(extended);
                    chain_tile = t;
                    continue;
                }
            }
            flush();
        }

        long long t = best_tile(graph, {n.id}, s_sram);
        if (t == 0) {
            plan.notes.push_back("node " + n.id +
                                 " exceeds the SRAM budget even at the 8x8 tile");
            plan.groups.push_back(make_group(graph, {n.id}, 8, false));
        } else {
            chain = {n.id};
            chain_tile = t;
        }
    }
    flush();
    return plan;
}

long long group_working_set_bytes(const OpGraph& graph,
                                  const std::vector<std::string>& node_ids, long long tile_h,
                                  long long tile_w) {
    if (tile_h < 1 || tile_w < 1) throw PlanError("tile extents must be >= 1");
    detail::Chain chain = detail::chain_view(graph, node_ids);
    const TensorSpec& out = *chain.output;
    if (!detail::is_spatial(out)) {
        // Non-spatial output (single matmul group): no tiling axis, the
        // working set is the whole operand set.
        long long bytes = 0;
        const OpNode* op = chain.ops.front();
        for (const std::string& in : op->inputs) bytes += graph.tensor(in).size_bytes();
        if (op->weight) bytes += graph.tensor(*op->weight).size_bytes();
        bytes += out.size_bytes();
        return bytes;
    }
    const long long batch = out.dims[0];
    const long long out_h = out.dims[2];
    const long long out_w = out.dims[3];

    long long weights = 0;
    for (const OpNode* op : chain.ops) {
        if (op->weight) weights += graph.tensor(*op->weight).size_bytes();
    }

    long long worst = 0;
    for (long long r = 0; r < out_h; r += tile_h) {
        for (long long c = 0; c < out_w; c += tile_w) {
            detail::Region region{r, c, std::min(tile_h, out_h - r),
                                  std::min(tile_w, out_w - c)};
            long long bytes = 0;
            // Output tile, then walk the chain backwards accumulating every
            // intermediate region and the chain-input region.
            for (std::size_t i = chain.ops.size(); i-- > 0;) {
                const OpNode* op = chain.ops[i];
                const TensorSpec& op_out = graph.tensor(op->output);
                bytes += batch * op_out.dims[1] * region.h * region.w * op_out.elem_bytes;
                const TensorSpec& op_in = graph.tensor(op->inputs[0]);
                if (op->kind == OpKind::elementwise_add) {
                    // Second operand streams the same region from outside.
                    const TensorSpec& rhs = graph.tensor(op->inputs[1]);
                    bytes += batch * rhs.dims[1] * region.h * region.w * rhs.elem_bytes;
                }
                region = detail::input_region(op->kind, region, op_in.dims[2], op_in.dims[3]);
            }
            const TensorSpec& in = *chain.input;
            bytes += batch * in.dims[1] * region.h * region.w * in.elem_bytes;
            bytes += weights;
            worst = std::max(worst, bytes);
        }
    }
    return worst;
}

std::vector<std::vector<std::string>> same_input_matmul_sets(const OpGraph& graph) {
    std::vector<std::pair<std::string, std::vector<std::string>>> by_input;
    for (const OpNode& n : graph.nodes) {
        if (n.kind != OpKind::matmul) continue;
        auto it = std::find_if(by_input.begin(), by_input.end(),
                               [&](const auto& p) { return p.first == n.inputs[0]; });
        if (it == by_input.end()) {
            by_input.push_back({n.inputs[0], {n.id}});
        } else {
            it->second.push_back(n.id);
        }
    }
    std::vector<std::vector<std::string>> sets;
    for (auto& [input, ids] : by_input) {
        if (ids.size() >= 2) sets.push_back(std::move(ids));
    }
    return sets;
}

HorizontalFusion plan_horizontal_fusion(const OpGraph& graph,
                                        const std::vector<std::string>& matmul_ids) {
    if (matmul_ids.empty()) throw PlanError("horizontal fusion needs at least one matmul");
    HorizontalFusion fusion;
    fusion.node_ids = matmul_ids;
    fusion.launches_before = static_cast<long long>(matmul_ids.size());

    std::string shared_input;
    long long in_bytes = 0;
    long long weight_bytes = 0;
    long long out_bytes = 0;
    long long flops = 0;
    for (const std::string& id : matmul_ids) {
        const OpNode& n = graph.node(id);
        if (n.kind != OpKind::matmul) throw PlanError("horizontal fusion: " + id + " is not a matmul");
        const TensorSpec& in = graph.tensor(n.inputs[0]);
        const TensorSpec& w = graph.tensor(*n.weight);
        const TensorSpec& out = graph.tensor(n.output);
        if (shared_input.empty()) {
            shared_input = n.inputs[0];
            fusion.m_dim = in.dims[0];
            fusion.k_dim = in.dims[1];
            in_bytes = in.size_bytes();
        } else if (n.inputs[0] != shared_input) {
            throw PlanError("horizontal fusion: inputs differ (" + shared_input + " vs " +
                            n.inputs[0] + ")");
        }
        fusion.n_dim_total += w.dims[1];
        weight_bytes += w.size_bytes();
        out_bytes += out.size_bytes();
        flops += n.flops;
        fusion.per_op_ai.push_back(
            static_cast<double>(n.flops) /
            static_cast<double>(in.size_bytes() + w.size_bytes() + out.size_bytes()));
    }
    const double before_bytes =
        static_cast<double>(fusion.launches_before * in_bytes + weight_bytes + out_bytes);
    const double after_bytes = static_cast<double>(in_bytes + weight_bytes + out_bytes);
    fusion.ai_before = static_cast<double>(flops) / before_bytes;
    fusion.ai_after = static_cast<double>(flops) / after_bytes;
    return fusion;
}

std::string fusion_report_csv(const OpGraph& graph, const FusionPlan& plan) {
    std::string out =
        "group,ops,tile_h,tile_w,halo,baseline_bytes,fused_bytes,txns_before,txns_after,"
        "feasible\n";
    MemCost base_total, fused_total;
    for (std::size_t i = 0; i < plan.groups.size(); ++i) {
        const FusionGroup& g = plan.groups[i];
        std::string ops;
        for (const std::string& id : g.node_ids) {
            if (!ops.empty()) ops += '|';
            ops += id;
        }
        out += std::to_string(i) + "," + ops + "," + std::to_string(g.tile_h) + "," +
               std::to_string(g.tile_w) + "," + std::to_string(g.halo) + "," +
               std::to_string(g.baseline.total_bytes()) + "," +
               std::to_string(g.fused.total_bytes()) + "," +
               std::to_string(g.baseline.activation_transactions) + "," +
               std::to_string(g.fused.activation_transactions) + "," +
               (g.tile_feasible ? "yes" : "no") + "\n";
        add_to(base_total, g.baseline);
        add_to(fused_total, g.fused);
    }
    out += "TOTAL,,,,," + std::to_string(base_total.total_bytes()) + "," +
           std::to_string(fused_total.total_bytes()) + "," +
           std::to_string(base_total.activation_transactions) + "," +
           std::to_string(fused_total.activation_transactions) + ",\n";
    return out;
}

std::string plan_to_json(const FusionPlan& plan) {
    detail::json doc;
    doc["groups"] = detail::json::array();
    for (const FusionGroup& g : plan.groups) {
        detail::json jg;
        jg["nodes"] = g.node_ids;
        jg["tile_h"] = g.tile_h;
        jg["tile_w"] = g.tile_w;
        jg["halo"] = g.halo;
        jg["tile_feasible"] = g.tile_feasible;
        jg["baseline_bytes"] = g.baseline.total_bytes();
        jg["fused_bytes"] = g.fused.total_bytes();
        jg["transactions_before"] = g.baseline.activation_transactions;
        jg["transactions_after"] = g.fused.activation_transactions;
        doc["groups"].push_back(jg);
    }
    doc["notes"] = plan.notes;
    return doc.dump(2) + "\n";
}

}  // namespace framepipe

namespace framepipe::detail {

bool is_spatial(const TensorSpec& t) { return t.dims.size() == 4; }

Region input_region(OpKind kind, const Region& out, long long in_h, long long in_w) {
    switch (kind) {
        case OpKind::conv3x3: {
            Region r;
            r.r0 = std::max<long long>(0, out.r0 - 1);
            r.c0 = std::max<long long>(0, out.c0 - 1);
            r.h = std::min(in_h, out.r0 + out.h + 1) - r.r0;
            r.w = std::min(in_w, out.c0 + out.w + 1) - r.c0;
            return r;
        }
        case OpKind::upsample_nearest2x: {
            Region r;
            r.r0 = out.r0 / 2;
            r.c0 = out.c0 / 2;
            r.h = (out.r0 + out.h + 1) / 2 - r.r0;
            r.w = (out.c0 + out.w + 1) / 2 - r.c0;
            r.h = std::min(r.h, in_h - r.r0);
            r.w = std::min(r.w, in_w - r.c0);
            return r;
        }
        default:
            return out;
    }
}

Chain chain_view(const OpGraph& graph, const std::vector<std::string>& node_ids) {
    if (node_ids.empty()) throw PlanError("empty fusion group");
    Chain chain;
    for (const std::string& id : node_ids) chain.ops.push_back(&graph.node(id));

    const OpNode* first = chain.ops.front();
    if (first->kind == OpKind::matmul && chain.ops.size() > 1) {
        throw PlanError("matmul cannot join a spatial chain");
    }
    chain.input = &graph.tensor(first->inputs[0]);
    for (std::size_t i = 1; i < chain.ops.size(); ++i) {
        const OpNode* prev = chain.ops[i - 1];
        const OpNode* cur = chain.ops[i];
        if (cur->kind == OpKind::matmul) throw PlanError("matmul cannot join a spatial chain");
        const bool linked = std::find(cur->inputs.begin(), cur->inputs.end(), prev->output) !=
                            cur->inputs.end();
        if (!linked) {
            throw PlanError("group is not a chain: " + cur->id + " does not consume " +
                            prev->output);
        }
        // The producing link must carry position 0 so the region walk tracks
        // the chain spine; elementwise_add may stream its second operand.
        if (cur->inputs[0] != prev->output) {
            throw PlanError("group chain must run through the first input of " + cur->id);
        }
    }
    chain.output = &graph.tensor(chain.ops.back()->output);
    if (!is_spatial(*chain.output) && chain.ops.size() > 1) {
        throw PlanError("fused chains must produce spatial tensors");
    }
    return chain;
}

}  // namespace framepipe::detail
