#include "framepipe/memexec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "framepipe/errors.hpp"
#include "framepipe/rng.hpp"
#include "tiling.hpp"

namespace framepipe {

namespace {

using detail::Region;

constexpr double kGnEps = 1e-5;

long long flat(const std::vector<long long>& dims, long long n, long long c, long long i,
               long long j) {
    return ((n * dims[1] + c) * dims[2] + i) * dims[3] + j;
}

const Tensor& fetch(const TensorMap& env, const std::string& id) {
    auto it = env.find(id);
    if (it == env.end()) throw GraphError("executor: tensor not materialized: " + id);
    return it->second;
}

// Per (batch, group) mean and 1/sqrt(var + eps); double accumulation in
// (n, g, c, i, j) order so every execution path sees identical statistics.
struct GnStats {
    std::vector<double> mean;
    std::vector<double> inv_std;
    long long groups = 0;
};

GnStats gn_stats(const Tensor& in, int groups) {
    const long long n_dim = in.dims[0];
    const long long c_dim = in.dims[1];
    const long long per_group = c_dim / groups;
    const long long plane = in.dims[2] * in.dims[3];
    GnStats stats;
    stats.groups = groups;
    for (long long n = 0; n < n_dim; ++n) {
        for (long long g = 0; g < groups; ++g) {
            double sum = 0.0;
            double sq = 0.0;
            for (long long c = g * per_group; c < (g + 1) * per_group; ++c) {
                const float* base = in.data.data() + flat(in.dims, n, c, 0, 0);
                for (long long p = 0; p < plane; ++p) {
                    const double v = base[p];
                    sum += v;
                    sq += v * v;
                }
            }
            const double count = static_cast<double>(per_group * plane);
            const double mean = sum / count;
            const double var = sq / count - mean * mean;
            stats.mean.push_back(mean);
            stats.inv_std.push_back(1.0 / std::sqrt(var + kGnEps));
        }
    }
    return stats;
}

float silu_value(float x) {
    const double v = x;
    return static_cast<float>(v / (1.0 + std::exp(-v)));
}

void op_full(const OpGraph& graph, const OpNode& node, TensorMap& env) {
    const TensorSpec& out_spec = graph.tensor(node.output);
    Tensor out = Tensor::zeros(out_spec.dims);
    const Tensor& in = fetch(env, node.inputs[0]);

    switch (node.kind) {
        case OpKind::upsample_nearest2x: {
            for (long long n = 0; n < out.dims[0]; ++n)
                for (long long c = 0; c < out.dims[1]; ++c)
                    for (long long i = 0; i < out.dims[2]; ++i)
                        for (long long j = 0; j < out.dims[3]; ++j)
                            out.data[flat(out.dims, n, c, i, j)] =
                                in.data[flat(in.dims, n, c, i / 2, j / 2)];
            break;
        }
        case OpKind::conv3x3: {
            const Tensor& w = fetch(env, *node.weight);
            const long long h = in.dims[2], wd = in.dims[3], cin = in.dims[1];
            for (long long n = 0; n < out.dims[0]; ++n)
                for (long long co = 0; co < out.dims[1]; ++co)
                    for (long long i = 0; i < out.dims[2]; ++i)
                        for (long long j = 0; j < out.dims[3]; ++j) {
                            double acc = 0.0;
                            for (long long ci = 0; ci < cin; ++ci)
                                for (long long u = 0; u < 3; ++u)
                                    for (long long v = 0; v < 3; ++v) {
                                        const long long si = i + u - 1;
                                        const long long sj = j + v - 1;
                                        if (si < 0 || si >= h || sj < 0 || sj >= wd) continue;
                                        acc += static_cast<double>(
                                                   in.data[flat(in.dims, n, ci, si, sj)]) *
                                               w.data[flat(w.dims, co, ci, u, v)];
                                    }
                            out.data[flat(out.dims, n, co, i, j)] = static_cast<float>(acc);
                        }
            break;
        }
        case OpKind::group_norm: {
            const GnStats stats = gn_stats(in, node.gn_groups);
            const long long per_group = in.dims[1] / node.gn_groups;
            for (long long n = 0; n < out.dims[0]; ++n)
                for (long long c = 0; c < out.dims[1]; ++c) {
                    const std::size_t s =
                        static_cast<std::size_t>(n * stats.groups + c / per_group);
                    for (long long i = 0; i < out.dims[2]; ++i)
                        for (long long j = 0; j < out.dims[3]; ++j) {
                            const long long idx = flat(out.dims, n, c, i, j);
                            out.data[idx] = static_cast<float>(
                                (in.data[idx] - stats.mean[s]) * stats.inv_std[s]);
                        }
                }
            break;
        }
        case OpKind::silu: {
            for (std::size_t k = 0; k < in.data.size(); ++k) {
                out.data[k] = silu_value(in.data[k]);
            }
            break;
        }
        case OpKind::matmul: {
            const Tensor& w = fetch(env, *node.weight);
            const long long m = in.dims[0], kk = in.dims[1], nn = w.dims[1];
            for (long long r = 0; r < m; ++r)
                for (long long c = 0; c < nn; ++c) {
                    double acc = 0.0;
                    for (long long k = 0; k < kk; ++k) {
                        acc += static_cast<double>(in.data[r * kk + k]) * w.data[k * nn + c];
                    }
                    out.data[r * nn + c] = static_cast<float>(acc);
                }
            break;
        }
        case OpKind::elementwise_add: {
            const Tensor& rhs = fetch(env, node.inputs[1]);
            for (std::size_t k = 0; k < in.data.size(); ++k) {
                out.data[k] = in.data[k] + rhs.data[k];
            }
            break;
        }
    }
    env[node.output] = std::move(out);
}

// Tile-region buffer: [n][c][h][w] over a spatial window of the full map.
struct RegBuf {
    Region rg;
    long long n = 0;
    long long c = 0;
    std::vector<float> data;

    float& at(long long bn, long long bc, long long i, long long j) {
        return data[((bn * c + bc) * rg.h + i) * rg.w + j];
    }
    float get(long long bn, long long bc, long long i, long long j) const {
        return data[((bn * c + bc) * rg.h + i) * rg.w + j];
    }
};

RegBuf extract(const Tensor& t, const Region& rg) {
    RegBuf buf;
    buf.rg = rg;
    buf.n = t.dims[0];
    buf.c = t.dims[1];
    buf.data.resize(static_cast<std::size_t>(buf.n * buf.c * rg.h * rg.w));
    for (long long n = 0; n < buf.n; ++n)
        for (long long c = 0; c < buf.c; ++c)
            for (long long i = 0; i < rg.h; ++i)
                for (long long j = 0; j < rg.w; ++j)
                    buf.at(n, c, i, j) =
                        t.data[flat(t.dims, n, c, rg.r0 + i, rg.c0 + j)];
    return buf;
}

RegBuf apply_region(const OpGraph& graph, const OpNode& node, const RegBuf& in,
                    const Region& out_rg, const TensorMap& env,
                    const std::map<std::string, GnStats>& stats) {
    const TensorSpec& out_spec = graph.tensor(node.output);
    const TensorSpec& in_spec = graph.tensor(node.inputs[0]);
    RegBuf out;
    out.rg = out_rg;
    out.n = in.n;
    out.c = out_spec.dims[1];
    out.data.assign(static_cast<std::size_t>(out.n * out.c * out_rg.h * out_rg.w), 0.0f);

    switch (node.kind) {
        case OpKind::upsample_nearest2x: {
            for (long long n = 0; n < out.n; ++n)
                for (long long c = 0; c < out.c; ++c)
                    for (long long i = 0; i < out_rg.h; ++i)
                        for (long long j = 0; j < out_rg.w; ++j) {
                            const long long gi = (out_rg.r0 + i) / 2;
                            const long long gj = (out_rg.c0 + j) / 2;
                            out.at(n, c, i, j) = in.get(n, c, gi - in.rg.r0, gj - in.rg.c0);
                        }
            break;
        }
        case OpKind::conv3x3: {
            const Tensor& w = fetch(env, *node.weight);
            const long long h_full = in_spec.dims[2];
            const long long w_full = in_spec.dims[3];
            for (long long n = 0; n < out.n; ++n)
                for (long long co = 0; co < out.c; ++co)
                    for (long long i = 0; i < out_rg.h; ++i)
                        for (long long j = 0; j < out_rg.w; ++j) {
                            double acc = 0.0;
                            for (long long ci = 0; ci < in.c; ++ci)
                                for (long long u = 0; u < 3; ++u)
                                    for (long long v = 0; v < 3; ++v) {
                                        const long long si = out_rg.r0 + i + u - 1;
                                        const long long sj = out_rg.c0 + j + v - 1;
                                        if (si < 0 || si >= h_full || sj < 0 ||
                                            sj >= w_full) {
                                            continue;
                                        }
                                        acc += static_cast<double>(in.get(
                                                   n, ci, si - in.rg.r0, sj - in.rg.c0)) *
                                               w.data[flat(w.dims, co, ci, u, v)];
                                    }
                            out.at(n, co, i, j) = static_cast<float>(acc);
                        }
            break;
        }
        case OpKind::group_norm: {
            const GnStats& st = stats.at(node.id);
            const long long per_group = in_spec.dims[1] / node.gn_groups;
            for (long long n = 0; n < out.n; ++n)
                for (long long c = 0; c < out.c; ++c) {
                    const std::size_t s =
                        static_cast<std::size_t>(n * st.groups + c / per_group);
                    for (long long i = 0; i < out_rg.h; ++i)
                        for (long long j = 0; j < out_rg.w; ++j)
                            out.at(n, c, i, j) = static_cast<float>(
                                (in.get(n, c, i, j) - st.mean[s]) * st.inv_std[s]);
                }
            break;
        }
        case OpKind::silu: {
            for (std::size_t k = 0; k < in.data.size(); ++k) {
                out.data[k] = silu_value(in.data[k]);
            }
            break;
        }
        case OpKind::elementwise_add: {
            const Tensor& rhs = fetch(env, node.inputs[1]);
            for (long long n = 0; n < out.n; ++n)
                for (long long c = 0; c < out.c; ++c)
                    for (long long i = 0; i < out_rg.h; ++i)
                        for (long long j = 0; j < out_rg.w; ++j)
                            out.at(n, c, i, j) =
                                in.get(n, c, i, j) + rhs.data[flat(rhs.dims, n, c,
                                                                   out_rg.r0 + i,
                                                                   out_rg.c0 + j)];
            break;
        }
        case OpKind::matmul:
            throw PlanError("matmul cannot execute inside a tiled chain");
    }
    return out;
}

void group_tiled(const OpGraph& graph, const FusionGroup& group, TensorMap& env) {
    const detail::Chain chain = detail::chain_view(graph, group.node_ids);

    // Untiled fallback: 2D singletons and groups the planner marked
    // infeasible run op-at-a-time.
    if (group.tile_h < 1 || !detail::is_spatial(*chain.output) || !group.tile_feasible) {
        TensorMap scratch = env;
        for (const OpNode* op : chain.ops) op_full(graph, *op, scratch);
        for (const OpNode* op : chain.ops) {
            bool external = graph.consumers(op->output).empty();
            for (const std::string& consumer : graph.consumers(op->output)) {
                if (std::find(group.node_ids.begin(), group.node_ids.end(), consumer) ==
                    group.node_ids.end()) {
                    external = true;
                }
            }
            if (external) env[op->output] = std::move(scratch[op->output]);
        }
        return;
    }

    // Tiled execution keeps intermediates on chip, so none may be consumed
    // outside the group.
    for (std::size_t i = 0; i + 1 < chain.ops.size(); ++i) {
        for (const std::string& consumer : graph.consumers(chain.ops[i]->output)) {
            if (std::find(group.node_ids.begin(), group.node_ids.end(), consumer) ==
                group.node_ids.end()) {
                throw PlanError("intermediate " + chain.ops[i]->output +
                                " escapes fused group");
            }
        }
    }

    // Statistics pre-pass: run the chain once at full extent, recording each
    // group_norm's input statistics.
    std::map<std::string, GnStats> stats;
    {
        TensorMap scratch = env;
        for (const OpNode* op : chain.ops) {
            if (op->kind == OpKind::group_norm) {
                stats[op->id] = gn_stats(fetch(scratch, op->inputs[0]), op->gn_groups);
            }
            op_full(graph, *op, scratch);
        }
    }

    const TensorSpec& out_spec = *chain.output;
    Tensor out = Tensor::zeros(out_spec.dims);
    const long long out_h = out_spec.dims[2];
    const long long out_w = out_spec.dims[3];
    const std::size_t k = chain.ops.size();

    for (long long r = 0; r < out_h; r += group.tile_h) {
        for (long long c = 0; c < out_w; c += group.tile_w) {
            // Backward region walk: out_rg[i] is op i's output window.
            std::vector<Region> out_rg(k);
            out_rg[k - 1] = {r, c, std::min(group.tile_h, out_h - r),
                             std::min(group.tile_w, out_w - c)};
            for (std::size_t i = k - 1; i > 0; --i) {
                const OpNode* op = chain.ops[i];
                const TensorSpec& op_in = graph.tensor(op->inputs[0]);
                out_rg[i - 1] =
                    detail::input_region(op->kind, out_rg[i], op_in.dims[2], op_in.dims[3]);
            }
            const TensorSpec& first_in = graph.tensor(chain.ops[0]->inputs[0]);
            const Region in_rg = detail::input_region(chain.ops[0]->kind, out_rg[0],
                                                      first_in.dims[2], first_in.dims[3]);

            RegBuf buf = extract(fetch(env, chain.ops[0]->inputs[0]), in_rg);
            for (std::size_t i = 0; i < k; ++i) {
                buf = apply_region(graph, *chain.ops[i], buf, out_rg[i], env, stats);
            }
            for (long long n = 0; n < out.dims[0]; ++n)
                for (long long cc = 0; cc < out.dims[1]; ++cc)
                    for (long long i = 0; i < buf.rg.h; ++i)
                        for (long long j = 0; j < buf.rg.w; ++j)
                            out.data[flat(out.dims, n, cc, buf.rg.r0 + i, buf.rg.c0 + j)] =
                                buf.get(n, cc, i, j);
        }
    }
    env[chain.ops.back()->output] = std::move(out);
}

}  // namespace

long long Tensor::count() const {
    long long n = 1;
    for (long long d : dims) n *= d;
    return n;
}

Tensor Tensor::zeros(std::vector<long long> dims) {
    Tensor t;
    t.dims = std::move(dims);
    t.data.assign(static_cast<std::size_t>(t.count()), 0.0f);
    return t;
}

Tensor random_tensor(const std::vector<long long>& dims, Rng& rng) {
    Tensor t = Tensor::zeros(dims);
    for (float& v : t.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return t;
}

TensorMap execute_reference(const OpGraph& graph, const TensorMap& inputs,
                            const FusionPlan* plan) {
    for (const auto& [id, t] : inputs) {
        const TensorSpec& spec = graph.tensor(id);
        if (t.dims != spec.dims) throw GraphError("executor: dims mismatch for input " + id);
        if (spec.dims.size() == 4 && (spec.dims[2] > 128 || spec.dims[3] > 128)) {
            throw GraphError("executor: spatial extents above desk scale for " + id);
        }
    }
    TensorMap env = inputs;
    std::set<std::string> produced;
    if (!plan) {
        for (const OpNode& n : graph.nodes) {
            op_full(graph, n, env);
            produced.insert(n.output);
        }
    } else {
        std::size_t covered = 0;
        for (const FusionGroup& g : plan->groups) covered += g.node_ids.size();
        if (covered != graph.nodes.size()) {
            throw PlanError("plan does not cover every node exactly once");
        }
        for (const FusionGroup& g : plan->groups) {
            group_tiled(graph, g, env);
            for (const std::string& id : g.node_ids) {
                const std::string& out = graph.node(id).output;
                if (env.count(out)) produced.insert(out);
            }
        }
    }
    TensorMap result;
    for (const std::string& id : produced) result[id] = std::move(env[id]);
    return result;
}

EquivalenceReport check_equivalence(const OpGraph& graph, const TensorMap& inputs,
                                    const FusionPlan& plan, double rel_tol) {
    const TensorMap oracle = execute_reference(graph, inputs, nullptr);
    const TensorMap fused = execute_reference(graph, inputs, &plan);
    EquivalenceReport report;
    for (const auto& [id, t] : fused) {
        const Tensor& ref = oracle.at(id);
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            const double a = t.data[i];
            const double b = ref.data[i];
            const double scale = std::max({std::fabs(a), std::fabs(b), 1e-6});
            const double rel = std::fabs(a - b) / scale;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_tensor = id;
                report.worst_index = static_cast<long long>(i);
            }
        }
    }
    report.ok = report.max_rel_err <= rel_tol;
    return report;
}

}  // namespace framepipe
