#include "framepipe/extrapolation.hpp"

#include <cmath>
#include <limits>

#include "framepipe/errors.hpp"

namespace framepipe {

namespace {

void check_dim(const Vec& v, std::size_t dim, const char* what) {
    if (v.size() != dim) {
        throw ConfigError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(v.size()) + " vs " + std::to_string(dim) + ")");
    }
}

double norm2(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

const Vec& embed(const std::map<std::string, Vec>& embedding, const std::string& action) {
    auto it = embedding.find(action);
    if (it == embedding.end()) throw UnknownActionError("unknown action token: " + action);
    return it->second;
}

}  // namespace

void DynamicsOracle::validate(std::size_t dim) const {
    switch (kind) {
        case DynamicsKind::constant_velocity:
            check_dim(drift, dim, "dynamics.drift");
            break;
        case DynamicsKind::linear: {
            if (a_matrix.size() != dim) {
                throw ConfigError("dynamics.a_matrix must have one row per latent dim");
            }
            for (const Vec& row : a_matrix) check_dim(row, dim, "dynamics.a_matrix row");
            if (b_matrix.size() != dim) {
                throw ConfigError("dynamics.b_matrix must have one row per latent dim");
            }
            break;
        }
        case DynamicsKind::scripted:
            if (table.empty()) throw ConfigError("dynamics.table must be non-empty");
            for (const Vec& row : table) check_dim(row, dim, "dynamics.table row");
            break;
    }
}

Vec DynamicsOracle::next(const Vec& z, const Vec* action_embedding, long long t) const {
    switch (kind) {
        case DynamicsKind::constant_velocity: {
            Vec out = z;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += drift[i];
            return out;
        }
        case DynamicsKind::linear: {
            Vec out(z.size(), 0.0);
            for (std::size_t i = 0; i < z.size(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < z.size(); ++j) acc += a_matrix[i][j] * z[j];
                if (action_embedding) {
                    const Vec& row = b_matrix[i];
                    std::size_t e = std::min(row.size(), action_embedding->size());
                    for (std::size_t j = 0; j < e; ++j) acc += row[j] * (*action_embedding)[j];
                }
                out[i] = acc;
            }
            return out;
        }
        case DynamicsKind::scripted: {
            std::size_t idx = static_cast<std::size_t>(
                std::min<long long>(t, static_cast<long long>(table.size()) - 1));
            return table[idx];
        }
    }
    return z;
}

void ExtrapConfig::validate() const {
    if (tau < 0.0 || !std::isfinite(tau)) throw ConfigError("extrapolation: tau must be >= 0");
    if (!(lam > 0.0) || lam > 2.0) throw ConfigError("extrapolation: lambda must be in (0, 2]");
    std::size_t dim = 0;
    for (const auto& [token, vec] : embedding) {
        if (vec.empty()) throw ConfigError("extrapolation: empty embedding for " + token);
        if (dim == 0) dim = vec.size();
        check_dim(vec, dim, "embedding vector");
        for (double x : vec) {
            if (!std::isfinite(x)) {
                throw ConfigError("extrapolation: non-finite embedding for " + token);
            }
        }
    }
}

std::map<std::string, Vec> one_hot_embedding(const std::vector<std::string>& alphabet) {
    std::map<std::string, Vec> out;
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        Vec e(alphabet.size(), 0.0);
        e[i] = 1.0;
        out[alphabet[i]] = std::move(e);
    }
    if (out.size() != alphabet.size()) {
        throw ConfigError("one_hot_embedding: duplicate alphabet tokens");
    }
    return out;
}

double action_divergence(const std::string& a_t, const std::string& a_prev,
                         const std::map<std::string, Vec>& embedding) {
    const Vec& ea = embed(embedding, a_t);
    const Vec& eb = embed(embedding, a_prev);
    if (ea.size() != eb.size()) throw ConfigError("embedding vectors disagree in dimension");
    return norm2(ea, eb);
}

double min_pairwise_embedding_distance(const std::map<std::string, Vec>& embedding) {
    if (embedding.size() < 2) {
        throw ConfigError("min pairwise distance needs at least 2 embeddings");
    }
    double best = std::numeric_limits<double>::infinity();
    for (auto i = embedding.begin(); i != embedding.end(); ++i) {
        for (auto j = std::next(i); j != embedding.end(); ++j) {
            best = std::min(best, norm2(i->second, j->second));
        }
    }
    return best;
}

double auto_tau(const std::map<std::string, Vec>& embedding) {
    return 0.5 * min_pairwise_embedding_distance(embedding);
}

StepResult step(const LatentState& state, const std::string& a_t,
                const std::optional<std::string>& a_prev, const ExtrapConfig& config) {
    config.validate();
    if (state.v && state.v->size() != state.z.size()) {
        throw ConfigError("latent state: v/z dimension mismatch");
    }

    bool can_extrapolate = false;
    if (a_prev && state.v) {
        can_extrapolate = action_divergence(a_t, *a_prev, config.embedding) < config.tau;
    }

    StepResult result;
    result.state = state;
    result.state.t = state.t + 1;
    if (can_extrapolate) {
        result.decision = Decision::hit;
        Vec& z = result.state.z;
        const Vec& v = *state.v;
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += config.lam * v[i];
        if (config.update_v_on_hit) {
            Vec nv(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) nv[i] = z[i] - state.z[i];
            result.state.v = std::move(nv);
        }
        return result;
    }

    result.decision = Decision::miss;
    config.dynamics.validate(state.z.size());
    const Vec* e_a = nullptr;
    if (config.dynamics.kind == DynamicsKind::linear) {
        e_a = &embed(config.embedding, a_t);
    }
    Vec z_new = config.dynamics.next(state.z, e_a, state.t);
    result.state.full_inferences = state.full_inferences + 1;
    if (result.state.full_inferences >= 2) {
        Vec nv(z_new.size());
        for (std::size_t i = 0; i < z_new.size(); ++i) nv[i] = z_new[i] - state.z[i];
        result.state.v = std::move(nv);
    }
    result.state.z = std::move(z_new);
    return result;
}

TraceRunResult run_trace(const Vec& initial_z, const ActionTrace& trace,
                         const ExtrapConfig& config) {
    if (trace.empty()) throw ConfigError("run_trace: trace must be non-empty");
    config.validate();

    TraceRunResult out;
    out.trajectory.reserve(trace.size());
    out.decisions.reserve(trace.size());
    out.errors.reserve(trace.size());

    LatentState state;
    state.z = initial_z;
    Vec oracle_z = initial_z;

    std::optional<std::string> prev_action;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const std::string& action = trace.records[i].action;
        StepResult r = step(state, action, prev_action, config);
        state = std::move(r.state);
        if (r.decision == Decision::hit) ++out.hits;
        out.decisions.push_back(r.decision);
        out.trajectory.push_back(state.z);

        const Vec* e_a = nullptr;
        if (config.dynamics.kind == DynamicsKind::linear) {
            e_a = &embed(config.embedding, action);
        }
        oracle_z = config.dynamics.next(oracle_z, e_a, static_cast<long long>(i));
        out.errors.push_back(norm2(state.z, oracle_z));
        prev_action = action;
    }
    out.skip_rate = static_cast<double>(out.hits) / static_cast<double>(trace.size());
    return out;
}

double throughput_with_skip(double t_dit_interval_ms, double t_vae_ms, int n_vae,
                            double skip_rate) {
    if (skip_rate < 0.0 || skip_rate >= 1.0) {
        throw ConfigError("throughput_with_skip: skip_rate must be in [0, 1)");
    }
    if (n_vae < 1) throw ConfigError("throughput_with_skip: n_vae must be >= 1");
    if (t_dit_interval_ms < 0.0 || t_vae_ms < 0.0) {
        throw ConfigError("throughput_with_skip: durations must be >= 0");
    }
    double interval = std::max((1.0 - skip_rate) * t_dit_interval_ms,
                               t_vae_ms / static_cast<double>(n_vae));
    if (interval <= 0.0) throw ConfigError("throughput_with_skip: zero interval");
    return 1000.0 / interval;
}

}  // namespace framepipe
