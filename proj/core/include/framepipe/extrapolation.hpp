#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framepipe/trace.hpp"

namespace framepipe {

using Vec = std::vector<double>;

struct LatentState {
    Vec z;
    std::optional<Vec> v;  // None until the second full inference
    long long t = 0;
    long long full_inferences = 0;
};

enum class DynamicsKind { constant_velocity, linear, scripted };

// Synthetic stand-in for the generator: produces the "true" next latent.
struct DynamicsOracle {
    DynamicsKind kind = DynamicsKind::constant_velocity;
    Vec drift;                    // constant_velocity: z' = z + drift
    std::vector<Vec> a_matrix;    // linear: z' = A z + B e(action); rows of A
    std::vector<Vec> b_matrix;    // rows of B (d x e)
    std::vector<Vec> table;       // scripted: z_t = table[min(t, last)]

    void validate(std::size_t dim) const;  // throws ConfigError
    Vec next(const Vec& z, const Vec* action_embedding, long long t) const;
};

struct ExtrapConfig {
    double tau = 0.0;
    double lam = 1.0;
    std::map<std::string, Vec> embedding;
    DynamicsOracle dynamics;
    bool update_v_on_hit = false;

    void validate() const;  // throws ConfigError
};

enum class Decision { hit, miss };

std::map<std::string, Vec> one_hot_embedding(const std::vector<std::string>& alphabet);

// Euclidean distance between the two action embeddings.
double action_divergence(const std::string& a_t, const std::string& a_prev,
                         const std::map<std::string, Vec>& embedding);

double min_pairwise_embedding_distance(const std::map<std::string, Vec>& embedding);

// Half the minimum pairwise distance: any actual action change then exceeds
// the threshold by construction.
double auto_tau(const std::map<std::string, Vec>& embedding);

struct StepResult {
    LatentState state;  // state.z is the emitted frame latent
    Decision decision = Decision::miss;
};

// One frame: extrapolate z + lam*v when the action diverges less than tau and
// v is primed; otherwise full inference via the oracle, which also refreshes
// v (from the second inference onward).
StepResult step(const LatentState& state, const std::string& a_t,
                const std::optional<std::string>& a_prev, const ExtrapConfig& config);

struct TraceRunResult {
    std::vector<Vec> trajectory;
    std::vector<Decision> decisions;
    std::vector<double> errors;  // per frame, vs. the oracle-every-frame path
    long long hits = 0;
    double skip_rate = 0.0;
};

TraceRunResult run_trace(const Vec& initial_z, const ActionTrace& trace,
                         const ExtrapConfig& config);

// Skipped frames bypass the generator but still decode:
// fps = 1000 / max((1-skip_rate)*t_dit_interval, t_vae/n_vae).
double throughput_with_skip(double t_dit_interval_ms, double t_vae_ms, int n_vae,
                            double skip_rate);

}  // namespace framepipe
