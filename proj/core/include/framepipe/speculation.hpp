#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framepipe/simulator.hpp"
#include "framepipe/trace.hpp"

namespace framepipe {

enum class PredictorKind { markov, scripted_bernoulli, oracle, anti_oracle };

PredictorKind predictor_from_string(const std::string& name);  // "markov:2" etc.
int predictor_order_from_string(const std::string& name);

struct SpecConfig {
    PredictorKind predictor = PredictorKind::markov;
    int order = 1;        // markov context length
    double p_hit = 0.0;   // scripted_bernoulli
    double t_overhead_ms = 0.1;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

// Order-k frequency model over the observed prefix. Prediction is the most
// frequent continuation of the current context; unseen context -> repeat the
// last action; empty history -> the alphabet's first token; ties -> the
// lexicographically smallest continuation.
class MarkovPredictor {
  public:
    MarkovPredictor(int order, std::vector<std::string> alphabet);

    std::string predict() const;
    void observe(const std::string& action);
    int order() const { return order_; }

  private:
    int order_;
    std::vector<std::string> alphabet_;
    std::vector<std::string> history_;  // at most order_ tokens
    std::map<std::vector<std::string>, std::map<std::string, long long>> counts_;
    std::optional<std::string> last_;
};

// Eq-style closed form: p*t_overhead + (1-p)*(t_sys + t_overhead).
double amortized_latency(double p_hit, double t_sys_ms, double t_overhead_ms);

// Fraction of frames after the first whose next action the predictor gets
// right. Throws InsufficientDataError for traces shorter than 2.
double hit_rate(MarkovPredictor predictor, const ActionTrace& trace);

struct SpecReport {
    long long frames = 0;
    long long hits = 0;
    double hit_rate = 0.0;
    double mean_latency_ms = 0.0;
    double p50_latency_ms = 0.0;
    double p99_latency_ms = 0.0;
    double amortized_model_ms = 0.0;  // closed form at the measured hit rate
    double t_sys_ms = 0.0;
    double t_overhead_ms = 0.0;
    std::vector<double> latencies_ms;  // per evaluated frame
};

// Constant-t_sys evaluation: each frame costs t_overhead on a hit and
// t_sys + t_overhead on a miss (flush and regenerate). `frames` overrides
// the trace-derived count; required for trace-free predictors.
SpecReport speculative_eval(const SpecConfig& cfg, const ActionTrace& trace, double t_sys_ms,
                            long long frames = 0);

// Simulator-backed variant: a missed frame pays its own pipeline latency.
// Fills per-record speculative_hit flags; `stats` (optional) receives the
// effective-latency summary.
SimReport speculative_run(const SimConfig& sim, const SpecConfig& cfg, const ActionTrace& trace,
                          SpecReport* stats = nullptr);

}  // namespace framepipe
