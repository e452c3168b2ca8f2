#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "framepipe/perfmodel.hpp"
#include "framepipe/reports.hpp"
#include "framepipe/simulator.hpp"

namespace framepipe {

// Single-card measurements the stage ladder is anchored to.
struct FusionCalibration {
    std::optional<double> baseline_latency_ms;  // sequential end-to-end, unfused decoder
    std::optional<double> t_vae_baseline_ms;    // unfused decode
    std::optional<double> t_vae_fused_ms;       // fused decode
    std::optional<double> t_dit_single_ms;      // single-device generator step
};

struct SpeculationScenario {
    double p_hit = 0.93;
    double t_overhead_ms = 0.1;
    double t_sys_ms = 38.0;
};

// Ladder stages, in order. "baseline" is always first; the rest must form a
// contiguous prefix of the full ladder.
extern const std::vector<std::string> kLadderStages;

struct ScenarioConfig {
    HardwareProfile hardware;
    WorkloadProfile workload;
    int devices = 8;
    int min_dit = 2;
    std::optional<std::pair<int, int>> allocation;  // override for the ratio stage
    std::pair<int, int> heuristic_split{3, 5};
    std::vector<std::string> stages = kLadderStages;
    FusionCalibration fusion;
    double skip_rate = 0.35;
    SpeculationScenario speculation;
    std::string trace_path;  // optional

    void validate() const;  // throws ConfigError
};

ScenarioConfig parse_scenario(const std::string& text, const std::string& source);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& config);

SimConfig parse_sim_config(const std::string& text, const std::string& source);
SimConfig load_sim_config(const std::string& path);
std::string sim_config_to_json(const SimConfig& config);

// {"samples": [{"n_d": 2, "t_ms": 63.8}, ...]}
std::vector<FitSample> parse_fit_samples(const std::string& text, const std::string& source);
std::vector<FitSample> load_fit_samples(const std::string& path);

// Profile files carry just the hardware/workload pair.
std::pair<HardwareProfile, WorkloadProfile> parse_profile(const std::string& text,
                                                          const std::string& source);
std::pair<HardwareProfile, WorkloadProfile> load_profile(const std::string& path);
std::string profile_to_json(const HardwareProfile& hw, const WorkloadProfile& wl);

// Cumulative stage ladder: each row keeps every earlier optimization enabled.
// Speedups are against the first row's throughput. Throws ConfigError naming
// every calibration constant a requested stage needs but the config lacks.
AblationReport run_ablation(const ScenarioConfig& config);

}  // namespace framepipe
