#include "framepipe/scenario.hpp"

#include <charconv>
#include <cmath>

#include "framepipe/allocator.hpp"
#include "framepipe/errors.hpp"
#include "framepipe/extrapolation.hpp"
#include "framepipe/jsonio.hpp"
#include "framepipe/speculation.hpp"
#include "json_util.hpp"

namespace framepipe {

using detail::fail_field;
using detail::ObjectView;
using detail::parse_json_strict;
using nlohmann::json;

const std::vector<std::string> kLadderStages = {"baseline",      "fusion",
                                                "parallel",      "ratio",
                                                "extrapolation", "speculation"};

namespace {

HardwareProfile parse_hardware(const json& j, const std::string& path) {
    ObjectView v(j, path);
    HardwareProfile hw;
    hw.pi_peak = v.num("pi_peak");
    hw.bw_hbm = v.num("bw_hbm");
    hw.b_link = v.num("b_link");
    hw.s_sram = v.num("s_sram");
    hw.eta_util = v.num_or("eta_util", 1.0);
    hw.eta_eff = v.num_or("eta_eff", 1.0);
    v.finish();
    return hw;
}

WorkloadProfile parse_workload(const json& j, const std::string& path) {
    ObjectView v(j, path);
    WorkloadProfile wl;
    wl.w_dit = v.num_or("w_dit", 0.0);
    wl.d_attn = v.num_or("d_attn", 0.0);
    wl.m_vae = v.num_or("m_vae", 0.0);
    wl.h_heads = static_cast<int>(v.integer("h_heads"));
    wl.alpha_ms = v.num_opt("alpha_ms");
    wl.beta_ms = v.num_opt("beta_ms");
    if (const json* pd = v.child_opt("profiled_dit")) {
        if (!pd->is_object()) fail_field(v.key_path("profiled_dit"), "expected an object");
        for (auto it = pd->begin(); it != pd->end(); ++it) {
            const std::string& key = it.key();
            int n = 0;
            auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), n);
            if (ec != std::errc{} || ptr != key.data() + key.size()) {
                fail_field(v.key_path("profiled_dit"),
                           "keys must be device counts, got '" + key + "'");
            }
            if (!it.value().is_number()) {
                fail_field(v.key_path("profiled_dit") + "." + key, "expected a number");
            }
            wl.profiled_dit[n] = it.value().get<double>();
        }
    }
    wl.t_vae_single_ms = v.num_opt("t_vae_single_ms");
    v.finish();
    return wl;
}

std::pair<int, int> parse_split(const json& j, const std::string& path) {
    ObjectView v(j, path);
    auto split = std::make_pair(static_cast<int>(v.integer("n_dit")),
                                static_cast<int>(v.integer("n_vae")));
    v.finish();
    return split;
}

json hardware_json(const HardwareProfile& hw) {
    json j;
    j["pi_peak"] = hw.pi_peak;
    j["bw_hbm"] = hw.bw_hbm;
    j["b_link"] = hw.b_link;
    j["s_sram"] = hw.s_sram;
    j["eta_util"] = hw.eta_util;
    j["eta_eff"] = hw.eta_eff;
    return j;
}

json workload_json(const WorkloadProfile& wl) {
    json j;
    j["w_dit"] = wl.w_dit;
    j["d_attn"] = wl.d_attn;
    j["m_vae"] = wl.m_vae;
    j["h_heads"] = wl.h_heads;
    if (wl.alpha_ms) j["alpha_ms"] = *wl.alpha_ms;
    if (wl.beta_ms) j["beta_ms"] = *wl.beta_ms;
    if (!wl.profiled_dit.empty()) {
        json pd = json::object();
        for (const auto& [n, ms] : wl.profiled_dit) pd[std::to_string(n)] = ms;
        j["profiled_dit"] = std::move(pd);
    }
    if (wl.t_vae_single_ms) j["t_vae_single_ms"] = *wl.t_vae_single_ms;
    return j;
}

json split_json(const std::pair<int, int>& split) {
    return json{{"n_dit", split.first}, {"n_vae", split.second}};
}

std::string arch_name(int n_dit, int n_vae) {
    return std::to_string(n_dit) + " DiT + " + std::to_string(n_vae) + " VAE";
}

}  // namespace

void ScenarioConfig::validate() const {
    hardware.validate();
    workload.validate();
    if (devices < 2) throw ConfigError("devices must be >= 2");
    if (min_dit < 1 || min_dit >= devices) {
        throw ConfigError("min_dit must be in [1, devices - 1]");
    }
    auto check_split = [&](const std::pair<int, int>& s, const char* name) {
        if (s.first < 1 || s.second < 1 || s.first + s.second != devices) {
            throw ConfigError(std::string(name) + " must assign every device");
        }
        if (workload.h_heads % s.first != 0) {
            throw ConfigError(std::string(name) + ": h_heads must divide evenly across " +
                              std::to_string(s.first) + " devices");
        }
    };
    check_split(heuristic_split, "heuristic_split");
    if (allocation) check_split(*allocation, "allocation");
    if (stages.empty() || stages.size() > kLadderStages.size()) {
        throw ConfigError("stages must be a non-empty ladder prefix");
    }
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (stages[i] != kLadderStages[i]) {
            throw ConfigError("stages must be a contiguous ladder prefix starting at 'baseline'; got '" +
                              stages[i] + "' at position " + std::to_string(i));
        }
    }
    if (skip_rate < 0.0 || skip_rate >= 1.0) throw ConfigError("skip_rate must be in [0, 1)");
    if (speculation.p_hit < 0.0 || speculation.p_hit > 1.0) {
        throw ConfigError("speculation.p_hit must be in [0, 1]");
    }
    if (speculation.t_overhead_ms < 0.0 || speculation.t_sys_ms < 0.0) {
        throw ConfigError("speculation times must be non-negative");
    }
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
    json doc = parse_json_strict(text, source);
    ObjectView root(doc, source);
    ScenarioConfig cfg;
    cfg.hardware = parse_hardware(root.child("hardware"), root.key_path("hardware"));
    cfg.workload = parse_workload(root.child("workload"), root.key_path("workload"));
    cfg.devices = static_cast<int>(root.integer_or("devices", 8));
    cfg.min_dit = static_cast<int>(root.integer_or("min_dit", 2));
    if (root.has("allocation")) {
        cfg.allocation = parse_split(root.child("allocation"), root.key_path("allocation"));
    }
    if (root.has("heuristic_split")) {
        cfg.heuristic_split =
            parse_split(root.child("heuristic_split"), root.key_path("heuristic_split"));
    }
    if (root.has("stages")) cfg.stages = root.str_list("stages");
    if (root.has("fusion_calibration")) {
        ObjectView fv(root.child("fusion_calibration"), root.key_path("fusion_calibration"));
        cfg.fusion.baseline_latency_ms = fv.num_opt("baseline_latency_ms");
        cfg.fusion.t_vae_baseline_ms = fv.num_opt("t_vae_baseline_ms");
        cfg.fusion.t_vae_fused_ms = fv.num_opt("t_vae_fused_ms");
        cfg.fusion.t_dit_single_ms = fv.num_opt("t_dit_single_ms");
        fv.finish();
    }
    if (root.has("extrapolation")) {
        ObjectView ev(root.child("extrapolation"), root.key_path("extrapolation"));
        cfg.skip_rate = ev.num_or("skip_rate", cfg.skip_rate);
        ev.finish();
    }
    if (root.has("speculation")) {
        ObjectView sv(root.child("speculation"), root.key_path("speculation"));
        cfg.speculation.p_hit = sv.num_or("p_hit", cfg.speculation.p_hit);
        cfg.speculation.t_overhead_ms = sv.num_or("t_overhead_ms", cfg.speculation.t_overhead_ms);
        cfg.speculation.t_sys_ms = sv.num_or("t_sys_ms", cfg.speculation.t_sys_ms);
        sv.finish();
    }
    cfg.trace_path = root.str_or("trace", "");
    root.finish();
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    return parse_scenario(read_text_file(path), path);
}

std::string scenario_to_json(const ScenarioConfig& config) {
    json j;
    j["hardware"] = hardware_json(config.hardware);
    j["workload"] = workload_json(config.workload);
    j["devices"] = config.devices;
    j["min_dit"] = config.min_dit;
    if (config.allocation) j["allocation"] = split_json(*config.allocation);
    j["heuristic_split"] = split_json(config.heuristic_split);
    j["stages"] = config.stages;
    json fusion = json::object();
    if (config.fusion.baseline_latency_ms) fusion["baseline_latency_ms"] = *config.fusion.baseline_latency_ms;
    if (config.fusion.t_vae_baseline_ms) fusion["t_vae_baseline_ms"] = *config.fusion.t_vae_baseline_ms;
    if (config.fusion.t_vae_fused_ms) fusion["t_vae_fused_ms"] = *config.fusion.t_vae_fused_ms;
    if (config.fusion.t_dit_single_ms) fusion["t_dit_single_ms"] = *config.fusion.t_dit_single_ms;
    j["fusion_calibration"] = std::move(fusion);
    j["extrapolation"] = json{{"skip_rate", config.skip_rate}};
    j["speculation"] = json{{"p_hit", config.speculation.p_hit},
                            {"t_overhead_ms", config.speculation.t_overhead_ms},
                            {"t_sys_ms", config.speculation.t_sys_ms}};
    if (!config.trace_path.empty()) j["trace"] = config.trace_path;
    return j.dump(2) + "\n";
}

SimConfig parse_sim_config(const std::string& text, const std::string& source) {
    json doc = parse_json_strict(text, source);
    ObjectView root(doc, source);
    SimConfig cfg;
    cfg.n_dit = static_cast<int>(root.integer_or("n_dit", 1));
    cfg.n_vae = static_cast<int>(root.integer_or("n_vae", 1));
    cfg.t_dit_ms = root.num("t_dit_ms");
    cfg.t_vae_ms = root.num("t_vae_ms");
    std::string vae_mode = root.str_or("vae_mode", "round_robin");
    if (vae_mode == "round_robin") {
        cfg.vae_mode = VaeDispatch::round_robin;
    } else if (vae_mode == "spatial") {
        cfg.vae_mode = VaeDispatch::spatial;
    } else {
        fail_field(root.key_path("vae_mode"), "expected 'round_robin' or 'spatial'");
    }
    std::string arrival = root.str_or("arrival", "saturated");
    if (arrival == "saturated") {
        cfg.arrival = ArrivalMode::saturated;
    } else if (arrival == "timed") {
        cfg.arrival = ArrivalMode::timed;
    } else {
        fail_field(root.key_path("arrival"), "expected 'saturated' or 'timed'");
    }
    cfg.transfer_overhead_ms = root.num_or("transfer_overhead_ms", 0.0);
    cfg.horizon_frames = root.integer_or("horizon_frames", 0);
    if (root.has("skip")) {
        ObjectView sv(root.child("skip"), root.key_path("skip"));
        SkipPolicy skip;
        skip.skip_rate = sv.num("skip_rate");
        skip.seed = static_cast<std::uint64_t>(sv.integer_or("seed", 0));
        sv.finish();
        cfg.skip = skip;
    }
    root.finish();
    cfg.validate();
    return cfg;
}

SimConfig load_sim_config(const std::string& path) {
    return parse_sim_config(read_text_file(path), path);
}

std::string sim_config_to_json(const SimConfig& config) {
    json j;
    j["n_dit"] = config.n_dit;
    j["n_vae"] = config.n_vae;
    j["t_dit_ms"] = config.t_dit_ms;
    j["t_vae_ms"] = config.t_vae_ms;
    j["vae_mode"] = config.vae_mode == VaeDispatch::spatial ? "spatial" : "round_robin";
    j["arrival"] = config.arrival == ArrivalMode::timed ? "timed" : "saturated";
    j["transfer_overhead_ms"] = config.transfer_overhead_ms;
    j["horizon_frames"] = config.horizon_frames;
    if (config.skip) {
        j["skip"] = json{{"skip_rate", config.skip->skip_rate},
                         {"seed", config.skip->seed}};
    }
    return j.dump(2) + "\n";
}

std::vector<FitSample> parse_fit_samples(const std::string& text, const std::string& source) {
    json doc = parse_json_strict(text, source);
    ObjectView root(doc, source);
    const json& arr = root.child("samples");
    if (!arr.is_array()) fail_field(root.key_path("samples"), "expected an array");
    std::vector<FitSample> samples;
    long long idx = 0;
    for (const auto& sj : arr) {
        ObjectView sv(sj, root.key_path("samples") + "[" + std::to_string(idx) + "]");
        FitSample s;
        s.n_d = static_cast<int>(sv.integer("n_d"));
        s.measured_ms = sv.num("t_ms");
        sv.finish();
        samples.push_back(s);
        ++idx;
    }
    root.finish();
    return samples;
}

std::vector<FitSample> load_fit_samples(const std::string& path) {
    return parse_fit_samples(read_text_file(path), path);
}

std::pair<HardwareProfile, WorkloadProfile> parse_profile(const std::string& text,
                                                          const std::string& source) {
    json doc = parse_json_strict(text, source);
    ObjectView root(doc, source);
    HardwareProfile hw = parse_hardware(root.child("hardware"), root.key_path("hardware"));
    WorkloadProfile wl = parse_workload(root.child("workload"), root.key_path("workload"));
    root.finish();
    hw.validate();
    wl.validate();
    return {hw, wl};
}

std::pair<HardwareProfile, WorkloadProfile> load_profile(const std::string& path) {
    return parse_profile(read_text_file(path), path);
}

std::string profile_to_json(const HardwareProfile& hw, const WorkloadProfile& wl) {
    json j;
    j["hardware"] = hardware_json(hw);
    j["workload"] = workload_json(wl);
    return j.dump(2) + "\n";
}

AblationReport run_ablation(const ScenarioConfig& config) {
    config.validate();

    std::vector<std::string> missing;
    auto need = [&](const std::optional<double>& field, const char* name) {
        if (field) return;
        std::string full = std::string("fusion_calibration.") + name;
        for (const std::string& m : missing)
            if (m == full) return;
        missing.push_back(std::move(full));
    };
    auto enabled = [&](const std::string& stage) {
        for (const std::string& s : config.stages)
            if (s == stage) return true;
        return false;
    };
    if (enabled("baseline")) need(config.fusion.baseline_latency_ms, "baseline_latency_ms");
    if (enabled("fusion")) {
        need(config.fusion.t_dit_single_ms, "t_dit_single_ms");
        need(config.fusion.t_vae_fused_ms, "t_vae_fused_ms");
    }
    if (enabled("parallel")) need(config.fusion.t_vae_fused_ms, "t_vae_fused_ms");
    if ((enabled("parallel") || enabled("ratio")) && config.workload.profiled_dit.empty() &&
        !config.workload.alpha_ms && config.workload.w_dit <= 0.0) {
        missing.push_back("workload.profiled_dit (or alpha_ms/beta_ms, or w_dit)");
    }
    if (!missing.empty()) {
        std::string msg = "ablation needs calibration constants: ";
        for (std::size_t i = 0; i < missing.size(); ++i) {
            if (i) msg += ", ";
            msg += missing[i];
        }
        throw ConfigError(msg);
    }

    // From the fusion stage on, the decoder runs fused; the parallel stages
    // inherit that decode time.
    WorkloadProfile wl = config.workload;
    if (config.fusion.t_vae_fused_ms) wl.t_vae_single_ms = *config.fusion.t_vae_fused_ms;
    EvalModes modes;
    modes.dit = wl.profiled_dit.empty() ? DitMode::analytic : DitMode::profiled;
    modes.vae = wl.t_vae_single_ms ? VaeMode::profiled_interval : VaeMode::analytic;

    AblationReport report;
    auto push = [&](const std::string& stage, const std::string& arch, double metric_ms,
                    MetricKind kind, double fps_value) {
        AblationRow row;
        row.stage = stage;
        row.architecture = arch;
        row.metric_ms = metric_ms;
        row.metric_kind = kind;
        row.fps = fps_value;
        report.rows.push_back(std::move(row));
    };

    double ratio_t_dit = 0.0;
    int ratio_n_vae = 1;
    std::string ratio_arch;
    double last_fps = 0.0;

    for (const std::string& stage : config.stages) {
        if (stage == "baseline") {
            double latency = *config.fusion.baseline_latency_ms;
            last_fps = 1000.0 / latency;
            push(stage, "1 device", latency, MetricKind::latency, last_fps);
        } else if (stage == "fusion") {
            double latency = *config.fusion.t_dit_single_ms + *config.fusion.t_vae_fused_ms;
            last_fps = 1000.0 / latency;
            push(stage, "1 device", latency, MetricKind::latency, last_fps);
        } else if (stage == "parallel") {
            auto [n_d, n_v] = config.heuristic_split;
            FpsResult r = fps(config.hardware, wl, n_d, n_v, modes);
            last_fps = r.fps;
            push(stage, arch_name(n_d, n_v), 1000.0 / r.fps, MetricKind::interval, r.fps);
        } else if (stage == "ratio") {
            if (config.allocation) {
                auto [n_d, n_v] = *config.allocation;
                FpsResult r = fps(config.hardware, wl, n_d, n_v, modes);
                ratio_t_dit = r.t_dit_ms;
                ratio_n_vae = n_v;
                ratio_arch = arch_name(n_d, n_v);
                last_fps = r.fps;
            } else {
                AllocationPlan plan =
                    optimize(config.hardware, wl, config.devices, config.min_dit, modes);
                ratio_t_dit = plan.t_dit_ms;
                ratio_n_vae = plan.n_vae;
                ratio_arch = arch_name(plan.n_dit, plan.n_vae);
                last_fps = plan.predicted_fps;
            }
            push(stage, ratio_arch, 1000.0 / last_fps, MetricKind::interval, last_fps);
        } else if (stage == "extrapolation") {
            double t_vae_single = t_vae_ms(wl, config.hardware, 1, modes.vae);
            last_fps = throughput_with_skip(ratio_t_dit, t_vae_single, ratio_n_vae,
                                            config.skip_rate);
            push(stage, ratio_arch, 1000.0 / last_fps, MetricKind::interval, last_fps);
        } else if (stage == "speculation") {
            double amortized = amortized_latency(config.speculation.p_hit,
                                                 config.speculation.t_sys_ms,
                                                 config.speculation.t_overhead_ms);
            report.final_effective_latency_ms = amortized;
            push(stage, ratio_arch, amortized, MetricKind::latency, last_fps);
        }
    }

    double base = report.rows.front().fps;
    for (AblationRow& row : report.rows) row.speedup = row.fps / base;
    report.cumulative_speedup = report.rows.back().fps / base;
    return report;
}

}  // namespace framepipe
