#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "framepipe/allocator.hpp"
#include "framepipe/errors.hpp"
#include "framepipe/extrapolation.hpp"
#include "framepipe/jsonio.hpp"
#include "framepipe/memcost.hpp"
#include "framepipe/memexec.hpp"
#include "framepipe/perfmodel.hpp"
#include "framepipe/reports.hpp"
#include "framepipe/rng.hpp"
#include "framepipe/scenario.hpp"
#include "framepipe/simulator.hpp"
#include "framepipe/speculation.hpp"
#include "framepipe/trace.hpp"

namespace fp = framepipe;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format = "json";
};

std::string resolve(const GlobalOpts& g, const std::string& path) {
    if (path.empty() || g.out_dir.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(g.out_dir) / p).string();
}

// Empty path means stdout.
void emit(const GlobalOpts& g, const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    fp::atomic_write_text(resolve(g, path), content);
}

fp::EvalModes modes_from(const std::string& mode) {
    if (mode == "profiled") return {fp::DitMode::profiled, fp::VaeMode::profiled_interval};
    if (mode == "analytic") return {fp::DitMode::analytic, fp::VaeMode::analytic};
    throw fp::ConfigError("--mode must be 'profiled' or 'analytic'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frame-pipeline performance toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "Seed for every stochastic command");
    app.add_option("--out-dir", g.out_dir, "Directory prepended to relative output paths");
    app.add_option("--format", g.format, "Default stdout format")
        ->check(CLI::IsMember({"json", "csv"}));

    // allocate
    auto* alloc_cmd = app.add_subcommand("allocate", "Sweep feasible device splits, pick the best");
    struct {
        std::string profile;
        int devices = 8;
        int min_dit = 2;
        std::string mode = "profiled";
        std::string sweep_path;
        std::string plan_path;
    } al;
    alloc_cmd->add_option("--profile", al.profile, "Hardware/workload profile JSON")
        ->required();
    alloc_cmd->add_option("--devices", al.devices, "Total device count");
    alloc_cmd->add_option("--min-dit", al.min_dit, "Minimum generator devices");
    alloc_cmd->add_option("--mode", al.mode, "profiled or analytic")
        ->check(CLI::IsMember({"profiled", "analytic"}));
    alloc_cmd->add_option("--sweep", al.sweep_path, "Write the per-split CSV here");
    alloc_cmd->add_option("--out", al.plan_path, "Write the chosen plan JSON here");
    alloc_cmd->callback([&] {
        auto [hw, wl] = fp::load_profile(al.profile);
        fp::EvalModes modes = modes_from(al.mode);
        auto rows = fp::sweep(hw, wl, al.devices, al.min_dit, modes);
        auto plan = fp::optimize(hw, wl, al.devices, al.min_dit, modes);
        if (!al.sweep_path.empty()) emit(g, al.sweep_path, fp::sweep_csv(rows));
        if (!al.plan_path.empty()) emit(g, al.plan_path, fp::plan_json(plan));
        if (al.sweep_path.empty() && al.plan_path.empty()) {
            emit(g, "", g.format == "csv" ? fp::sweep_csv(rows) : fp::plan_json(plan));
        }
    });

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Discrete-event pipeline simulation");
    struct {
        std::string config;
        std::string trace_path;
        long long frames = -1;
        bool records = false;
        std::string report_path;
        std::string gantt_path;
    } si;
    sim_cmd->add_option("--config", si.config, "Simulation config JSON")->required();
    sim_cmd->add_option("--trace", si.trace_path, "Action trace JSONL");
    sim_cmd->add_option("--frames", si.frames, "Override the configured frame horizon");
    sim_cmd->add_flag("--records", si.records, "Include per-frame records in the report");
    sim_cmd->add_option("--report", si.report_path, "Write the report JSON here");
    sim_cmd->add_option("--gantt", si.gantt_path, "Write the stage timeline CSV here");
    sim_cmd->callback([&] {
        fp::SimConfig cfg = fp::load_sim_config(si.config);
        fp::ActionTrace trace;
        if (!si.trace_path.empty()) trace = fp::load_trace(si.trace_path);
        if (si.frames >= 0) cfg.horizon_frames = si.frames;
        fp::SimReport report = fp::run(cfg, trace);
        if (!si.gantt_path.empty()) emit(g, si.gantt_path, fp::gantt_csv(report));
        if (!si.report_path.empty()) {
            emit(g, si.report_path, fp::sim_report_json(report, si.records));
        } else if (si.gantt_path.empty()) {
            emit(g, "", g.format == "csv" ? fp::gantt_csv(report)
                                          : fp::sim_report_json(report, si.records));
        }
    });

    // speculate
    auto* spec_cmd = app.add_subcommand("speculate", "Speculative-action latency evaluation");
    struct {
        std::string predictor = "markov:1";
        double p_hit = 0.0;
        double t_sys = 38.0;
        double t_overhead = 0.1;
        std::string trace_path;
        long long frames = 0;
        std::string report_path;
    } sp;
    spec_cmd->add_option("--predictor", sp.predictor,
                         "markov:<order>, bernoulli, oracle, or anti_oracle");
    spec_cmd->add_option("--p-hit", sp.p_hit, "Hit probability for the bernoulli predictor");
    spec_cmd->add_option("--t-sys", sp.t_sys, "Full regeneration latency, ms");
    spec_cmd->add_option("--t-overhead", sp.t_overhead, "Verification overhead, ms");
    spec_cmd->add_option("--trace", sp.trace_path, "Action trace JSONL");
    spec_cmd->add_option("--frames", sp.frames, "Frame count when no trace is given");
    spec_cmd->add_option("--report", sp.report_path, "Write the report JSON here");
    spec_cmd->callback([&] {
        fp::SpecConfig cfg;
        cfg.predictor = fp::predictor_from_string(sp.predictor);
        cfg.order = fp::predictor_order_from_string(sp.predictor);
        cfg.p_hit = sp.p_hit;
        cfg.t_overhead_ms = sp.t_overhead;
        cfg.seed = g.seed;
        fp::ActionTrace trace;
        if (!sp.trace_path.empty()) trace = fp::load_trace(sp.trace_path);
        fp::SpecReport report = fp::speculative_eval(cfg, trace, sp.t_sys, sp.frames);
        if (!sp.report_path.empty()) {
            emit(g, sp.report_path, fp::spec_report_json(report));
        } else if (g.format == "csv") {
            emit(g, "", fp::latency_hist_csv(fp::value_histogram(report.latencies_ms)));
        } else {
            emit(g, "", fp::spec_report_json(report));
        }
    });

    // extrapolate
    auto* ext_cmd = app.add_subcommand("extrapolate", "Manifold extrapolation over a trace");
    struct {
        std::string trace_path;
        int dim = 8;
        std::string tau = "auto";
        double lambda = 1.0;
        std::vector<double> drift;
        bool update_v_on_hit = false;
        std::string report_path;
        std::string errors_path;
    } ex;
    ext_cmd->add_option("--trace", ex.trace_path, "Action trace JSONL")->required();
    ext_cmd->add_option("--dim", ex.dim, "Latent dimension")->check(CLI::PositiveNumber);
    ext_cmd->add_option("--tau", ex.tau, "Divergence threshold, or 'auto'");
    ext_cmd->add_option("--lambda", ex.lambda, "Extrapolation step scale");
    ext_cmd->add_option("--drift", ex.drift, "Constant-velocity drift (broadcast when scalar)")
        ->delimiter(',');
    ext_cmd->add_flag("--update-v-on-hit", ex.update_v_on_hit,
                      "Refresh the velocity estimate on extrapolated frames too");
    ext_cmd->add_option("--report", ex.report_path, "Write the report JSON here");
    ext_cmd->add_option("--errors", ex.errors_path, "Write the per-frame error CSV here");
    ext_cmd->callback([&] {
        fp::ActionTrace trace = fp::load_trace(ex.trace_path);
        fp::ExtrapConfig cfg;
        cfg.embedding = fp::one_hot_embedding(trace.alphabet());
        cfg.lam = ex.lambda;
        cfg.update_v_on_hit = ex.update_v_on_hit;
        if (ex.tau == "auto") {
            // A single-token alphabet has zero divergence everywhere; any
            // positive threshold behaves identically.
            cfg.tau = cfg.embedding.size() < 2 ? 1.0 : fp::auto_tau(cfg.embedding);
        } else {
            try {
                cfg.tau = std::stod(ex.tau);
            } catch (const std::exception&) {
                throw fp::ConfigError("--tau expects a number or 'auto'");
            }
        }
        cfg.dynamics.kind = fp::DynamicsKind::constant_velocity;
        if (ex.drift.empty()) {
            cfg.dynamics.drift.assign(static_cast<std::size_t>(ex.dim), 0.05);
        } else if (ex.drift.size() == 1) {
            cfg.dynamics.drift.assign(static_cast<std::size_t>(ex.dim), ex.drift[0]);
        } else {
            cfg.dynamics.drift = ex.drift;
        }
        fp::Vec z0(static_cast<std::size_t>(ex.dim), 0.0);
        fp::TraceRunResult result = fp::run_trace(z0, trace, cfg);
        if (!ex.errors_path.empty()) emit(g, ex.errors_path, fp::extrap_error_csv(result));
        if (!ex.report_path.empty()) {
            emit(g, ex.report_path, fp::extrap_report_json(result, cfg.tau, cfg.lam));
        } else if (ex.errors_path.empty()) {
            emit(g, "", g.format == "csv" ? fp::extrap_error_csv(result)
                                          : fp::extrap_report_json(result, cfg.tau, cfg.lam));
        }
    });

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "Plan operator fusion for a tensor graph");
    struct {
        std::string graph;
        long long sram = 2097152;
        bool horizontal = false;
        std::string plan_path;
        std::string report_path;
    } fu;
    fuse_cmd->add_option("--graph", fu.graph, "Operator graph JSON")->required();
    fuse_cmd->add_option("--sram", fu.sram, "On-chip buffer budget, bytes");
    fuse_cmd->add_flag("--horizontal", fu.horizontal, "Fuse same-input matmuls instead");
    fuse_cmd->add_option("--plan", fu.plan_path, "Write the plan JSON here");
    fuse_cmd->add_option("--report", fu.report_path, "Write the per-group CSV here");
    fuse_cmd->callback([&] {
        fp::OpGraph graph = fp::load_graph(fu.graph);
        if (fu.horizontal) {
            std::vector<fp::HorizontalFusion> groups;
            for (const auto& ids : fp::same_input_matmul_sets(graph)) {
                groups.push_back(fp::plan_horizontal_fusion(graph, ids));
            }
            emit(g, fu.plan_path, fp::horizontal_report_json(groups));
            return;
        }
        fp::FusionPlan plan = fp::plan_vertical_fusion(graph, fu.sram);
        if (!fu.plan_path.empty()) emit(g, fu.plan_path, fp::plan_to_json(plan));
        if (!fu.report_path.empty()) emit(g, fu.report_path, fp::fusion_report_csv(graph, plan));
        if (fu.plan_path.empty() && fu.report_path.empty()) {
            emit(g, "", g.format == "csv" ? fp::fusion_report_csv(graph, plan)
                                          : fp::plan_to_json(plan));
        }
    });

    // fuse-exec
    auto* fx_cmd = app.add_subcommand("fuse-exec",
                                      "Execute a graph fused and unfused, compare numerics");
    struct {
        std::string graph;
        long long sram = 2097152;
        bool check = false;
        std::string report_path;
    } fx;
    fx_cmd->add_option("--graph", fx.graph, "Operator graph JSON")->required();
    fx_cmd->add_option("--sram", fx.sram, "On-chip buffer budget, bytes");
    fx_cmd->add_flag("--check", fx.check, "Exit 4 when the runs disagree");
    fx_cmd->add_option("--report", fx.report_path, "Write the comparison JSON here");
    fx_cmd->callback([&] {
        fp::OpGraph graph = fp::load_graph(fx.graph);
        fp::Rng rng(g.seed);
        fp::TensorMap inputs;
        for (const auto& [id, spec] : graph.tensors) {
            if (!graph.produced(id)) inputs[id] = fp::random_tensor(spec.dims, rng);
        }
        fp::FusionPlan plan = fp::plan_vertical_fusion(graph, fx.sram);
        fp::EquivalenceReport rep = fp::check_equivalence(graph, inputs, plan);
        std::string body;
        {
            std::string ok = rep.ok ? "true" : "false";
            body = "{\n  \"ok\": " + ok +
                   ",\n  \"max_rel_err\": " + fp::format_double(rep.max_rel_err) +
                   ",\n  \"worst_tensor\": \"" + rep.worst_tensor +
                   "\",\n  \"groups\": " + std::to_string(plan.groups.size()) + "\n}\n";
        }
        emit(g, fx.report_path, body);
        if (fx.check && !rep.ok) {
            throw fp::EquivalenceError("fused run diverged on '" + rep.worst_tensor +
                                       "' (max relative error " +
                                       fp::format_double(rep.max_rel_err) + ")");
        }
    });

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "Fit the generator scaling curve");
    struct {
        std::string samples;
        std::string out_path;
    } ca;
    cal_cmd->add_option("--samples", ca.samples, "Measured {n_d, t_ms} samples JSON")
        ->required();
    cal_cmd->add_option("--out", ca.out_path, "Write the fit JSON here");
    cal_cmd->callback([&] {
        auto samples = fp::load_fit_samples(ca.samples);
        fp::FitResult fit = fp::fit_alpha_beta(samples);
        emit(g, ca.out_path, fp::fit_report_json(fit));
    });

    // ablation
    auto* abl_cmd = app.add_subcommand("ablation", "Cumulative optimization-stage ladder");
    struct {
        std::string scenario;
        std::string report_path;
        std::string table_path;
        std::string waterfall_path;
    } ab;
    abl_cmd->add_option("--scenario", ab.scenario, "Scenario JSON")->required();
    abl_cmd->add_option("--report", ab.report_path, "Write the report JSON here");
    abl_cmd->add_option("--table", ab.table_path, "Write the stage table CSV here");
    abl_cmd->add_option("--waterfall", ab.waterfall_path, "Write the (stage, fps) CSV here");
    abl_cmd->callback([&] {
        fp::ScenarioConfig cfg = fp::load_scenario(ab.scenario);
        fp::AblationReport report = fp::run_ablation(cfg);
        if (!ab.table_path.empty()) emit(g, ab.table_path, fp::ablation_table_csv(report));
        if (!ab.waterfall_path.empty()) emit(g, ab.waterfall_path, fp::waterfall_csv(report));
        if (!ab.report_path.empty()) {
            emit(g, ab.report_path, fp::ablation_report_json(report));
        } else if (ab.table_path.empty() && ab.waterfall_path.empty()) {
            emit(g, "", g.format == "csv" ? fp::ablation_table_csv(report)
                                          : fp::ablation_report_json(report));
        }
    });

    // gen-trace
    auto* gen_cmd = app.add_subcommand("gen-trace", "Generate a synthetic action trace");
    struct {
        std::string model = "persistence";
        long long length = 0;
        std::vector<std::string> alphabet = {"w", "a", "s", "d"};
        double q = 0.0;
        double interval_ms = 0.0;
        std::vector<std::string> pattern;
        std::string out_path;
    } gt;
    gen_cmd->add_option("--model", gt.model, "persistence, uniform, or scripted")
        ->check(CLI::IsMember({"persistence", "uniform", "scripted"}));
    gen_cmd->add_option("--length", gt.length, "Frame count")->required();
    gen_cmd->add_option("--alphabet", gt.alphabet, "Action tokens")->delimiter(',');
    gen_cmd->add_option("--q", gt.q, "Per-frame switch probability (persistence)");
    gen_cmd->add_option("--interval-ms", gt.interval_ms, "Timestamp spacing");
    gen_cmd->add_option("--pattern", gt.pattern, "Scripted pattern, cycled")->delimiter(',');
    gen_cmd->add_option("--out", gt.out_path, "Write the JSONL trace here");
    gen_cmd->callback([&] {
        fp::TraceSpec spec;
        spec.alphabet = gt.alphabet;
        spec.length = gt.length;
        spec.switch_prob = gt.q;
        spec.interval_ms = gt.interval_ms;
        spec.pattern = gt.pattern;
        if (gt.model == "persistence") spec.model = fp::TraceModel::persistence;
        if (gt.model == "uniform") spec.model = fp::TraceModel::uniform;
        if (gt.model == "scripted") spec.model = fp::TraceModel::scripted;
        fp::ActionTrace trace = fp::gen_trace(spec, g.seed);
        emit(g, gt.out_path, fp::to_jsonl(trace));
    });

    // export
    auto* exp_cmd = app.add_subcommand("export", "Re-shape a report into plot-ready CSV");
    struct {
        std::string kind;
        std::string in_path;
        std::string out_path;
    } xp;
    exp_cmd->add_option("--kind", xp.kind, "waterfall, gantt, or latency_hist")
        ->required()
        ->check(CLI::IsMember({"waterfall", "gantt", "latency_hist"}));
    exp_cmd->add_option("--in", xp.in_path, "Source report JSON")->required();
    exp_cmd->add_option("--out", xp.out_path, "Write the CSV here");
    exp_cmd->callback([&] {
        std::string text = fp::read_text_file(xp.in_path);
        std::string body;
        if (xp.kind == "waterfall") {
            body = fp::waterfall_csv(fp::parse_ablation_report(text, xp.in_path));
        } else if (xp.kind == "gantt") {
            fp::SimReport report = fp::parse_sim_report(text, xp.in_path);
            if (report.records.empty()) {
                throw fp::ConfigError(xp.in_path +
                                      ": no per-frame records; rerun simulate with --records");
            }
            body = fp::gantt_csv(report);
        } else {
            body = fp::latency_hist_csv(fp::parse_spec_histogram(text, xp.in_path));
        }
        emit(g, xp.out_path, body);
    });

    // Let --seed/--out-dir/--format appear after the subcommand too.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const fp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fp::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fp::EquivalenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const fp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
