// Acceptance harness. Usage: framepipe_acceptance <cli-binary> <data-dir>
//
// Runs every headline check against the CLI binary and the library, prints
// one PASS/FAIL line per criterion, and exits non-zero when any fail. Every
// tolerance is pinned here, not in a config file.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

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
#include "random_graphs.hpp"

namespace fs = std::filesystem;
using namespace framepipe;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;
fs::path g_data;
fs::path g_tmp;
int g_failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int run_cli(const std::string& args) {
    std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -2;
}

struct Checker {
    std::ostringstream why;
    void operator()(bool ok, const std::string& msg) {
        if (ok) return;
        if (why.tellp() > 0) why << "; ";
        why << msg;
    }
    std::string result() const { return why.str(); }
};

void criterion(int n, const std::string& what, const std::function<std::string()>& body) {
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
        std::printf("PASS criterion %d: %s\n", n, what.c_str());
    } else {
        std::printf("FAIL criterion %d: %s (%s)\n", n, what.c_str(), detail.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

OpGraph decoder_block_graph() {
    OpGraph g;
    auto tensor = [&](const std::string& id, std::vector<long long> dims) {
        TensorSpec t;
        t.id = id;
        t.dims = std::move(dims);
        g.tensors[id] = t;
    };
    tensor("z", {1, 8, 16, 16});
    tensor("u", {1, 8, 32, 32});
    tensor("w_conv", {8, 8, 3, 3});
    tensor("c", {1, 8, 32, 32});
    tensor("n", {1, 8, 32, 32});
    tensor("y", {1, 8, 32, 32});
    g.nodes.push_back({"up", OpKind::upsample_nearest2x, {"z"}, "u", std::nullopt, 1, 0});
    g.nodes.push_back({"conv", OpKind::conv3x3, {"u"}, "c", "w_conv", 1, 0});
    g.nodes.push_back({"norm", OpKind::group_norm, {"c"}, "n", std::nullopt, 2, 0});
    g.nodes.push_back({"act", OpKind::silu, {"n"}, "y", std::nullopt, 1, 0});
    g.validate();
    return g;
}

std::vector<FusionPlan> contiguous_partitions(const OpGraph& g) {
    const std::size_t n = g.nodes.size();
    std::vector<FusionPlan> plans;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        FusionPlan plan;
        FusionGroup group;
        for (std::size_t i = 0; i < n; ++i) {
            group.node_ids.push_back(g.nodes[i].id);
            if (i + 1 == n || (mask & (1u << i))) {
                plan.groups.push_back(group);
                group = FusionGroup{};
            }
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

// ---- criteria -------------------------------------------------------------

std::string check_table_sweep() {
    Checker check;
    fs::path sweep = g_tmp / "sweep.csv";
    auto t0 = Clock::now();
    int rc = run_cli("allocate --profile " + (g_data / "profile_matrix.json").string() +
                     " --sweep " + sweep.string());
    double secs = seconds_since(t0);
    check(rc == 0, "allocate exited " + std::to_string(rc));
    if (rc != 0) return check.result();

    auto rows = parse_csv(read_text_file(sweep.string()));
    check(rows.size() == 5, "expected header + 4 rows, got " + std::to_string(rows.size()));
    struct Want {
        const char* config;
        double fps;
        const char* tag;
    };
    const Want want[] = {{"2 DiT + 6 VAE", 15.67, "DiT (Compute)"},
                         {"3 DiT + 5 VAE", 16.6, "DiT (Comm.)"},
                         {"5 DiT + 3 VAE", 19.4, "Balanced"},
                         {"6 DiT + 2 VAE", 18.3, "VAE (Memory)"}};
    for (std::size_t i = 0; i < 4 && i + 1 < rows.size(); ++i) {
        const auto& row = rows[i + 1];
        if (row.size() < 6) {
            check(false, "short row " + std::to_string(i));
            continue;
        }
        check(row[0] == want[i].config, "row " + std::to_string(i) + " config " + row[0]);
        double fps_val = std::stod(row[4]);
        check(std::abs(fps_val - want[i].fps) <= 0.1,
              "row " + std::to_string(i) + " fps " + row[4]);
        check(row[5] == want[i].tag, "row " + std::to_string(i) + " tag " + row[5]);
    }

    auto [hw, wl] = load_profile((g_data / "profile_matrix.json").string());
    AllocationPlan plan = optimize(hw, wl, 8, 2, EvalModes{});
    check(plan.n_dit == 5 && plan.n_vae == 3,
          "optimize picked " + std::to_string(plan.n_dit) + "+" + std::to_string(plan.n_vae));
    check(secs < 1.0, "sweep took " + std::to_string(secs) + " s");
    return check.result();
}

std::string check_sim_matches_model() {
    Checker check;
    auto t0 = Clock::now();
    auto compare = [&](double t_dit, double t_vae, int n_vae, const std::string& label) {
        SimConfig cfg;
        cfg.n_dit = 1;
        cfg.n_vae = n_vae;
        cfg.t_dit_ms = t_dit;
        cfg.t_vae_ms = t_vae;
        cfg.horizon_frames = 10000;
        double sim_fps = steady_state_fps(run(cfg));
        double model_fps = 1000.0 / std::max(t_dit, t_vae / n_vae);
        double rel = std::abs(sim_fps - model_fps) / model_fps;
        check(rel <= 0.01, label + ": sim " + format_double(sim_fps) + " vs model " +
                               format_double(model_fps));
    };
    compare(63.8, 109.4, 6, "2+6");
    compare(60.1, 109.4, 5, "3+5");
    compare(51.5, 109.4, 3, "5+3");
    compare(31.6, 109.4, 2, "6+2");
    Rng rng(42);
    for (int i = 0; i < 100; ++i) {
        double t_dit = rng.uniform(5.0, 120.0);
        double t_vae = rng.uniform(10.0, 300.0);
        int n_vae = static_cast<int>(rng.range(1, 6));
        compare(t_dit, t_vae, n_vae, "random " + std::to_string(i));
    }
    double secs = seconds_since(t0);
    check(secs < 10.0, "took " + std::to_string(secs) + " s");
    return check.result();
}

std::string check_pipeline_timing() {
    Checker check;
    SimConfig cfg;
    cfg.n_dit = 5;
    cfg.n_vae = 3;
    cfg.t_dit_ms = 37.9;
    cfg.t_vae_ms = 109.4;
    cfg.horizon_frames = 400;
    SimReport rep = run(cfg);
    check(std::abs(rep.mean_latency_ms - 147.3) <= 2.0,
          "mean latency " + format_double(rep.mean_latency_ms));
    check(std::abs(rep.effective_interval_ms - 37.9) <= 0.5,
          "interval " + format_double(rep.effective_interval_ms));
    return check.result();
}

std::string check_amortized_latency() {
    Checker check;
    double closed = amortized_latency(0.93, 38.0, 0.1);
    check(std::abs(closed - 2.76) < 1e-12, "closed form " + format_double(closed));

    SpecConfig mc;
    mc.predictor = PredictorKind::scripted_bernoulli;
    mc.p_hit = 0.93;
    mc.seed = 2024;
    SpecReport sampled = speculative_eval(mc, {}, 38.0, 100000);
    check(std::abs(sampled.mean_latency_ms - 2.76) / 2.76 <= 0.02,
          "Monte Carlo mean " + format_double(sampled.mean_latency_ms));

    SpecConfig oracle;
    oracle.predictor = PredictorKind::oracle;
    SpecReport hi = speculative_eval(oracle, {}, 38.0, 1000);
    double best = amortized_latency(1.0, 38.0, 0.1);
    check(hi.hit_rate == 1.0 && hi.p50_latency_ms == best && hi.p99_latency_ms == best,
          "oracle bound " + format_double(hi.p50_latency_ms));

    SpecConfig anti;
    anti.predictor = PredictorKind::anti_oracle;
    SpecReport lo = speculative_eval(anti, {}, 38.0, 1000);
    double worst = amortized_latency(0.0, 38.0, 0.1);
    check(lo.hit_rate == 0.0 && lo.p50_latency_ms == worst && lo.p99_latency_ms == worst,
          "anti-oracle bound " + format_double(lo.p50_latency_ms));
    return check.result();
}

std::string check_predictor_hit_rate() {
    Checker check;
    TraceSpec spec;
    spec.alphabet = {"w", "a", "s", "d"};
    spec.length = 100000;
    spec.model = TraceModel::persistence;
    spec.switch_prob = 0.07;
    ActionTrace trace = gen_trace(spec, 7);
    double rate = hit_rate(MarkovPredictor(1, trace.alphabet()), trace);
    check(std::abs(rate - 0.93) <= 0.01, "hit rate " + format_double(rate));
    return check.result();
}

std::string check_fusion_transactions() {
    Checker check;
    OpGraph g = decoder_block_graph();
    MemCost base = baseline_cost(g);
    check(base.activation_transactions == 8,
          "baseline transactions " + std::to_string(base.activation_transactions));
    FusionPlan best = plan_vertical_fusion(g, 33554432);
    MemCost fused = fused_cost(g, best);
    check(fused.activation_transactions == 2,
          "fused transactions " + std::to_string(fused.activation_transactions));

    auto dominated = [&](const OpGraph& graph, const std::string& label) {
        MemCost b = baseline_cost(graph);
        for (const FusionPlan& plan : contiguous_partitions(graph)) {
            MemCost f = fused_cost(graph, plan);
            check(f.total_bytes() <= b.total_bytes() &&
                      f.activation_transactions <= b.activation_transactions,
                  label + ": a grouping exceeds the baseline cost");
        }
    };
    dominated(g, "decoder block");
    Rng rng(6);
    for (int i = 0; i < 20; ++i) {
        dominated(random_chain_graph(rng, 32), "random " + std::to_string(i));
    }
    return check.result();
}

std::string check_tiled_equivalence() {
    Checker check;
    auto t0 = Clock::now();
    Rng rng(123);
    for (int i = 0; i < 50; ++i) {
        OpGraph g = random_chain_graph(rng, 64);
        TensorMap inputs;
        for (const auto& [id, spec] : g.tensors) {
            if (!g.produced(id)) inputs[id] = random_tensor(spec.dims, rng);
        }
        FusionPlan plan = plan_vertical_fusion(g, 2097152);
        EquivalenceReport rep = check_equivalence(g, inputs, plan, 1e-5);
        check(rep.ok && rep.max_rel_err <= 1e-5,
              "graph " + std::to_string(i) + " err " + format_double(rep.max_rel_err) +
                  " on " + rep.worst_tensor);
    }
    double secs = seconds_since(t0);
    check(secs < 30.0, "took " + std::to_string(secs) + " s");
    return check.result();
}

std::string check_extrapolation() {
    Checker check;

    TraceSpec constant;
    constant.alphabet = {"w", "a", "s", "d"};
    constant.length = 1000;
    constant.model = TraceModel::persistence;
    constant.switch_prob = 0.0;
    ActionTrace steady = gen_trace(constant, 1);
    ExtrapConfig cfg;
    cfg.embedding = one_hot_embedding(constant.alphabet);
    cfg.tau = auto_tau(cfg.embedding);
    cfg.lam = 1.0;
    cfg.dynamics.kind = DynamicsKind::constant_velocity;
    cfg.dynamics.drift = {0.1, -0.2, 0.3, 0.05};
    TraceRunResult r = run_trace(Vec(4, 0.0), steady, cfg);
    double worst = 0.0;
    for (double e : r.errors) worst = std::max(worst, std::abs(e));
    check(worst == 0.0, "constant-velocity error " + format_double(worst));
    check(r.hits == static_cast<long long>(steady.size()) - 2,
          "hits " + std::to_string(r.hits));

    cfg.tau = 0.7;  // below the sqrt(2) one-hot spacing
    long long violations = 0;
    for (int seed = 0; seed < 10000; ++seed) {
        TraceSpec random_spec;
        random_spec.alphabet = {"w", "a", "s", "d"};
        random_spec.length = 32;
        random_spec.model = TraceModel::uniform;
        ActionTrace t = gen_trace(random_spec, static_cast<std::uint64_t>(seed));
        TraceRunResult rr = run_trace(Vec(4, 0.0), t, cfg);
        auto actions = t.actions();
        for (std::size_t i = 1; i < actions.size(); ++i) {
            if (actions[i] != actions[i - 1] && rr.decisions[i] == Decision::hit) {
                ++violations;
            }
        }
    }
    check(violations == 0, std::to_string(violations) + " gating violations");
    return check.result();
}

std::string check_stage_ladder() {
    Checker check;
    fs::path report = g_tmp / "ablation.json";
    int rc = run_cli("ablation --scenario " + (g_data / "scenario_matrix.json").string() +
                     " --report " + report.string());
    check(rc == 0, "ablation exited " + std::to_string(rc));
    if (rc != 0) return check.result();

    AblationReport rep = parse_ablation_report(read_text_file(report.string()), "ablation");
    check(rep.rows.size() == 6, "rows " + std::to_string(rep.rows.size()));
    const double want[] = {2.1, 4.5, 16.6, 19.4};
    for (std::size_t i = 0; i < 4 && i < rep.rows.size(); ++i) {
        check(std::abs(rep.rows[i].fps - want[i]) <= 0.1,
              rep.rows[i].stage + " fps " + format_double(rep.rows[i].fps));
    }
    if (rep.rows.size() >= 5) {
        check(std::abs(rep.rows[4].fps - 26.4) / 26.4 <= 0.05,
              "extrapolation fps " + format_double(rep.rows[4].fps));
    }
    check(std::abs(rep.final_effective_latency_ms - 2.76) < 0.005,
          "final latency " + format_double(rep.final_effective_latency_ms));
    check(rep.cumulative_speedup >= 12.0,
          "cumulative speedup " + format_double(rep.cumulative_speedup));
    return check.result();
}

std::string check_determinism() {
    Checker check;

    std::string simcfg = (g_tmp / "simcfg.json").string();
    {
        SimConfig cfg;
        cfg.n_dit = 5;
        cfg.n_vae = 3;
        cfg.t_dit_ms = 37.9;
        cfg.t_vae_ms = 109.4;
        cfg.transfer_overhead_ms = 0.05;
        cfg.horizon_frames = 400;
        cfg.skip = SkipPolicy{0.35, 17};
        atomic_write_text(simcfg, sim_config_to_json(cfg));
    }
    std::string fit = (g_tmp / "fit_samples.json").string();
    atomic_write_text(fit,
                      "{\"samples\": [{\"n_d\": 2, \"t_ms\": 63.8}, {\"n_d\": 3, \"t_ms\": 60.1},"
                      " {\"n_d\": 5, \"t_ms\": 51.5}, {\"n_d\": 6, \"t_ms\": 31.6}]}\n");

    auto run_all = [&](const fs::path& dir) -> std::string {
        fs::create_directories(dir);
        std::string d = dir.string();
        std::string scenario = (g_data / "scenario_matrix.json").string();
        std::string profile = (g_data / "profile_matrix.json").string();
        std::string graph = (g_data / "vae_block.json").string();
        const std::vector<std::string> cmds = {
            "gen-trace --model persistence --length 500 --q 0.07 --seed 5 --out-dir " + d +
                " --out trace.jsonl",
            "speculate --predictor scripted_bernoulli --p-hit 0.93 --frames 2000 --seed 11"
            " --out-dir " + d + " --report spec.json",
            "speculate --predictor markov:1 --trace " + d + "/trace.jsonl --out-dir " + d +
                " --report spec_markov.json",
            "simulate --config " + simcfg + " --records --out-dir " + d +
                " --report sim.json --gantt gantt.csv",
            "ablation --scenario " + scenario + " --out-dir " + d +
                " --report abl.json --table abl.csv --waterfall waterfall.csv",
            "fuse --graph " + graph + " --out-dir " + d + " --plan plan.json --report fuse.csv",
            "fuse-exec --graph " + graph + " --seed 7 --out-dir " + d + " --report exec.json",
            "allocate --profile " + profile + " --out-dir " + d +
                " --sweep sweep.csv --out alloc.json",
            "extrapolate --trace " + d + "/trace.jsonl --drift 0.05 --out-dir " + d +
                " --report extrap.json --errors errors.csv",
            "calibrate --samples " + fit + " --out-dir " + d + " --out fit.json",
            "export --kind waterfall --in " + d + "/abl.json --out-dir " + d +
                " --out waterfall2.csv",
            "export --kind gantt --in " + d + "/sim.json --out-dir " + d + " --out gantt2.csv",
            "export --kind latency_hist --in " + d + "/spec.json --out-dir " + d +
                " --out hist.csv",
        };
        for (const std::string& cmd : cmds) {
            int rc = run_cli(cmd);
            if (rc != 0) {
                return "exit " + std::to_string(rc) + " from: " + cmd.substr(0, cmd.find(' '));
            }
        }
        return "";
    };

    fs::path a = g_tmp / "det_a";
    fs::path b = g_tmp / "det_b";
    std::string err = run_all(a);
    if (err.empty()) err = run_all(b);
    check(err.empty(), err);
    if (!err.empty()) return check.result();

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        fs::path twin = b / entry.path().filename();
        if (!fs::exists(twin)) {
            check(false, "missing " + twin.string());
            continue;
        }
        std::string lhs = read_text_file(entry.path().string());
        std::string rhs = read_text_file(twin.string());
        check(lhs == rhs, entry.path().filename().string() + " differs between runs");
        ++compared;
    }
    check(compared == 19, "compared " + std::to_string(compared) + " files");
    return check.result();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <cli-binary> <data-dir>\n", argv[0]);
        return 2;
    }
    g_cli = argv[1];
    g_data = argv[2];
    g_tmp = fs::temp_directory_path() / "framepipe_acceptance";
    std::error_code ec;
    fs::remove_all(g_tmp, ec);
    fs::create_directories(g_tmp);

    criterion(1, "allocator sweep hits the reference splits and picks 5 DiT + 3 VAE",
              check_table_sweep);
    criterion(2, "simulator steady-state fps matches the min-rule model within 1%",
              check_sim_matches_model);
    criterion(3, "round-robin pipeline: 147.3 +/- 2 ms latency, 37.9 +/- 0.5 ms interval",
              check_pipeline_timing);
    criterion(4, "speculative latency: closed form 2.76 ms, Monte Carlo, exact bounds",
              check_amortized_latency);
    criterion(5, "order-1 predictor hit rate 0.93 +/- 0.01 at switch probability 0.07",
              check_predictor_hit_rate);
    criterion(6, "decoder-chain fusion: 8 -> 2 transactions, fused cost never exceeds baseline",
              check_fusion_transactions);
    criterion(7, "tiled execution matches the unfused oracle within 1e-5 on 50 graphs",
              check_tiled_equivalence);
    criterion(8, "extrapolation: zero constant-velocity error, action changes always miss",
              check_extrapolation);
    criterion(9, "stage ladder fps waterfall with 2.76 ms effective latency",
              check_stage_ladder);
    criterion(10, "fixed-seed CLI runs are byte-identical", check_determinism);

    if (g_failures > 0) {
        std::printf("%d of 10 criteria failed\n", g_failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
