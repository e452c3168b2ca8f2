#include <benchmark/benchmark.h>

#include "framepipe/allocator.hpp"
#include "framepipe/memcost.hpp"
#include "framepipe/memexec.hpp"
#include "framepipe/perfmodel.hpp"
#include "framepipe/rng.hpp"
#include "framepipe/simulator.hpp"
#include "framepipe/speculation.hpp"
#include "framepipe/trace.hpp"

using namespace framepipe;

namespace {

HardwareProfile bench_hw() {
    HardwareProfile hw;
    hw.pi_peak = 752e12;
    hw.bw_hbm = 1.6e12;
    hw.b_link = 30e9;
    hw.s_sram = 33554432;
    hw.eta_util = 0.4;
    hw.eta_eff = 0.6;
    return hw;
}

WorkloadProfile bench_wl() {
    WorkloadProfile wl;
    wl.w_dit = 2.253e13;
    wl.d_attn = 7.905e8;
    wl.m_vae = 1.05e11;
    wl.h_heads = 30;
    wl.profiled_dit = {{2, 63.8}, {3, 60.1}, {5, 51.5}, {6, 31.6}};
    wl.t_vae_single_ms = 109.4;
    return wl;
}

OpGraph decoder_block() {
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

void BM_Simulate(benchmark::State& state) {
    SimConfig cfg;
    cfg.n_dit = 5;
    cfg.n_vae = 3;
    cfg.t_dit_ms = 37.9;
    cfg.t_vae_ms = 109.4;
    cfg.horizon_frames = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run(cfg));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(10000);

void BM_MarkovPredict(benchmark::State& state) {
    TraceSpec spec;
    spec.alphabet = {"w", "a", "s", "d"};
    spec.length = 10000;
    spec.switch_prob = 0.07;
    ActionTrace trace = gen_trace(spec, 11);
    auto actions = trace.actions();
    for (auto _ : state) {
        MarkovPredictor p(1, trace.alphabet());
        long long hits = 0;
        p.observe(actions.front());
        for (std::size_t i = 1; i < actions.size(); ++i) {
            hits += p.predict() == actions[i];
            p.observe(actions[i]);
        }
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(actions.size()));
}
BENCHMARK(BM_MarkovPredict);

void BM_SpeculativeEval(benchmark::State& state) {
    SpecConfig cfg;
    cfg.predictor = PredictorKind::scripted_bernoulli;
    cfg.p_hit = 0.93;
    cfg.seed = 3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(speculative_eval(cfg, {}, 38.0, 10000));
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SpeculativeEval);

void BM_FusionPlanner(benchmark::State& state) {
    OpGraph g = decoder_block();
    for (auto _ : state) {
        benchmark::DoNotOptimize(plan_vertical_fusion(g, 33554432));
    }
}
BENCHMARK(BM_FusionPlanner);

void BM_TiledEquivalence(benchmark::State& state) {
    OpGraph g = decoder_block();
    Rng rng(21);
    TensorMap inputs;
    for (const auto& [id, spec] : g.tensors) {
        if (!g.produced(id)) inputs[id] = random_tensor(spec.dims, rng);
    }
    FusionPlan plan = plan_vertical_fusion(g, 2097152);
    for (auto _ : state) {
        benchmark::DoNotOptimize(check_equivalence(g, inputs, plan));
    }
}
BENCHMARK(BM_TiledEquivalence);

void BM_AllocationSweep(benchmark::State& state) {
    HardwareProfile hw = bench_hw();
    WorkloadProfile wl = bench_wl();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sweep(hw, wl, 8, 2, EvalModes{}));
    }
}
BENCHMARK(BM_AllocationSweep);

}  // namespace

BENCHMARK_MAIN();
