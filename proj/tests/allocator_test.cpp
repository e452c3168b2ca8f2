#include <doctest.h>

#include <sstream>

#include "framepipe/allocator.hpp"
#include "framepipe/errors.hpp"

using namespace framepipe;

namespace {

HardwareProfile matrix_hw() {
    HardwareProfile hw;
    hw.pi_peak = 752e12;
    hw.bw_hbm = 1.6e12;
    hw.b_link = 30e9;
    hw.s_sram = 33554432;
    hw.eta_util = 0.4;
    hw.eta_eff = 0.6;
    return hw;
}

WorkloadProfile matrix_wl() {
    WorkloadProfile wl;
    wl.w_dit = 2.253e13;
    wl.d_attn = 7.905e8;
    wl.m_vae = 1.05e11;
    wl.h_heads = 30;
    wl.alpha_ms = 74.9;
    wl.beta_ms = 52.7;
    wl.profiled_dit = {{2, 63.8}, {3, 60.1}, {5, 51.5}, {6, 31.6}};
    wl.t_vae_single_ms = 109.4;
    return wl;
}

}  // namespace

TEST_CASE("feasible splits honor head divisibility and the decoder remainder") {
    CHECK(feasible_splits(30, 8, 2) == std::vector<int>{2, 3, 5, 6});
    CHECK(feasible_splits(30, 8, 4) == std::vector<int>{5, 6});
    CHECK(feasible_splits(30, 4, 1) == std::vector<int>{1, 2, 3});
    CHECK_THROWS_AS(feasible_splits(7, 4, 2), InfeasibleError);  // 7 has no divisor in [2,3]
    CHECK_THROWS_AS(feasible_splits(0, 8, 2), ConfigError);
    CHECK_THROWS_AS(feasible_splits(30, 1, 1), ConfigError);
}

TEST_CASE("sweep reproduces the matrix-scale allocation table") {
    auto rows = sweep(matrix_hw(), matrix_wl(), 8, 2, EvalModes{});
    REQUIRE(rows.size() == 4);

    CHECK(rows[0].n_dit == 2);
    CHECK(rows[0].n_vae == 6);
    CHECK(rows[0].split == "H/15");
    CHECK(rows[0].fps == doctest::Approx(15.67).epsilon(1e-3));
    CHECK(rows[0].table_label == "DiT (Compute)");

    CHECK(rows[1].split == "H/10");
    CHECK(rows[1].fps == doctest::Approx(16.64).epsilon(1e-3));
    CHECK(rows[1].table_label == "DiT (Comm.)");

    CHECK(rows[2].split == "H/6");
    CHECK(rows[2].fps == doctest::Approx(19.42).epsilon(1e-3));
    CHECK(rows[2].table_label == "Balanced");

    CHECK(rows[3].split == "H/5");
    CHECK(rows[3].fps == doctest::Approx(18.28).epsilon(1e-3));
    CHECK(rows[3].table_label == "VAE (Memory)");
}

TEST_CASE("optimize picks 5 generators and 3 decoders") {
    AllocationPlan plan = optimize(matrix_hw(), matrix_wl(), 8, 2, EvalModes{});
    CHECK(plan.n_dit == 5);
    CHECK(plan.n_vae == 3);
    CHECK(plan.predicted_fps == doctest::Approx(19.42).epsilon(1e-3));
    CHECK(plan.table_label == "Balanced");
    CHECK(plan.feasible_set == std::vector<int>{2, 3, 5, 6});
}

TEST_CASE("fps ties break toward the larger decoder pool") {
    HardwareProfile hw = matrix_hw();
    WorkloadProfile wl;
    wl.h_heads = 4;
    wl.profiled_dit = {{2, 50.0}, {4, 50.0}};
    wl.t_vae_single_ms = 25.0;
    // Both feasible splits are generator-bound at 50 ms.
    AllocationPlan plan = optimize(hw, wl, 8, 2, EvalModes{});
    CHECK(plan.n_dit == 2);
    CHECK(plan.n_vae == 6);
}

TEST_CASE("sweep CSV golden") {
    auto rows = sweep(matrix_hw(), matrix_wl(), 8, 2, EvalModes{});
    std::ostringstream os;
    write_sweep_csv(rows, os);
    CHECK(os.str() ==
          "config,split,dit_ms,vae_interval_ms,fps,bottleneck\n"
          "2 DiT + 6 VAE,H/15,63.800,18.233,15.7,DiT (Compute)\n"
          "3 DiT + 5 VAE,H/10,60.100,21.880,16.6,DiT (Comm.)\n"
          "5 DiT + 3 VAE,H/6,51.500,36.467,19.4,Balanced\n"
          "6 DiT + 2 VAE,H/5,31.600,54.700,18.3,VAE (Memory)\n");
}
