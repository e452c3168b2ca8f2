#include <doctest.h>

#include <cmath>

#include "framepipe/errors.hpp"
#include "framepipe/rng.hpp"
#include "framepipe/simulator.hpp"
#include "framepipe/trace.hpp"

using namespace framepipe;

namespace {

SimConfig matrix_cfg(long long frames = 10000) {
    SimConfig cfg;
    cfg.n_dit = 5;
    cfg.n_vae = 3;
    cfg.t_dit_ms = 37.9;
    cfg.t_vae_ms = 109.4;
    cfg.horizon_frames = frames;
    return cfg;
}

}  // namespace

TEST_CASE("three round-robin decoders hide the decode latency") {
    SimReport r = run(matrix_cfg());
    // 37.9 ms generation + 109.4 ms decode per frame; decoders never queue.
    CHECK(r.effective_interval_ms == doctest::Approx(37.9).epsilon(1e-6));
    CHECK(r.fps == doctest::Approx(1000.0 / 37.9).epsilon(1e-6));
    CHECK(r.mean_latency_ms == doctest::Approx(147.3).epsilon(1e-4));
    CHECK(r.p50_latency_ms == doctest::Approx(147.3).epsilon(1e-4));
    CHECK(r.p99_latency_ms == doctest::Approx(147.3).epsilon(1e-4));
    CHECK(r.total_frames == 10000);
    CHECK(r.warmup_frames == 3);
    CHECK(steady_state_fps(r) == doctest::Approx(1000.0 / 37.9).epsilon(1e-6));
}

TEST_CASE("decode-bound pipeline is display-limited") {
    SimConfig cfg;
    cfg.n_dit = 1;
    cfg.n_vae = 1;
    cfg.t_dit_ms = 10.0;
    cfg.t_vae_ms = 30.0;
    cfg.horizon_frames = 2000;
    SimReport r = run(cfg);
    CHECK(r.fps == doctest::Approx(1000.0 / 30.0).epsilon(1e-3));
    CHECK(r.worker_utilization[0] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("simulated throughput matches the min-rule within 1 percent") {
    Rng rng(99);
    for (int i = 0; i < 10; ++i) {
        SimConfig cfg;
        cfg.n_dit = 1 + static_cast<int>(rng.below(8));
        cfg.n_vae = 1 + static_cast<int>(rng.below(6));
        cfg.t_dit_ms = rng.uniform(5.0, 120.0);
        cfg.t_vae_ms = rng.uniform(10.0, 320.0);
        cfg.horizon_frames = 10000;
        double model = 1000.0 / std::max(cfg.t_dit_ms, cfg.t_vae_ms / cfg.n_vae);
        SimReport r = run(cfg);
        CHECK(std::abs(r.fps - model) / model < 0.01);
    }
}

TEST_CASE("round-robin dispatch assigns frame i to worker i mod n") {
    SimReport r = run(matrix_cfg(30));
    for (const FrameRecord& rec : r.records) {
        CHECK(rec.vae_worker == static_cast<int>(rec.frame_id % 3));
    }
}

TEST_CASE("spatial gang decode divides the service time") {
    SimConfig cfg;
    cfg.n_dit = 1;
    cfg.n_vae = 3;
    cfg.t_dit_ms = 10.0;
    cfg.t_vae_ms = 30.0;
    cfg.vae_mode = VaeDispatch::spatial;
    cfg.horizon_frames = 500;
    SimReport r = run(cfg);
    CHECK(r.effective_interval_ms == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(r.mean_latency_ms == doctest::Approx(20.0).epsilon(1e-6));
    for (const FrameRecord& rec : r.records) CHECK(rec.vae_worker == -1);
}

TEST_CASE("causality and ordering invariants hold") {
    SimConfig cfg = matrix_cfg(300);
    cfg.transfer_overhead_ms = 0.05;
    SimReport r = run(cfg);
    REQUIRE(r.records.size() == 300);
    double prev_display = -1.0;
    double prev_dit_end = 0.0;
    for (const FrameRecord& rec : r.records) {
        REQUIRE(rec.t_dit_start_ms.has_value());
        CHECK(*rec.t_dit_start_ms >= rec.t_input_ms);
        CHECK(*rec.t_dit_end_ms == doctest::Approx(*rec.t_dit_start_ms + 37.9).epsilon(1e-9));
        CHECK(*rec.t_dit_start_ms >= prev_dit_end - 1e-9);  // atomic generator server
        prev_dit_end = *rec.t_dit_end_ms;
        CHECK(rec.t_decode_start_ms >= *rec.t_dit_end_ms);
        CHECK(rec.t_decode_end_ms == doctest::Approx(rec.t_decode_start_ms + 109.4).epsilon(1e-9));
        CHECK(rec.t_display_ms >= rec.t_decode_end_ms);
        CHECK(rec.t_display_ms > prev_display);  // in-order presentation
        prev_display = rec.t_display_ms;
    }
}

TEST_CASE("timed arrivals gate the pipeline") {
    TraceSpec spec;
    spec.alphabet = {"w"};
    spec.length = 100;
    spec.interval_ms = 100.0;
    ActionTrace trace = gen_trace(spec, 0);

    SimConfig cfg;
    cfg.n_dit = 1;
    cfg.n_vae = 1;
    cfg.t_dit_ms = 10.0;
    cfg.t_vae_ms = 30.0;
    cfg.arrival = ArrivalMode::timed;
    SimReport r = run(cfg, trace);
    CHECK(r.effective_interval_ms == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(r.mean_latency_ms == doctest::Approx(40.0).epsilon(1e-6));
}

TEST_CASE("skip policy bypasses the generator but still decodes") {
    SimConfig bad = matrix_cfg(400);
    bad.skip = SkipPolicy{1.0, 5};
    CHECK_THROWS_AS(run(bad), ConfigError);

    SimConfig cfg = matrix_cfg(400);
    cfg.skip = SkipPolicy{0.9, 5};
    SimReport r = run(cfg);
    CHECK(r.skip_count > 330);  // ~0.9 * 399
    CHECK(r.skip_count < 385);
    CHECK_FALSE(r.records[0].skipped);  // the first frame always runs in full
    for (const FrameRecord& rec : r.records) {
        if (rec.skipped) {
            CHECK_FALSE(rec.t_dit_start_ms.has_value());
        } else {
            CHECK(rec.t_dit_start_ms.has_value());
        }
        CHECK(rec.t_decode_end_ms > rec.t_decode_start_ms);
    }
    // Almost every frame rides the decode stage alone, so throughput moves
    // from the generator bound toward the decode ceiling of 3 workers.
    CHECK(r.fps > 1000.0 / 37.9);
    CHECK(r.fps <= 1000.0 / (109.4 / 3) + 0.01);
}

TEST_CASE("short runs cannot claim steady state") {
    SimReport r = run(matrix_cfg(5));
    CHECK(r.total_frames == 5);
    CHECK_THROWS_AS(steady_state_fps(r), InsufficientDataError);
}

TEST_CASE("empty trace requires a frame horizon") {
    SimConfig cfg = matrix_cfg(0);
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("config validation") {
    SimConfig cfg = matrix_cfg();
    cfg.n_vae = 0;
    CHECK_THROWS_AS(run(cfg), ConfigError);
    cfg = matrix_cfg();
    cfg.t_dit_ms = -1;
    CHECK_THROWS_AS(run(cfg), ConfigError);
    cfg = matrix_cfg();
    cfg.skip = SkipPolicy{1.5, 0};
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("gantt CSV golden") {
    SimConfig cfg;
    cfg.n_dit = 1;
    cfg.n_vae = 1;
    cfg.t_dit_ms = 10.0;
    cfg.t_vae_ms = 30.0;
    cfg.transfer_overhead_ms = 0.05;
    cfg.horizon_frames = 6;
    SimReport r = run(cfg);
    std::string expected =
        "frame_id,stage,worker,start_ms,end_ms\n"
        "0,dit,-1,0.000000,10.000000\n"
        "0,xfer,0,10.000000,10.050000\n"
        "1,dit,-1,10.000000,20.000000\n"
        "0,decode,0,10.050000,40.050000\n"
        "1,xfer,0,20.000000,20.050000\n"
        "2,dit,-1,20.000000,30.000000\n"
        "2,xfer,0,30.000000,30.050000\n"
        "3,dit,-1,30.000000,40.000000\n"
        "3,xfer,0,40.000000,40.050000\n"
        "4,dit,-1,40.000000,50.000000\n"
        "1,decode,0,40.050000,70.050000\n"
        "4,xfer,0,50.000000,50.050000\n"
        "5,dit,-1,50.000000,60.000000\n"
        "5,xfer,0,60.000000,60.050000\n"
        "2,decode,0,70.050000,100.050000\n"
        "3,decode,0,100.050000,130.050000\n"
        "4,decode,0,130.050000,160.050000\n"
        "5,decode,0,160.050000,190.050000\n";
    CHECK(gantt_csv(r) == expected);
    CHECK(gantt_csv(run(cfg)) == expected);  // re-run, byte-identical
}
