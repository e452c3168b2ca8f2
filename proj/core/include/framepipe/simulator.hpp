#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "framepipe/trace.hpp"

namespace framepipe {

enum class VaeDispatch { round_robin, spatial };
enum class ArrivalMode { saturated, timed };

// In-simulator stand-in for the extrapolation policy: a flagged frame
// bypasses the generator server and reuses the previous latent. The first
// frame is never skipped.
struct SkipPolicy {
    double skip_rate = 0.0;
    std::uint64_t seed = 0;
};

struct SimConfig {
    int n_dit = 1;
    int n_vae = 1;
    double t_dit_ms = 0.0;  // generator group step time (all-to-all included)
    double t_vae_ms = 0.0;  // single-worker whole-frame decode time
    VaeDispatch vae_mode = VaeDispatch::round_robin;
    ArrivalMode arrival = ArrivalMode::saturated;
    // Charged at the generator->decoder and decoder->display hops.
    double transfer_overhead_ms = 0.0;
    // Frame budget; 0 means "whole trace". Required when the trace is empty.
    long long horizon_frames = 0;
    std::optional<SkipPolicy> skip;

    void validate() const;  // throws ConfigError
};

struct FrameRecord {
    long long frame_id = 0;
    std::string action;
    double t_input_ms = 0.0;
    std::optional<double> t_dit_start_ms;  // absent when skipped
    std::optional<double> t_dit_end_ms;
    double t_decode_start_ms = 0.0;
    double t_decode_end_ms = 0.0;
    double t_display_ms = 0.0;
    int vae_worker = -1;  // -1: whole gang (spatial mode)
    bool skipped = false;
    std::optional<bool> speculative_hit;
};

struct SimReport {
    double fps = 0.0;
    double effective_interval_ms = 0.0;
    double mean_latency_ms = 0.0;
    double p50_latency_ms = 0.0;
    double p99_latency_ms = 0.0;
    double dit_utilization = 0.0;
    std::vector<double> worker_utilization;
    long long total_frames = 0;
    long long warmup_frames = 0;  // first n_vae frames, excluded from stats
    long long skip_count = 0;
    std::vector<FrameRecord> records;
};

// Virtual-clock pipeline walk: one atomic generator server feeding decode
// workers (round-robin whole frames, or the gang splitting each frame in
// spatial mode). Presentation is forced in-order. Runs shorter than
// warmup + 2 frames fall back to whole-run statistics.
SimReport run(const SimConfig& config, const ActionTrace& trace = {});

// Post-warm-up display rate. Throws InsufficientDataError below
// 2 * warmup frames.
double steady_state_fps(const SimReport& report);

// CSV (frame_id,stage,worker,start_ms,end_ms) ordered by (start_ms,
// frame_id); stages: dit, xfer (only when transfer overhead > 0), decode.
std::string gantt_csv(const SimReport& report);
void gantt_export(const SimReport& report, const std::string& path);

}  // namespace framepipe
