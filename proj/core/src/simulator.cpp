#include "framepipe/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "framepipe/errors.hpp"
#include "framepipe/jsonio.hpp"
#include "framepipe/rng.hpp"

namespace framepipe {

namespace {

using i64 = std::int64_t;

i64 to_ns(double ms) { return static_cast<i64>(std::llround(ms * 1e6)); }
double to_ms(i64 ns) { return static_cast<double>(ns) * 1e-6; }

double nearest_rank(std::vector<double>& sorted_values, double q) {
    if (sorted_values.empty()) return 0.0;
    auto n = sorted_values.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (idx == 0) idx = 1;
    if (idx > n) idx = n;
    return sorted_values[idx - 1];
}

}  // namespace

void SimConfig::validate() const {
    if (n_dit < 1 || n_vae < 1) throw ConfigError("sim: device counts must be >= 1");
    if (t_dit_ms < 0.0 || t_vae_ms < 0.0) throw ConfigError("sim: durations must be >= 0");
    if (transfer_overhead_ms < 0.0) throw ConfigError("sim: transfer overhead must be >= 0");
    if (horizon_frames < 0) throw ConfigError("sim: horizon must be >= 0");
    if (skip && (skip->skip_rate < 0.0 || skip->skip_rate >= 1.0)) {
        throw ConfigError("sim: skip_rate must be in [0, 1)");
    }
}

SimReport run(const SimConfig& config, const ActionTrace& trace) {
    config.validate();
    trace.validate();
    long long frames = 0;
    if (trace.empty()) {
        if (config.horizon_frames == 0) {
            throw ConfigError("sim: empty trace requires horizon_frames > 0");
        }
        frames = config.horizon_frames;
    } else {
        frames = static_cast<long long>(trace.size());
        if (config.horizon_frames > 0) frames = std::min(frames, config.horizon_frames);
    }

    const i64 t_dit = to_ns(config.t_dit_ms);
    const bool spatial = config.vae_mode == VaeDispatch::spatial;
    const i64 t_decode = spatial ? to_ns(config.t_vae_ms / config.n_vae) : to_ns(config.t_vae_ms);
    const i64 t_xfer = to_ns(config.transfer_overhead_ms);

    Rng skip_rng(config.skip ? config.skip->seed : 0);

    SimReport report;
    report.total_frames = frames;
    report.warmup_frames = std::min<long long>(config.n_vae, frames);
    report.records.reserve(static_cast<std::size_t>(frames));
    report.worker_utilization.assign(static_cast<std::size_t>(config.n_vae), 0.0);

    std::vector<i64> worker_free(static_cast<std::size_t>(config.n_vae), 0);
    std::vector<i64> worker_busy(static_cast<std::size_t>(config.n_vae), 0);
    i64 dit_free = 0;
    i64 dit_busy = 0;
    i64 prev_ready = 0;
    i64 prev_display = -1;

    for (long long i = 0; i < frames; ++i) {
        FrameRecord rec;
        rec.frame_id = i;
        if (i < static_cast<long long>(trace.size())) {
            rec.action = trace.records[static_cast<std::size_t>(i)].action;
        }
        const i64 arrival = (config.arrival == ArrivalMode::timed &&
                             i < static_cast<long long>(trace.size()))
                                ? to_ns(trace.records[static_cast<std::size_t>(i)].t_ms)
                                : 0;

        rec.skipped = config.skip && i > 0 && skip_rng.bernoulli(config.skip->skip_rate);
        i64 ready = 0;
        i64 input = 0;
        if (rec.skipped) {
            ++report.skip_count;
            ready = std::max(arrival, prev_ready);
            input = (config.arrival == ArrivalMode::saturated) ? ready : arrival;
        } else {
            const i64 dit_start = std::max(arrival, dit_free);
            const i64 dit_end = dit_start + t_dit;
            dit_free = dit_end;
            dit_busy += t_dit;
            ready = dit_end;
            input = (config.arrival == ArrivalMode::saturated) ? dit_start : arrival;
            rec.t_dit_start_ms = to_ms(dit_start);
            rec.t_dit_end_ms = to_ms(dit_end);
        }
        prev_ready = ready;

        const i64 dispatch = ready + t_xfer;
        i64 decode_start = 0;
        i64 decode_end = 0;
        if (spatial) {
            rec.vae_worker = -1;
            decode_start = std::max(dispatch, worker_free[0]);
            decode_end = decode_start + t_decode;
            for (int k = 0; k < config.n_vae; ++k) {
                worker_free[static_cast<std::size_t>(k)] = decode_end;
                worker_busy[static_cast<std::size_t>(k)] += t_decode;
            }
        } else {
            const auto k = static_cast<std::size_t>(i % config.n_vae);
            rec.vae_worker = static_cast<int>(k);
            decode_start = std::max(dispatch, worker_free[k]);
            decode_end = decode_start + t_decode;
            worker_free[k] = decode_end;
            worker_busy[k] += t_decode;
        }

        i64 display = decode_end + t_xfer;
        if (display <= prev_display) display = prev_display + 1;
        prev_display = display;

        rec.t_input_ms = to_ms(input);
        rec.t_decode_start_ms = to_ms(decode_start);
        rec.t_decode_end_ms = to_ms(decode_end);
        rec.t_display_ms = to_ms(display);
        report.records.push_back(std::move(rec));
    }

    // Steady-state window; short runs fall back to the whole run.
    std::size_t first = static_cast<std::size_t>(report.warmup_frames);
    if (report.records.size() < first + 2) first = 0;
    const std::size_t count = report.records.size() - first;
    if (count >= 2) {
        const double span_ms = report.records.back().t_display_ms -
                               report.records[first].t_display_ms;
        if (span_ms > 0.0) {
            report.effective_interval_ms = span_ms / static_cast<double>(count - 1);
            report.fps = 1000.0 / report.effective_interval_ms;
        }
    }
    if (count >= 1) {
        std::vector<double> latencies;
        latencies.reserve(count);
        double sum = 0.0;
        for (std::size_t i = first; i < report.records.size(); ++i) {
            double lat = report.records[i].t_display_ms - report.records[i].t_input_ms;
            latencies.push_back(lat);
            sum += lat;
        }
        std::sort(latencies.begin(), latencies.end());
        report.mean_latency_ms = sum / static_cast<double>(count);
        report.p50_latency_ms = nearest_rank(latencies, 0.50);
        report.p99_latency_ms = nearest_rank(latencies, 0.99);
    }
    if (!report.records.empty()) {
        const double span = report.records.back().t_display_ms;
        if (span > 0.0) {
            report.dit_utilization = to_ms(dit_busy) / span;
            for (int k = 0; k < config.n_vae; ++k) {
                report.worker_utilization[static_cast<std::size_t>(k)] =
                    to_ms(worker_busy[static_cast<std::size_t>(k)]) / span;
            }
        }
    }
    return report;
}

double steady_state_fps(const SimReport& report) {
    const long long needed = 2 * std::max<long long>(report.warmup_frames, 1);
    if (report.total_frames < needed ||
        report.records.size() < static_cast<std::size_t>(report.warmup_frames) + 2) {
        throw InsufficientDataError("steady_state_fps: need at least " + std::to_string(needed) +
                                    " frames, got " + std::to_string(report.total_frames));
    }
    const auto first = static_cast<std::size_t>(report.warmup_frames);
    const double span_ms =
        report.records.back().t_display_ms - report.records[first].t_display_ms;
    const auto count = report.records.size() - first;
    if (span_ms <= 0.0) throw InsufficientDataError("steady_state_fps: zero display span");
    return 1000.0 * static_cast<double>(count - 1) / span_ms;
}

std::string gantt_csv(const SimReport& report) {
    struct Row {
        double start;
        long long frame;
        int rank;  // dit < xfer < decode at equal start
        int worker;
        const char* stage;
        double end;
    };
    std::vector<Row> rows;
    rows.reserve(report.records.size() * 3);
    for (const auto& r : report.records) {
        if (r.t_dit_start_ms) {
            rows.push_back({*r.t_dit_start_ms, r.frame_id, 0, -1, "dit", *r.t_dit_end_ms});
        }
        rows.push_back({r.t_decode_start_ms, r.frame_id, 2, r.vae_worker, "decode",
                        r.t_decode_end_ms});
        // Dispatch-hop row, reconstructed from the display hop (same
        // overhead); the threshold ignores 1 ns in-order bumps.
        const double xfer = r.t_display_ms - r.t_decode_end_ms;
        if (xfer > 1e-4) {
            const double ready = r.t_dit_end_ms ? *r.t_dit_end_ms : r.t_input_ms;
            rows.push_back({ready, r.frame_id, 1, r.vae_worker, "xfer", ready + xfer});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.frame != b.frame) return a.frame < b.frame;
        return a.rank < b.rank;
    });
    std::string out = "frame_id,stage,worker,start_ms,end_ms\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%s,%d,%.6f,%.6f\n", row.frame, row.stage,
                      row.worker, row.start, row.end);
        out += buf;
    }
    return out;
}

void gantt_export(const SimReport& report, const std::string& path) {
    atomic_write_text(path, gantt_csv(report));
}

}  // namespace framepipe
