#include "framepipe/allocator.hpp"

#include <cstdio>
#include <ostream>

namespace framepipe {

namespace {

// Presentation name for a strict bottleneck tag.
std::string table_name(Bottleneck b) {
    switch (b) {
        case Bottleneck::dit_compute: return "DiT (Compute)";
        case Bottleneck::dit_comm: return "DiT (Comm.)";
        case Bottleneck::vae_memory: return "VAE (Memory)";
        case Bottleneck::balanced: return "Balanced";
    }
    return "?";
}

std::size_t best_row(const std::vector<SweepRow>& rows) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        // Strict > keeps the earlier (larger n_vae) row on ties.
        if (rows[i].fps > rows[best].fps) best = i;
    }
    return best;
}

}  // namespace

std::vector<int> feasible_splits(int h_heads, int n_total, int min_dit) {
    if (h_heads < 1) throw ConfigError("feasible_splits: h_heads must be >= 1");
    if (n_total < 2) throw ConfigError("feasible_splits: n_total must be >= 2");
    if (min_dit < 1) throw ConfigError("feasible_splits: min_dit must be >= 1");
    std::vector<int> out;
    for (int n = min_dit; n <= n_total - 1; ++n) {
        if (h_heads % n == 0) out.push_back(n);
    }
    if (out.empty()) {
        throw InfeasibleError("no generator device count divides the head count within [" +
                              std::to_string(min_dit) + ", " + std::to_string(n_total - 1) + "]");
    }
    return out;
}

std::vector<SweepRow> sweep(const HardwareProfile& hw, const WorkloadProfile& wl, int n_total,
                            int min_dit, EvalModes modes) {
    hw.validate();
    wl.validate();
    std::vector<SweepRow> rows;
    for (int n_d : feasible_splits(wl.h_heads, n_total, min_dit)) {
        int n_v = n_total - n_d;
        FpsResult r = fps(hw, wl, n_d, n_v, modes);
        SweepRow row;
        row.n_dit = n_d;
        row.n_vae = n_v;
        row.split = "H/" + std::to_string(wl.h_heads / n_d);
        row.t_dit_ms = r.t_dit_ms;
        row.t_vae_interval_ms = r.t_vae_interval_ms;
        row.fps = r.fps;
        row.bottleneck = r.bottleneck;
        rows.push_back(row);
    }
    std::size_t best = best_row(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].table_label = (i == best) ? "Balanced" : table_name(rows[i].bottleneck);
    }
    return rows;
}

AllocationPlan optimize(const HardwareProfile& hw, const WorkloadProfile& wl, int n_total,
                        int min_dit, EvalModes modes) {
    std::vector<SweepRow> rows = sweep(hw, wl, n_total, min_dit, modes);
    const SweepRow& r = rows[best_row(rows)];
    AllocationPlan plan;
    plan.n_dit = r.n_dit;
    plan.n_vae = r.n_vae;
    plan.predicted_fps = r.fps;
    plan.t_dit_ms = r.t_dit_ms;
    plan.t_vae_interval_ms = r.t_vae_interval_ms;
    plan.bottleneck = r.bottleneck;
    plan.table_label = r.table_label;
    for (const SweepRow& row : rows) plan.feasible_set.push_back(row.n_dit);
    return plan;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "config,split,dit_ms,vae_interval_ms,fps,bottleneck\n";
    char buf[128];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d DiT + %d VAE,%s,%.3f,%.3f,%.1f,%s\n", r.n_dit,
                      r.n_vae, r.split.c_str(), r.t_dit_ms, r.t_vae_interval_ms, r.fps,
                      r.table_label.c_str());
        os << buf;
    }
}

}  // namespace framepipe
