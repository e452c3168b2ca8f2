#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "framepipe/perfmodel.hpp"

namespace framepipe {

// One evaluated device split. `bottleneck` is the strict argmax tag;
// `table_label` is the conventional presentation label where the
// best-throughput split is reported as "Balanced".
struct SweepRow {
    int n_dit = 0;
    int n_vae = 0;
    std::string split;  // heads per generator device, e.g. "H/6"
    double t_dit_ms = 0.0;
    double t_vae_interval_ms = 0.0;
    double fps = 0.0;
    Bottleneck bottleneck = Bottleneck::balanced;
    std::string table_label;
};

struct AllocationPlan {
    int n_dit = 0;
    int n_vae = 0;
    double predicted_fps = 0.0;
    double t_dit_ms = 0.0;
    double t_vae_interval_ms = 0.0;
    Bottleneck bottleneck = Bottleneck::balanced;
    std::string table_label;
    std::vector<int> feasible_set;
};

// Generator device counts n_d with h_heads % n_d == 0 and
// min_dit <= n_d <= n_total - 1, ascending. Throws InfeasibleError when empty.
std::vector<int> feasible_splits(int h_heads, int n_total, int min_dit);

// One row per feasible split (the decoder gets the remaining devices).
std::vector<SweepRow> sweep(const HardwareProfile& hw, const WorkloadProfile& wl, int n_total,
                            int min_dit, EvalModes modes);

// Exhaustive argmax of predicted fps over the feasible set. Ties break toward
// larger n_vae (more decode headroom); deterministic.
AllocationPlan optimize(const HardwareProfile& hw, const WorkloadProfile& wl, int n_total,
                        int min_dit, EvalModes modes);

// CSV with header: config,split,dit_ms,vae_interval_ms,fps,bottleneck.
// The bottleneck column carries the table label; fps prints at 0.1 resolution.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);

}  // namespace framepipe
