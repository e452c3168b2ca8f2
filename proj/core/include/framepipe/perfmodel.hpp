#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framepipe/errors.hpp"

namespace framepipe {

// Per-device hardware envelope. Units: FLOP/s, bytes/s, bytes.
struct HardwareProfile {
    double pi_peak = 0.0;   // peak FP16-equivalent compute throughput per device
    double bw_hbm = 0.0;    // per-device HBM bandwidth
    double b_link = 0.0;    // interconnect link bandwidth
    double s_sram = 0.0;    // on-chip buffer capacity
    double eta_util = 1.0;  // compute utilization fraction, (0, 1]
    double eta_eff = 1.0;   // bandwidth efficiency fraction, (0, 1]

    void validate() const;  // throws ConfigError
};

// Per-frame workload description plus optional profiled calibration.
struct WorkloadProfile {
    double w_dit = 0.0;   // FLOPs per frame per denoise pass
    double d_attn = 0.0;  // bytes exchanged in the attention all-to-all per frame
    double m_vae = 0.0;   // total decoder read+write bytes per frame
    int h_heads = 1;      // attention head count

    std::optional<double> alpha_ms;        // fitted single-device generator latency
    std::optional<double> beta_ms;         // fitted base all-to-all cost
    std::map<int, double> profiled_dit;    // device count -> measured step time (ms)
    std::optional<double> t_vae_single_ms; // measured single-device decode time (ms)

    void validate() const;  // throws ConfigError
};

enum class DitMode { analytic, profiled };
enum class VaeMode { analytic, profiled_interval };

struct EvalModes {
    DitMode dit = DitMode::profiled;
    VaeMode vae = VaeMode::profiled_interval;
};

enum class Bottleneck { dit_compute, dit_comm, vae_memory, balanced };

std::string to_string(Bottleneck b);

// Compute time of the generator stage across n_d devices (ideal scaling), ms.
double t_comp_ms(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d);

// Ring all-to-all cost for the head exchange, ms. Zero for a single device,
// monotone increasing in n_d, bounded by 2*d_attn/b_link.
double t_comm_ms(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d);

// Generator step time: analytic alpha/n + beta*(n-1)/n, or profiled lookup.
double t_dit_ms(const WorkloadProfile& wl, int n_d, DitMode mode);

// Decoder per-frame output interval across n_v workers, ms. In
// profiled_interval mode the decoder dispatches whole frames round-robin:
// the interval divides by n_v while single-frame latency stays constant.
double t_vae_ms(const WorkloadProfile& wl, const HardwareProfile& hw, int n_v, VaeMode mode);

struct FpsResult {
    double fps = 0.0;
    double t_dit_ms = 0.0;
    double t_vae_interval_ms = 0.0;
    Bottleneck bottleneck = Bottleneck::balanced;
};

// Steady-state throughput is set by the slower stage:
// fps = 1000 / max(t_dit, t_vae_interval).
FpsResult fps(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d, int n_v,
              EvalModes modes);

struct FitSample {
    int n_d = 0;
    double measured_ms = 0.0;
};

struct FitResult {
    double alpha_ms = 0.0;
    double beta_ms = 0.0;
    std::vector<double> residuals_ms;  // measured - predicted, per input sample
};

// Least-squares fit of t(n) = alpha/n + beta*(n-1)/n. Exact for two samples
// with distinct n; throws FitError when the system is rank deficient.
FitResult fit_alpha_beta(const std::vector<FitSample>& samples);

// Classify which stage (and which component of the generator stage) limits
// throughput. |t_dit - t_vae| < 1 ms counts as balanced. The generator side
// is split into compute vs. communication using alpha/beta when available,
// else Eqs for w_dit/d_attn, else an internal fit of the profiled table.
Bottleneck classify_bottleneck(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d,
                               double t_dit, double t_vae_interval);

}  // namespace framepipe
