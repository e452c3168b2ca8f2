#include "framepipe/perfmodel.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace framepipe {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("hardware profile field must be positive: ") + name);
    }
}

}  // namespace

void HardwareProfile::validate() const {
    require_positive(pi_peak, "pi_peak");
    require_positive(bw_hbm, "bw_hbm");
    require_positive(b_link, "b_link");
    require_positive(s_sram, "s_sram");
    require_positive(eta_util, "eta_util");
    require_positive(eta_eff, "eta_eff");
    if (eta_util > 1.0) throw ConfigError("eta_util must be <= 1");
    if (eta_eff > 1.0) throw ConfigError("eta_eff must be <= 1");
}

void WorkloadProfile::validate() const {
    if (h_heads < 1) throw ConfigError("h_heads must be >= 1");
    if (w_dit < 0.0 || d_attn < 0.0 || m_vae < 0.0) {
        throw ConfigError("workload volumes must be non-negative");
    }
    if (alpha_ms.has_value() != beta_ms.has_value()) {
        throw ConfigError("alpha_ms and beta_ms must be given together");
    }
    if (alpha_ms && (*alpha_ms < 0.0 || *beta_ms < 0.0)) {
        throw ConfigError("alpha_ms/beta_ms must be non-negative");
    }
    for (const auto& [n_d, ms] : profiled_dit) {
        if (n_d < 1) throw ConfigError("profiled_dit device counts must be >= 1");
        if (ms <= 0.0) throw ConfigError("profiled_dit entries must be positive");
    }
    if (t_vae_single_ms && *t_vae_single_ms <= 0.0) {
        throw ConfigError("t_vae_single_ms must be positive");
    }
}

std::string to_string(Bottleneck b) {
    switch (b) {
        case Bottleneck::dit_compute: return "DiT-Compute";
        case Bottleneck::dit_comm: return "DiT-Comm";
        case Bottleneck::vae_memory: return "VAE-Memory";
        case Bottleneck::balanced: return "Balanced";
    }
    return "?";
}

double t_comp_ms(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d) {
    if (n_d < 1) throw std::invalid_argument("t_comp: device count must be >= 1");
    return 1000.0 * wl.w_dit / (static_cast<double>(n_d) * hw.pi_peak * hw.eta_util);
}

double t_comm_ms(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d) {
    if (n_d < 1) throw std::invalid_argument("t_comm: device count must be >= 1");
    double n = static_cast<double>(n_d);
    return 1000.0 * (2.0 * (n - 1.0) / n) * (wl.d_attn / hw.b_link);
}

double t_dit_ms(const WorkloadProfile& wl, int n_d, DitMode mode) {
    if (n_d < 1) throw std::invalid_argument("t_dit: device count must be >= 1");
    if (mode == DitMode::analytic) {
        if (!wl.alpha_ms || !wl.beta_ms) {
            throw ConfigError("t_dit analytic mode requires alpha_ms and beta_ms");
        }
        double n = static_cast<double>(n_d);
        return *wl.alpha_ms / n + *wl.beta_ms * (n - 1.0) / n;
    }
    auto it = wl.profiled_dit.find(n_d);
    if (it == wl.profiled_dit.end()) {
        std::ostringstream os;
        os << "t_dit profiled mode: no measurement for n_d=" << n_d;
        throw ConfigError(os.str());
    }
    return it->second;
}

double t_vae_ms(const WorkloadProfile& wl, const HardwareProfile& hw, int n_v, VaeMode mode) {
    if (n_v < 1) throw std::invalid_argument("t_vae: device count must be >= 1");
    if (mode == VaeMode::analytic) {
        return 1000.0 * wl.m_vae / (static_cast<double>(n_v) * hw.bw_hbm * hw.eta_eff);
    }
    if (!wl.t_vae_single_ms) {
        throw ConfigError("t_vae profiled_interval mode requires t_vae_single_ms");
    }
    return *wl.t_vae_single_ms / static_cast<double>(n_v);
}

namespace {

// Split a generator-bound step time into compute vs. communication shares.
// Preference order: fitted alpha/beta, volumes (w_dit/d_attn), least-squares
// fit of the profiled table. Falls back to compute-bound when nothing is
// available to decompose with.
Bottleneck classify_dit_side(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d) {
    double comp = -1.0, comm = -1.0;
    if (wl.alpha_ms && wl.beta_ms) {
        double n = static_cast<double>(n_d);
        comp = *wl.alpha_ms / n;
        comm = *wl.beta_ms * (n - 1.0) / n;
    } else if (wl.w_dit > 0.0) {
        comp = t_comp_ms(hw, wl, n_d);
        comm = t_comm_ms(hw, wl, n_d);
    } else {
        std::set<int> distinct;
        for (const auto& [n, ms] : wl.profiled_dit) distinct.insert(n);
        if (distinct.size() >= 2) {
            std::vector<FitSample> samples;
            for (const auto& [n, ms] : wl.profiled_dit) samples.push_back({n, ms});
            FitResult fit = fit_alpha_beta(samples);
            double n = static_cast<double>(n_d);
            comp = fit.alpha_ms / n;
            comm = fit.beta_ms * (n - 1.0) / n;
        }
    }
    if (comp < 0.0) return Bottleneck::dit_compute;
    return comp >= comm ? Bottleneck::dit_compute : Bottleneck::dit_comm;
}

}  // namespace

Bottleneck classify_bottleneck(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d,
                               double t_dit, double t_vae_interval) {
    if (std::abs(t_dit - t_vae_interval) < 1.0) return Bottleneck::balanced;
    if (t_vae_interval > t_dit) return Bottleneck::vae_memory;
    return classify_dit_side(hw, wl, n_d);
}

FpsResult fps(const HardwareProfile& hw, const WorkloadProfile& wl, int n_d, int n_v,
              EvalModes modes) {
    if (n_d < 1 || n_v < 1) throw std::invalid_argument("fps: device counts must be >= 1");
    FpsResult r;
    r.t_dit_ms = t_dit_ms(wl, n_d, modes.dit);
    r.t_vae_interval_ms = t_vae_ms(wl, hw, n_v, modes.vae);
    double interval = std::max(r.t_dit_ms, r.t_vae_interval_ms);
    r.fps = 1000.0 / interval;
    r.bottleneck = classify_bottleneck(hw, wl, n_d, r.t_dit_ms, r.t_vae_interval_ms);
    return r;
}

FitResult fit_alpha_beta(const std::vector<FitSample>& samples) {
    if (samples.size() < 2) throw FitError("fit_alpha_beta needs at least 2 samples");
    std::set<int> distinct;
    for (const auto& s : samples) {
        if (s.n_d < 1) throw FitError("fit_alpha_beta: device counts must be >= 1");
        distinct.insert(s.n_d);
    }
    if (distinct.size() < 2) {
        throw FitError("fit_alpha_beta: rank-deficient system, all samples share one n_d");
    }

    // Normal equations for t = alpha*u + beta*v with u = 1/n, v = (n-1)/n.
    double suu = 0.0, suv = 0.0, svv = 0.0, sut = 0.0, svt = 0.0;
    for (const auto& s : samples) {
        double n = static_cast<double>(s.n_d);
        double u = 1.0 / n;
        double v = (n - 1.0) / n;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        sut += u * s.measured_ms;
        svt += v * s.measured_ms;
    }
    double det = suu * svv - suv * suv;
    if (std::abs(det) < 1e-12) {
        throw FitError("fit_alpha_beta: rank-deficient system");
    }
    FitResult out;
    out.alpha_ms = (sut * svv - svt * suv) / det;
    out.beta_ms = (svt * suu - sut * suv) / det;
    out.residuals_ms.reserve(samples.size());
    for (const auto& s : samples) {
        double n = static_cast<double>(s.n_d);
        double predicted = out.alpha_ms / n + out.beta_ms * (n - 1.0) / n;
        out.residuals_ms.push_back(s.measured_ms - predicted);
    }
    return out;
}

}  // namespace framepipe
