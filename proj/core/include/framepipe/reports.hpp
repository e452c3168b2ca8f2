#pragma once

#include <string>
#include <vector>

#include "framepipe/allocator.hpp"
#include "framepipe/extrapolation.hpp"
#include "framepipe/memcost.hpp"
#include "framepipe/perfmodel.hpp"
#include "framepipe/simulator.hpp"
#include "framepipe/speculation.hpp"

namespace framepipe {

enum class MetricKind { latency, interval };

struct AblationRow {
    std::string stage;
    std::string architecture;
    double metric_ms = 0.0;
    MetricKind metric_kind = MetricKind::latency;
    double fps = 0.0;
    double speedup = 0.0;
};

struct AblationReport {
    std::vector<AblationRow> rows;
    double final_effective_latency_ms = 0.0;  // only with the speculative stage
    double cumulative_speedup = 1.0;
};

struct HistogramEntry {
    double value_ms = 0.0;
    long long count = 0;
};

// Exact-value buckets, ascending.
std::vector<HistogramEntry> value_histogram(const std::vector<double>& values);

std::string sim_report_json(const SimReport& report, bool include_records = false);
SimReport parse_sim_report(const std::string& text, const std::string& source);

std::string spec_report_json(const SpecReport& report);
std::vector<HistogramEntry> parse_spec_histogram(const std::string& text,
                                                 const std::string& source);

std::string ablation_report_json(const AblationReport& report);
AblationReport parse_ablation_report(const std::string& text, const std::string& source);
std::string ablation_table_csv(const AblationReport& report);

std::string extrap_report_json(const TraceRunResult& result, double tau, double lam);
std::string extrap_error_csv(const TraceRunResult& result);  // frame,decision,error

std::string fit_report_json(const FitResult& fit);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string plan_json(const AllocationPlan& plan);

std::string horizontal_report_json(const std::vector<HorizontalFusion>& groups);

// Plot-data exports.
std::string waterfall_csv(const AblationReport& report);            // stage,fps
std::string latency_hist_csv(const std::vector<HistogramEntry>& h);  // latency_ms,count

}  // namespace framepipe
