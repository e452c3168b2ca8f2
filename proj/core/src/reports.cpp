#include "framepipe/reports.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "framepipe/errors.hpp"
#include "framepipe/jsonio.hpp"
#include "json_util.hpp"

namespace framepipe {

using detail::ObjectView;
using detail::parse_json_strict;

namespace {

const char* metric_kind_name(MetricKind kind) {
    return kind == MetricKind::latency ? "latency" : "interval";
}

MetricKind metric_kind_from(const std::string& name, const std::string& where) {
    if (name == "latency") return MetricKind::latency;
    if (name == "interval") return MetricKind::interval;
    throw ConfigError(where + ": unknown metric kind '" + name + "'");
}

}  // namespace

std::vector<HistogramEntry> value_histogram(const std::vector<double>& values) {
    std::map<double, long long> buckets;
    for (double v : values) ++buckets[v];
    std::vector<HistogramEntry> out;
    out.reserve(buckets.size());
    for (const auto& [value, count] : buckets) out.push_back({value, count});
    return out;
}

std::string sim_report_json(const SimReport& report, bool include_records) {
    nlohmann::json j;
    j["fps"] = report.fps;
    j["effective_interval_ms"] = report.effective_interval_ms;
    j["mean_latency_ms"] = report.mean_latency_ms;
    j["p50_latency_ms"] = report.p50_latency_ms;
    j["p99_latency_ms"] = report.p99_latency_ms;
    j["dit_utilization"] = report.dit_utilization;
    j["worker_utilization"] = report.worker_utilization;
    j["total_frames"] = report.total_frames;
    j["warmup_frames"] = report.warmup_frames;
    j["skip_count"] = report.skip_count;
    if (include_records) {
        nlohmann::json records = nlohmann::json::array();
        for (const FrameRecord& r : report.records) {
            nlohmann::json rec;
            rec["frame_id"] = r.frame_id;
            rec["action"] = r.action;
            rec["t_input_ms"] = r.t_input_ms;
            if (r.t_dit_start_ms) rec["t_dit_start_ms"] = *r.t_dit_start_ms;
            if (r.t_dit_end_ms) rec["t_dit_end_ms"] = *r.t_dit_end_ms;
            rec["t_decode_start_ms"] = r.t_decode_start_ms;
            rec["t_decode_end_ms"] = r.t_decode_end_ms;
            rec["t_display_ms"] = r.t_display_ms;
            rec["vae_worker"] = r.vae_worker;
            rec["skipped"] = r.skipped;
            if (r.speculative_hit) rec["speculative_hit"] = *r.speculative_hit;
            records.push_back(std::move(rec));
        }
        j["records"] = std::move(records);
    }
    return j.dump(2) + "\n";
}

SimReport parse_sim_report(const std::string& text, const std::string& source) {
    nlohmann::json j = parse_json_strict(text, source);
    ObjectView root(j, source);
    SimReport report;
    report.fps = root.num("fps");
    report.effective_interval_ms = root.num("effective_interval_ms");
    report.mean_latency_ms = root.num("mean_latency_ms");
    report.p50_latency_ms = root.num("p50_latency_ms");
    report.p99_latency_ms = root.num("p99_latency_ms");
    report.dit_utilization = root.num("dit_utilization");
    report.total_frames = root.integer("total_frames");
    report.warmup_frames = root.integer("warmup_frames");
    report.skip_count = root.integer("skip_count");
    {
        const nlohmann::json& wu = root.child("worker_utilization");
        if (!wu.is_array()) throw ConfigError(source + ": worker_utilization must be an array");
        for (const auto& v : wu) {
            if (!v.is_number()) throw ConfigError(source + ": worker_utilization entries must be numbers");
            report.worker_utilization.push_back(v.get<double>());
        }
    }
    if (const nlohmann::json* records = root.child_opt("records")) {
        if (!records->is_array()) throw ConfigError(source + ": records must be an array");
        long long idx = 0;
        for (const auto& rj : *records) {
            std::string where = source + ": records[" + std::to_string(idx) + "]";
            ObjectView rv(rj, where);
            FrameRecord rec;
            rec.frame_id = rv.integer("frame_id");
            rec.action = rv.str("action");
            rec.t_input_ms = rv.num("t_input_ms");
            rec.t_dit_start_ms = rv.num_opt("t_dit_start_ms");
            rec.t_dit_end_ms = rv.num_opt("t_dit_end_ms");
            rec.t_decode_start_ms = rv.num("t_decode_start_ms");
            rec.t_decode_end_ms = rv.num("t_decode_end_ms");
            rec.t_display_ms = rv.num("t_display_ms");
            rec.vae_worker = static_cast<int>(rv.integer("vae_worker"));
            rec.skipped = rv.flag_or("skipped", false);
            if (rv.has("speculative_hit")) rec.speculative_hit = rv.flag_or("speculative_hit", false);
            rv.finish();
            report.records.push_back(std::move(rec));
            ++idx;
        }
    }
    root.finish();
    return report;
}

std::string spec_report_json(const SpecReport& report) {
    nlohmann::json j;
    j["frames"] = report.frames;
    j["hits"] = report.hits;
    j["hit_rate"] = report.hit_rate;
    j["mean_latency_ms"] = report.mean_latency_ms;
    j["p50_latency_ms"] = report.p50_latency_ms;
    j["p99_latency_ms"] = report.p99_latency_ms;
    j["amortized_model_ms"] = report.amortized_model_ms;
    j["t_sys_ms"] = report.t_sys_ms;
    j["t_overhead_ms"] = report.t_overhead_ms;
    nlohmann::json hist = nlohmann::json::array();
    for (const HistogramEntry& entry : value_histogram(report.latencies_ms)) {
        hist.push_back({{"latency_ms", entry.value_ms}, {"count", entry.count}});
    }
    j["histogram"] = std::move(hist);
    return j.dump(2) + "\n";
}

std::vector<HistogramEntry> parse_spec_histogram(const std::string& text,
                                                 const std::string& source) {
    nlohmann::json j = parse_json_strict(text, source);
    if (!j.is_object() || !j.contains("histogram"))
        throw ConfigError(source + ": missing histogram field");
    const nlohmann::json& hist = j.at("histogram");
    if (!hist.is_array()) throw ConfigError(source + ": histogram must be an array");
    std::vector<HistogramEntry> out;
    long long idx = 0;
    for (const auto& ej : hist) {
        std::string where = source + ": histogram[" + std::to_string(idx) + "]";
        ObjectView ev(ej, where);
        HistogramEntry entry;
        entry.value_ms = ev.num("latency_ms");
        entry.count = ev.integer("count");
        ev.finish();
        out.push_back(entry);
        ++idx;
    }
    return out;
}

std::string ablation_report_json(const AblationReport& report) {
    nlohmann::json j;
    nlohmann::json rows = nlohmann::json::array();
    for (const AblationRow& row : report.rows) {
        nlohmann::json rj;
        rj["stage"] = row.stage;
        rj["architecture"] = row.architecture;
        rj["metric_ms"] = row.metric_ms;
        rj["metric_kind"] = metric_kind_name(row.metric_kind);
        rj["fps"] = row.fps;
        rj["speedup"] = row.speedup;
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    j["final_effective_latency_ms"] = report.final_effective_latency_ms;
    j["cumulative_speedup"] = report.cumulative_speedup;
    return j.dump(2) + "\n";
}

AblationReport parse_ablation_report(const std::string& text, const std::string& source) {
    nlohmann::json j = parse_json_strict(text, source);
    ObjectView root(j, source);
    AblationReport report;
    const nlohmann::json& rows = root.child("rows");
    if (!rows.is_array()) throw ConfigError(source + ": rows must be an array");
    long long idx = 0;
    for (const auto& rj : rows) {
        std::string where = source + ": rows[" + std::to_string(idx) + "]";
        ObjectView rv(rj, where);
        AblationRow row;
        row.stage = rv.str("stage");
        row.architecture = rv.str("architecture");
        row.metric_ms = rv.num("metric_ms");
        row.metric_kind = metric_kind_from(rv.str("metric_kind"), where);
        row.fps = rv.num("fps");
        row.speedup = rv.num("speedup");
        rv.finish();
        report.rows.push_back(std::move(row));
        ++idx;
    }
    report.final_effective_latency_ms = root.num("final_effective_latency_ms");
    report.cumulative_speedup = root.num("cumulative_speedup");
    root.finish();
    return report;
}

std::string ablation_table_csv(const AblationReport& report) {
    std::string out = "stage,architecture,metric_ms,metric_kind,fps,speedup\n";
    char line[256];
    for (const AblationRow& row : report.rows) {
        std::snprintf(line, sizeof(line), "%s,%s,%.1f,%s,%.1f,%.2f\n", row.stage.c_str(),
                      row.architecture.c_str(), row.metric_ms, metric_kind_name(row.metric_kind),
                      row.fps, row.speedup);
        out += line;
    }
    return out;
}

std::string extrap_report_json(const TraceRunResult& result, double tau, double lam) {
    nlohmann::json j;
    j["frames"] = static_cast<long long>(result.decisions.size());
    j["hits"] = result.hits;
    j["skip_rate"] = result.skip_rate;
    j["tau"] = tau;
    j["lambda"] = lam;
    double max_err = 0.0;
    double sum_err = 0.0;
    for (double e : result.errors) {
        if (e > max_err) max_err = e;
        sum_err += e;
    }
    j["max_error"] = max_err;
    j["mean_error"] = result.errors.empty() ? 0.0 : sum_err / static_cast<double>(result.errors.size());
    return j.dump(2) + "\n";
}

std::string extrap_error_csv(const TraceRunResult& result) {
    std::string out = "frame,decision,error\n";
    for (std::size_t i = 0; i < result.decisions.size(); ++i) {
        out += std::to_string(i);
        out += result.decisions[i] == Decision::hit ? ",hit," : ",miss,";
        out += format_double(i < result.errors.size() ? result.errors[i] : 0.0);
        out += "\n";
    }
    return out;
}

std::string fit_report_json(const FitResult& fit) {
    nlohmann::json j;
    j["alpha_ms"] = fit.alpha_ms;
    j["beta_ms"] = fit.beta_ms;
    j["residuals_ms"] = fit.residuals_ms;
    return j.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    write_sweep_csv(rows, os);
    return os.str();
}

std::string plan_json(const AllocationPlan& plan) {
    nlohmann::json j;
    j["n_dit"] = plan.n_dit;
    j["n_vae"] = plan.n_vae;
    j["predicted_fps"] = plan.predicted_fps;
    j["t_dit_ms"] = plan.t_dit_ms;
    j["t_vae_interval_ms"] = plan.t_vae_interval_ms;
    j["bottleneck"] = to_string(plan.bottleneck);
    j["table_label"] = plan.table_label;
    j["feasible_n_dit"] = plan.feasible_set;
    return j.dump(2) + "\n";
}

std::string horizontal_report_json(const std::vector<HorizontalFusion>& groups) {
    nlohmann::json arr = nlohmann::json::array();
    for (const HorizontalFusion& g : groups) {
        nlohmann::json j;
        j["node_ids"] = g.node_ids;
        j["launches_before"] = g.launches_before;
        j["launches_after"] = g.launches_after;
        j["m"] = g.m_dim;
        j["k"] = g.k_dim;
        j["n_total"] = g.n_dim_total;
        j["per_op_ai"] = g.per_op_ai;
        j["ai_before"] = g.ai_before;
        j["ai_after"] = g.ai_after;
        arr.push_back(std::move(j));
    }
    return nlohmann::json{{"groups", std::move(arr)}}.dump(2) + "\n";
}

std::string waterfall_csv(const AblationReport& report) {
    std::string out = "stage,fps\n";
    char line[160];
    for (const AblationRow& row : report.rows) {
        std::snprintf(line, sizeof(line), "%s,%.1f\n", row.stage.c_str(), row.fps);
        out += line;
    }
    return out;
}

std::string latency_hist_csv(const std::vector<HistogramEntry>& h) {
    std::string out = "latency_ms,count\n";
    for (const HistogramEntry& entry : h) {
        out += format_double(entry.value_ms);
        out += ",";
        out += std::to_string(entry.count);
        out += "\n";
    }
    return out;
}

}  // namespace framepipe
