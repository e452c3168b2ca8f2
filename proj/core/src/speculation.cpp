#include "framepipe/speculation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "framepipe/errors.hpp"
#include "framepipe/rng.hpp"

namespace framepipe {

namespace {

double nearest_rank(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    auto n = values.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (idx == 0) idx = 1;
    if (idx > n) idx = n;
    return values[idx - 1];
}

void summarize(SpecReport& r) {
    r.hit_rate = r.frames > 0 ? static_cast<double>(r.hits) / static_cast<double>(r.frames) : 0.0;
    double sum = 0.0;
    for (double v : r.latencies_ms) sum += v;
    r.mean_latency_ms = r.frames > 0 ? sum / static_cast<double>(r.frames) : 0.0;
    r.p50_latency_ms = nearest_rank(r.latencies_ms, 0.50);
    r.p99_latency_ms = nearest_rank(r.latencies_ms, 0.99);
    r.amortized_model_ms = amortized_latency(r.hit_rate, r.t_sys_ms, r.t_overhead_ms);
}

}  // namespace

PredictorKind predictor_from_string(const std::string& name) {
    std::string base = name.substr(0, name.find(':'));
    if (base == "markov") return PredictorKind::markov;
    if (base == "bernoulli" || base == "scripted_bernoulli") {
        return PredictorKind::scripted_bernoulli;
    }
    if (base == "oracle") return PredictorKind::oracle;
    if (base == "anti_oracle") return PredictorKind::anti_oracle;
    throw ConfigError("unknown predictor: " + name);
}

int predictor_order_from_string(const std::string& name) {
    auto colon = name.find(':');
    if (colon == std::string::npos) return 1;
    try {
        int k = std::stoi(name.substr(colon + 1));
        if (k < 1) throw ConfigError("predictor order must be >= 1: " + name);
        return k;
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad predictor order: " + name);
    } catch (const std::out_of_range&) {
        throw ConfigError("bad predictor order: " + name);
    }
}

void SpecConfig::validate() const {
    if (order < 1) throw ConfigError("speculation: markov order must be >= 1");
    if (p_hit < 0.0 || p_hit > 1.0) throw ConfigError("speculation: p_hit must be in [0, 1]");
    if (t_overhead_ms < 0.0) throw ConfigError("speculation: t_overhead_ms must be >= 0");
}

MarkovPredictor::MarkovPredictor(int order, std::vector<std::string> alphabet)
    : order_(order), alphabet_(std::move(alphabet)) {
    if (order_ < 1) throw ConfigError("markov predictor order must be >= 1");
    if (alphabet_.empty()) throw ConfigError("markov predictor needs a non-empty alphabet");
}

std::string MarkovPredictor::predict() const {
    if (history_.empty()) return alphabet_.front();
    auto it = counts_.find(history_);
    if (it == counts_.end()) return *last_;
    const std::string* best = nullptr;
    long long best_count = 0;
    for (const auto& [token, count] : it->second) {
        // Strict > keeps the lexicographically first token on ties
        // (std::map iterates in token order).
        if (count > best_count) {
            best = &token;
            best_count = count;
        }
    }
    return *best;
}

void MarkovPredictor::observe(const std::string& action) {
    counts_[history_][action] += 1;
    history_.push_back(action);
    if (history_.size() > static_cast<std::size_t>(order_)) {
        history_.erase(history_.begin());
    }
    last_ = action;
}

double amortized_latency(double p_hit, double t_sys_ms, double t_overhead_ms) {
    if (p_hit < 0.0 || p_hit > 1.0) throw std::invalid_argument("p_hit must be in [0, 1]");
    if (t_sys_ms < 0.0 || t_overhead_ms < 0.0) {
        throw std::invalid_argument("latencies must be >= 0");
    }
    return p_hit * t_overhead_ms + (1.0 - p_hit) * (t_sys_ms + t_overhead_ms);
}

double hit_rate(MarkovPredictor predictor, const ActionTrace& trace) {
    if (trace.size() < 2) throw InsufficientDataError("hit_rate needs a trace of length >= 2");
    long long hits = 0;
    predictor.observe(trace.records.front().action);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (predictor.predict() == trace.records[i].action) ++hits;
        predictor.observe(trace.records[i].action);
    }
    return static_cast<double>(hits) / static_cast<double>(trace.size() - 1);
}

SpecReport speculative_eval(const SpecConfig& cfg, const ActionTrace& trace, double t_sys_ms,
                            long long frames) {
    cfg.validate();
    if (t_sys_ms < 0.0) throw ConfigError("speculation: t_sys_ms must be >= 0");

    SpecReport report;
    report.t_sys_ms = t_sys_ms;
    report.t_overhead_ms = cfg.t_overhead_ms;

    std::vector<bool> hits;
    if (cfg.predictor == PredictorKind::markov) {
        if (trace.size() < 2) {
            throw InsufficientDataError("markov evaluation needs a trace of length >= 2");
        }
        MarkovPredictor predictor(cfg.order, trace.alphabet());
        predictor.observe(trace.records.front().action);
        for (std::size_t i = 1; i < trace.size(); ++i) {
            hits.push_back(predictor.predict() == trace.records[i].action);
            predictor.observe(trace.records[i].action);
        }
        if (frames > 0 && frames < static_cast<long long>(hits.size())) {
            hits.resize(static_cast<std::size_t>(frames));
        }
    } else {
        long long count = frames;
        if (count <= 0) {
            if (trace.size() < 2) {
                throw ConfigError("speculation: frame count required without a trace");
            }
            count = static_cast<long long>(trace.size()) - 1;
        }
        Rng rng(cfg.seed);
        for (long long i = 0; i < count; ++i) {
            switch (cfg.predictor) {
                case PredictorKind::scripted_bernoulli:
                    hits.push_back(rng.bernoulli(cfg.p_hit));
                    break;
                case PredictorKind::oracle:
                    hits.push_back(true);
                    break;
                case PredictorKind::anti_oracle:
                    hits.push_back(false);
                    break;
                case PredictorKind::markov:
                    break;  // unreachable
            }
        }
    }

    report.frames = static_cast<long long>(hits.size());
    report.latencies_ms.reserve(hits.size());
    for (bool hit : hits) {
        if (hit) ++report.hits;
        report.latencies_ms.push_back(hit ? cfg.t_overhead_ms
                                          : t_sys_ms + cfg.t_overhead_ms);
    }
    summarize(report);
    return report;
}

SimReport speculative_run(const SimConfig& sim, const SpecConfig& cfg, const ActionTrace& trace,
                          SpecReport* stats) {
    cfg.validate();
    SimReport report = run(sim, trace);

    std::optional<MarkovPredictor> predictor;
    if (cfg.predictor == PredictorKind::markov) {
        if (trace.size() < 2) {
            throw InsufficientDataError("markov evaluation needs a trace of length >= 2");
        }
        predictor.emplace(cfg.order, trace.alphabet());
        predictor->observe(trace.records.front().action);
    }
    Rng rng(cfg.seed);

    SpecReport spec;
    spec.t_overhead_ms = cfg.t_overhead_ms;
    double sys_sum = 0.0;
    for (std::size_t i = 1; i < report.records.size(); ++i) {
        FrameRecord& rec = report.records[i];
        bool hit = false;
        switch (cfg.predictor) {
            case PredictorKind::markov:
                if (i < trace.size()) {
                    hit = predictor->predict() == trace.records[i].action;
                    predictor->observe(trace.records[i].action);
                }
                break;
            case PredictorKind::scripted_bernoulli:
                hit = rng.bernoulli(cfg.p_hit);
                break;
            case PredictorKind::oracle:
                hit = true;
                break;
            case PredictorKind::anti_oracle:
                hit = false;
                break;
        }
        rec.speculative_hit = hit;
        const double t_sys = rec.t_display_ms - rec.t_input_ms;
        sys_sum += t_sys;
        if (hit) ++spec.hits;
        spec.latencies_ms.push_back(hit ? cfg.t_overhead_ms : t_sys + cfg.t_overhead_ms);
    }
    spec.frames = static_cast<long long>(spec.latencies_ms.size());
    spec.t_sys_ms = spec.frames > 0 ? sys_sum / static_cast<double>(spec.frames) : 0.0;
    summarize(spec);
    if (stats) *stats = spec;
    return report;
}

}  // namespace framepipe
