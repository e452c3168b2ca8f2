#include "framepipe/trace.hpp"

#include <algorithm>
#include <set>

#include "framepipe/errors.hpp"
#include "framepipe/jsonio.hpp"
#include "framepipe/rng.hpp"
#include "json_util.hpp"

namespace framepipe {

std::vector<std::string> ActionTrace::actions() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.action);
    return out;
}

std::vector<std::string> ActionTrace::alphabet() const {
    std::set<std::string> distinct;
    for (const auto& r : records) distinct.insert(r.action);
    return {distinct.begin(), distinct.end()};
}

void ActionTrace::validate() const {
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].t_ms < records[i - 1].t_ms) {
            throw ConfigError("trace timestamps must be non-decreasing (record " +
                              std::to_string(i) + ")");
        }
    }
}

void TraceSpec::validate() const {
    if (length < 1) throw ConfigError("trace length must be >= 1");
    if (interval_ms < 0.0) throw ConfigError("trace interval_ms must be >= 0");
    if (model == TraceModel::scripted) {
        if (pattern.empty()) throw ConfigError("scripted trace requires a non-empty pattern");
        return;
    }
    if (alphabet.empty()) throw ConfigError("trace alphabet must be non-empty");
    std::set<std::string> distinct(alphabet.begin(), alphabet.end());
    if (distinct.size() != alphabet.size()) {
        throw ConfigError("trace alphabet tokens must be distinct");
    }
    if (model == TraceModel::persistence && (switch_prob < 0.0 || switch_prob > 1.0)) {
        throw ConfigError("persistence switch probability must be in [0, 1]");
    }
}

ActionTrace gen_trace(const TraceSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    ActionTrace trace;
    trace.records.reserve(static_cast<std::size_t>(spec.length));
    const auto m = spec.alphabet.size();
    std::size_t current = 0;
    for (long long i = 0; i < spec.length; ++i) {
        std::string action;
        switch (spec.model) {
            case TraceModel::persistence:
                if (i > 0 && m > 1 && rng.bernoulli(spec.switch_prob)) {
                    // Jump to a uniformly chosen *different* token.
                    std::size_t offset = 1 + rng.below(m - 1);
                    current = (current + offset) % m;
                }
                action = spec.alphabet[current];
                break;
            case TraceModel::uniform:
                action = spec.alphabet[rng.below(m)];
                break;
            case TraceModel::scripted:
                action = spec.pattern[static_cast<std::size_t>(i) % spec.pattern.size()];
                break;
        }
        trace.records.push_back({static_cast<double>(i) * spec.interval_ms, std::move(action)});
    }
    return trace;
}

std::string to_jsonl(const ActionTrace& trace) {
    std::string out;
    for (const auto& r : trace.records) {
        out += "{\"t_ms\": ";
        out += format_double(r.t_ms);
        out += ", \"action\": ";
        out += detail::json(r.action).dump();
        out += "}\n";
    }
    return out;
}

ActionTrace parse_jsonl(const std::string& text, const std::string& source) {
    ActionTrace trace;
    std::size_t pos = 0;
    long long line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string where = source + ":" + std::to_string(line_no);
        detail::json j = detail::parse_json_strict(line, where);
        detail::ObjectView view(j, where);
        ActionRecord rec;
        rec.t_ms = view.num("t_ms");
        rec.action = view.str("action");
        view.finish();
        trace.records.push_back(std::move(rec));
    }
    trace.validate();
    return trace;
}

ActionTrace load_trace(const std::string& path) {
    return parse_jsonl(read_text_file(path), path);
}

void save_trace(const ActionTrace& trace, const std::string& path) {
    atomic_write_text(path, to_jsonl(trace));
}

}  // namespace framepipe
