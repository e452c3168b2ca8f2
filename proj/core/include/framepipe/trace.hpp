#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace framepipe {

struct ActionRecord {
    double t_ms = 0.0;
    std::string action;
};

// Ordered user-input stream consumed by the simulator, the speculative
// predictor, and the extrapolation policy.
struct ActionTrace {
    std::vector<ActionRecord> records;

    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }
    std::vector<std::string> actions() const;
    std::vector<std::string> alphabet() const;  // sorted, distinct
    void validate() const;                       // timestamps non-decreasing
};

enum class TraceModel { persistence, uniform, scripted };

struct TraceSpec {
    std::vector<std::string> alphabet;
    long long length = 0;
    TraceModel model = TraceModel::persistence;
    double switch_prob = 0.0;          // persistence: P(action changes between frames)
    std::vector<std::string> pattern;  // scripted: cycled to length
    double interval_ms = 0.0;          // t_ms = frame index * interval_ms

    void validate() const;
};

ActionTrace gen_trace(const TraceSpec& spec, std::uint64_t seed);

// JSONL, one {"t_ms": ..., "action": ...} object per line.
std::string to_jsonl(const ActionTrace& trace);
ActionTrace parse_jsonl(const std::string& text, const std::string& source);
ActionTrace load_trace(const std::string& path);
void save_trace(const ActionTrace& trace, const std::string& path);

}  // namespace framepipe
