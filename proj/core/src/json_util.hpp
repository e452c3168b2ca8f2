#pragma once

// Internal strict-JSON helpers shared by the loaders. Not installed; the
// public API never exposes nlohmann types.

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "framepipe/errors.hpp"

namespace framepipe::detail {

using nlohmann::json;

// Parse rejecting duplicate keys; parse errors carry line/column and the
// source label (file path or "<inline>").
json parse_json_strict(const std::string& text, const std::string& source);

// Accessor for one JSON object that tracks consumed keys so finish() can
// reject unknown fields with a full path like "hardware.bw_hbm".
class ObjectView {
  public:
    ObjectView(const json& j, std::string path);

    bool has(const std::string& key) const;

    double num(const std::string& key);
    double num_or(const std::string& key, double fallback);
    std::optional<double> num_opt(const std::string& key);
    long long integer(const std::string& key);
    long long integer_or(const std::string& key, long long fallback);
    std::string str(const std::string& key);
    std::string str_or(const std::string& key, const std::string& fallback);
    bool flag_or(const std::string& key, bool fallback);
    const json& child(const std::string& key);              // required
    const json* child_opt(const std::string& key);          // nullptr when absent
    std::vector<std::string> str_list(const std::string& key);

    const std::string& path() const { return path_; }
    std::string key_path(const std::string& key) const;

    // Throws ConfigError naming any key never consumed.
    void finish();

  private:
    const json& require(const std::string& key, const char* type_name);
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

[[noreturn]] void fail_field(const std::string& path, const std::string& message);

}  // namespace framepipe::detail
