#include "framepipe/jsonio.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "framepipe/errors.hpp"
#include "json_util.hpp"

namespace framepipe {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path);
    return buf.str();
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw IoError("cannot create directory for " + path + ": " + ec.message());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failure: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path + ": " + ec.message());
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace framepipe

namespace framepipe::detail {

json parse_json_strict(const std::string& text, const std::string& source) {
    std::vector<std::set<std::string>> object_keys;
    json::parser_callback_t cb = [&](int /*depth*/, json::parse_event_t event, json& parsed) {
        switch (event) {
            case json::parse_event_t::object_start:
                object_keys.emplace_back();
                break;
            case json::parse_event_t::object_end:
                object_keys.pop_back();
                break;
            case json::parse_event_t::key: {
                const auto key = parsed.get<std::string>();
                if (!object_keys.back().insert(key).second) {
                    throw ConfigError(source + ": duplicate key \"" + key + "\"");
                }
                break;
            }
            default:
                break;
        }
        return true;
    };
    try {
        return json::parse(text, cb, /*allow_exceptions=*/true, /*ignore_comments=*/false);
    } catch (const json::parse_error& e) {
        // e.what() already reports line and column.
        throw ConfigError(source + ": " + e.what());
    }
}

void fail_field(const std::string& path, const std::string& message) {
    throw ConfigError(path + ": " + message);
}

ObjectView::ObjectView(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail_field(path_, "expected a JSON object");
}

std::string ObjectView::key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
}

bool ObjectView::has(const std::string& key) const { return j_.contains(key); }

const json& ObjectView::require(const std::string& key, const char* type_name) {
    auto it = j_.find(key);
    if (it == j_.end()) fail_field(key_path(key), std::string("missing required ") + type_name);
    seen_.insert(key);
    return *it;
}

double ObjectView::num(const std::string& key) {
    const json& v = require(key, "number");
    if (!v.is_number()) fail_field(key_path(key), "expected a number");
    return v.get<double>();
}

double ObjectView::num_or(const std::string& key, double fallback) {
    if (!j_.contains(key)) return fallback;
    return num(key);
}

std::optional<double> ObjectView::num_opt(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    return num(key);
}

long long ObjectView::integer(const std::string& key) {
    const json& v = require(key, "integer");
    if (!v.is_number_integer()) fail_field(key_path(key), "expected an integer");
    return v.get<long long>();
}

long long ObjectView::integer_or(const std::string& key, long long fallback) {
    if (!j_.contains(key)) return fallback;
    return integer(key);
}

std::string ObjectView::str(const std::string& key) {
    const json& v = require(key, "string");
    if (!v.is_string()) fail_field(key_path(key), "expected a string");
    return v.get<std::string>();
}

std::string ObjectView::str_or(const std::string& key, const std::string& fallback) {
    if (!j_.contains(key)) return fallback;
    return str(key);
}

bool ObjectView::flag_or(const std::string& key, bool fallback) {
    if (!j_.contains(key)) return fallback;
    const json& v = require(key, "boolean");
    if (!v.is_boolean()) fail_field(key_path(key), "expected a boolean");
    return v.get<bool>();
}

const json& ObjectView::child(const std::string& key) { return require(key, "field"); }

const json* ObjectView::child_opt(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
}

std::vector<std::string> ObjectView::str_list(const std::string& key) {
    const json& v = require(key, "array of strings");
    if (!v.is_array()) fail_field(key_path(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) fail_field(key_path(key), "expected an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void ObjectView::finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (!seen_.count(it.key())) {
            fail_field(key_path(it.key()), "unknown field");
        }
    }
}

}  // namespace framepipe::detail
