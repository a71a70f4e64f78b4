#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "jobclass/common.hpp"

namespace jobclass {

// Shortest exact round-trip representation.
inline std::string fmt_double(double x) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

// Up to 17 significant digits; always round-trips exactly. Used for the
// model artifact where the file format pins the precision.
inline std::string fmt_double17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

inline bool parse_double(std::string_view s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline bool parse_int64(std::string_view s, std::int64_t& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_fields(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            std::string_view f = line.substr(start, i - start);
            if (!f.empty() && f.back() == '\r') f.remove_suffix(1);
            out.emplace_back(f);
            start = i + 1;
        }
    }
    return out;
}

// Flat "key = value" config file. '#' starts a comment, blank lines ignored.
class KvConfig {
  public:
    KvConfig() = default;

    static KvConfig parse_text(std::istream& in, const std::string& origin) {
        KvConfig cfg;
        cfg.origin_ = origin;
        std::string line;
        std::ostringstream canon;
        while (std::getline(in, line)) {
            std::string_view v{line};
            if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
            v = trim(v);
            if (v.empty()) continue;
            auto eq = v.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError(origin + ": expected 'key = value', got: " + std::string(v));
            std::string key{trim(v.substr(0, eq))};
            std::string val{trim(v.substr(eq + 1))};
            if (key.empty()) throw ConfigError(origin + ": empty key");
            cfg.values_[key] = val;
        }
        for (const auto& [k, val] : cfg.values_) canon << k << '=' << val << '\n';
        cfg.canonical_text_ = canon.str();
        return cfg;
    }

    static KvConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse_text(in, path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        double x;
        if (!parse_double(it->second, x)) throw ConfigError(origin_ + ": key '" + key + "' is not a number");
        return x;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::int64_t x;
        if (!parse_int64(it->second, x)) throw ConfigError(origin_ + ": key '" + key + "' is not an integer");
        return x;
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        for (auto& f : split_fields(it->second, ',')) {
            std::string t{trim(f)};
            if (!t.empty()) out.push_back(std::move(t));
        }
        return out;
    }

    const std::string& origin() const { return origin_; }

    // Key-sorted text; hashing this makes provenance independent of key order
    // and comments in the source file.
    const std::string& canonical_text() const { return canonical_text_; }

  private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    std::string canonical_text_;
};

// FNV-1a, stable across platforms; used for config provenance hashes.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(data)));
    return std::string(buf);
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace jobclass
