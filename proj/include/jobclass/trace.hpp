#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "jobclass/common.hpp"
#include "jobclass/textio.hpp"

namespace jobclass {

// Column mapping for a delimited job trace. The finish column may be left
// unmapped for prediction-time traces that carry no runtimes.
struct SchemaConfig {
    char delimiter = ',';
    std::string submit_col;
    std::string start_col;
    std::string finish_col;  // empty -> trace has no runtimes
    std::string iterations_col;
    std::vector<std::string> categorical_cols;

    bool has_finish() const { return !finish_col.empty(); }

    static SchemaConfig from_kv(const KvConfig& kv) {
        SchemaConfig s;
        std::string d = kv.get("delimiter", ",");
        if (d == "\\t" || d == "tab")
            s.delimiter = '\t';
        else if (d.size() == 1)
            s.delimiter = d[0];
        else
            throw ConfigError(kv.origin() + ": delimiter must be a single character");
        s.submit_col = kv.require("submit_column");
        s.start_col = kv.require("start_column");
        s.finish_col = kv.get("finish_column", "");
        s.iterations_col = kv.require("iterations_column");
        s.categorical_cols = kv.get_list("categorical_columns");
        if (s.categorical_cols.empty())
            throw ConfigError(kv.origin() + ": categorical_columns must name at least one column");
        return s;
    }

    static SchemaConfig load(const std::string& path) { return from_kv(KvConfig::load(path)); }
};

// Day of week 1..7 with 1 = Sunday, UTC. 1970-01-01 was a Thursday.
inline int day_of_week_utc(double epoch_seconds) {
    auto secs = static_cast<std::int64_t>(std::floor(epoch_seconds));
    std::int64_t days = secs / 86400 - ((secs % 86400) < 0 ? 1 : 0);
    int dow = static_cast<int>(((days + 4) % 7 + 7) % 7);
    return dow + 1;
}

// Hour of day 0..23, UTC.
inline int hour_of_day_utc(double epoch_seconds) {
    auto secs = static_cast<std::int64_t>(std::floor(epoch_seconds));
    std::int64_t rem = (secs % 86400 + 86400) % 86400;
    return static_cast<int>(rem / 3600);
}

struct TemporalFeatures {
    int submit_day = -1;
    int submit_hour = -1;
    int start_day = -1;
    int start_hour = -1;
    int finish_day = -1;  // -1 when the trace has no finish times
    int finish_hour = -1;

    bool operator==(const TemporalFeatures&) const = default;
};

inline TemporalFeatures derive_temporal(double submit, double start, double finish) {
    TemporalFeatures t;
    t.submit_day = day_of_week_utc(submit);
    t.submit_hour = hour_of_day_utc(submit);
    t.start_day = day_of_week_utc(start);
    t.start_hour = hour_of_day_utc(start);
    if (std::isfinite(finish)) {
        t.finish_day = day_of_week_utc(finish);
        t.finish_hour = hour_of_day_utc(finish);
    }
    return t;
}

struct JobRecord {
    double submit_time = 0;
    double start_time = 0;
    double finish_time = std::numeric_limits<double>::quiet_NaN();
    std::int64_t iterations = 1;
    // Aligned with the schema's categorical column order; "" encodes MISSING
    // (an empty field can never be a real token).
    std::vector<std::string> categoricals;
    TemporalFeatures temporal;
    double runtime_log2 = std::numeric_limits<double>::quiet_NaN();

    bool has_runtime() const { return std::isfinite(runtime_log2); }
};

inline const std::string kMissingToken = "";

struct ParseReport {
    std::uint64_t total_rows = 0;
    std::uint64_t accepted = 0;
    std::uint64_t wrong_column_count = 0;
    std::uint64_t bad_timestamp = 0;
    std::uint64_t bad_iterations = 0;
    std::uint64_t nonpositive_runtime = 0;
    std::uint64_t clamped_runtime = 0;  // sub-second runtimes clamped to 1 s (still accepted)

    std::uint64_t rejected() const {
        return wrong_column_count + bad_timestamp + bad_iterations + nonpositive_runtime;
    }

    void to_text(std::ostream& os) const {
        os << "total_rows " << total_rows << '\n'
           << "accepted " << accepted << '\n'
           << "rejected " << rejected() << '\n'
           << "wrong_column_count " << wrong_column_count << '\n'
           << "bad_timestamp " << bad_timestamp << '\n'
           << "bad_iterations " << bad_iterations << '\n'
           << "nonpositive_runtime " << nonpositive_runtime << '\n'
           << "clamped_runtime " << clamped_runtime << '\n';
    }
};

struct Trace {
    std::vector<std::string> categorical_names;
    std::vector<JobRecord> records;
    bool has_finish = true;

    std::size_t size() const { return records.size(); }
};

struct ParseResult {
    Trace trace;
    ParseReport report;
};

// Single-pass parse of a header-bearing delimited trace. Row-level defects
// are counted, never fatal; a schema column absent from the header is fatal.
// Lines starting with '#' are skipped (provenance comments).
inline ParseResult parse_trace(std::istream& in, const SchemaConfig& schema) {
    if (!in) throw IoError("unreadable trace stream");

    std::string line;
    do {
        if (!std::getline(in, line)) throw IoError("trace has no header line");
    } while (!line.empty() && line[0] == '#');

    const auto header = split_fields(line, schema.delimiter);
    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) col_index.emplace(header[i], i);

    auto lookup = [&](const std::string& name) -> std::size_t {
        auto it = col_index.find(name);
        if (it == col_index.end()) throw ConfigError("schema column not present in trace header: " + name);
        return it->second;
    };

    const std::size_t submit_i = lookup(schema.submit_col);
    const std::size_t start_i = lookup(schema.start_col);
    const std::size_t finish_i = schema.has_finish() ? lookup(schema.finish_col) : 0;
    const std::size_t iter_i = lookup(schema.iterations_col);
    std::vector<std::size_t> cat_i;
    cat_i.reserve(schema.categorical_cols.size());
    for (const auto& c : schema.categorical_cols) cat_i.push_back(lookup(c));

    ParseResult out;
    out.trace.categorical_names = schema.categorical_cols;
    out.trace.has_finish = schema.has_finish();
    ParseReport& rep = out.report;

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        if (line.empty()) continue;
        ++rep.total_rows;
        const auto fields = split_fields(line, schema.delimiter);
        if (fields.size() != header.size()) {
            ++rep.wrong_column_count;
            continue;
        }

        JobRecord rec;
        if (!parse_double(fields[submit_i], rec.submit_time) || !std::isfinite(rec.submit_time) ||
            !parse_double(fields[start_i], rec.start_time) || !std::isfinite(rec.start_time)) {
            ++rep.bad_timestamp;
            continue;
        }
        if (schema.has_finish()) {
            if (!parse_double(fields[finish_i], rec.finish_time) || !std::isfinite(rec.finish_time)) {
                ++rep.bad_timestamp;
                continue;
            }
        }
        if (!parse_int64(fields[iter_i], rec.iterations) || rec.iterations < 1) {
            ++rep.bad_iterations;
            continue;
        }
        if (schema.has_finish()) {
            double runtime = rec.finish_time - rec.start_time;
            if (!(runtime > 0)) {
                ++rep.nonpositive_runtime;
                continue;
            }
            if (runtime < 1.0) {
                runtime = 1.0;
                ++rep.clamped_runtime;
            }
            rec.runtime_log2 = std::log2(runtime);
        }

        rec.categoricals.reserve(cat_i.size());
        for (std::size_t ci : cat_i) rec.categoricals.push_back(fields[ci]);
        rec.temporal = derive_temporal(rec.submit_time, rec.start_time, rec.finish_time);

        out.trace.records.push_back(std::move(rec));
        ++rep.accepted;
    }
    return out;
}

// Canonical delimited form: comma separated, schema column names, shortest
// round-trip numbers. Re-parsing with the same schema reproduces the records.
inline void write_trace(const Trace& trace, const SchemaConfig& schema, std::ostream& os,
                        const std::string& provenance = "") {
    if (!provenance.empty()) os << "# " << provenance << '\n';
    os << schema.submit_col << ',' << schema.start_col;
    if (trace.has_finish) os << ',' << schema.finish_col;
    os << ',' << schema.iterations_col;
    for (const auto& c : trace.categorical_names) os << ',' << c;
    os << '\n';
    for (const auto& r : trace.records) {
        os << fmt_double(r.submit_time) << ',' << fmt_double(r.start_time);
        if (trace.has_finish) os << ',' << fmt_double(r.finish_time);
        os << ',' << r.iterations;
        for (const auto& tok : r.categoricals) os << ',' << tok;
        os << '\n';
    }
}

struct VariableSummary {
    std::map<std::string, std::uint64_t> category_counts;
    std::uint64_t missing = 0;

    std::uint64_t categories() const { return category_counts.size(); }
};

struct TraceSummary {
    std::uint64_t record_count = 0;
    std::map<std::string, VariableSummary> variables;
    // (label, value) pairs in display order: min, q25, q50, q75, q90, q99, max
    std::vector<std::pair<std::string, double>> runtime_raw;
    std::vector<std::pair<std::string, double>> runtime_log2;

    void to_text(std::ostream& os) const {
        os << "record_count " << record_count << '\n';
        for (const auto& [name, v] : variables)
            os << "variable." << name << ".categories " << v.categories() << '\n'
               << "variable." << name << ".missing " << v.missing << '\n';
        for (const auto& [label, value] : runtime_raw) os << "runtime_seconds." << label << ' ' << fmt_double(value) << '\n';
        for (const auto& [label, value] : runtime_log2) os << "runtime_log2." << label << ' ' << fmt_double(value) << '\n';
    }
};

// Nearest-rank quantile on a sorted sample: value at rank ceil(p*n), 1-based.
inline double quantile_nearest_rank(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw EmptyDataset("quantile of empty sample");
    if (p <= 0.0) return sorted.front();
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
    rank = std::min(std::max<std::size_t>(rank, 1), sorted.size());
    return sorted[rank - 1];
}

inline TraceSummary summarize(const Trace& trace) {
    if (trace.records.empty()) throw EmptyDataset("summarize: empty dataset");
    TraceSummary s;
    s.record_count = trace.records.size();
    for (std::size_t v = 0; v < trace.categorical_names.size(); ++v) {
        VariableSummary& vs = s.variables[trace.categorical_names[v]];
        for (const auto& r : trace.records) {
            const std::string& tok = r.categoricals[v];
            if (tok == kMissingToken)
                ++vs.missing;
            else
                ++vs.category_counts[tok];
        }
    }
    if (trace.has_finish) {
        std::vector<double> log2s;
        log2s.reserve(trace.records.size());
        for (const auto& r : trace.records) log2s.push_back(r.runtime_log2);
        std::sort(log2s.begin(), log2s.end());
        const std::pair<const char*, double> qs[] = {{"min", 0.0},  {"q25", 0.25}, {"q50", 0.5}, {"q75", 0.75},
                                                     {"q90", 0.90}, {"q99", 0.99}, {"max", 1.0}};
        for (auto [label, p] : qs) {
            double ql = quantile_nearest_rank(log2s, p);
            s.runtime_log2.emplace_back(label, ql);
            s.runtime_raw.emplace_back(label, std::exp2(ql));
        }
    }
    return s;
}

}  // namespace jobclass
