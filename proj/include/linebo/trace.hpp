#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "linebo/kernel.hpp"

namespace linebo {

/// One row per oracle evaluation.
struct RegretRecord {
    int eval_index = 0;  // 1-based
    Vector candidate;    // the point the method would report after this evaluation
    Vector evaluated;    // the point actually sent to the oracle
    double y_noisy = 0.0;
    double true_f = 0.0;  // noiseless objective at the candidate
    double regret = 0.0;  // true_f - f_star
    bool violation = false;  // true constraint > 0 at the evaluated point
};

struct TraceMetadata {
    std::string objective;
    std::string method;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    double wall_time_s = 0.0;
};

/// Facts about one run that are not part of the per-evaluation CSV.
struct RunDiagnostics {
    double start_true_f = 0.0;
    int violations = 0;
    bool coverage_held = true;  // constraint confidence bands contained the truth on every safe-set check
    int coverage_checks = 0;
    std::vector<double> accepted_mean_from;
    std::vector<double> accepted_mean_to;
    int total_evals = 0;
    int descent_evals = 0;
    int lines = 0;
};

struct RegretTrace {
    std::vector<RegretRecord> records;
    TraceMetadata meta;
    RunDiagnostics diagnostics;

    [[nodiscard]] int dim() const { return records.empty() ? 0 : static_cast<int>(records.front().candidate.size()); }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with header eval_index,x0..x{d-1},y_noisy,true_f,regret,violation. The
/// x columns hold the candidate point; floats carry 17 significant digits.
inline void write_trace_csv(std::ostream& os, const RegretTrace& trace) {
    const int d = trace.dim();
    os << "eval_index";
    for (int i = 0; i < d; ++i) os << ",x" << i;
    os << ",y_noisy,true_f,regret,violation\n";
    for (const RegretRecord& r : trace.records) {
        os << r.eval_index;
        for (int i = 0; i < d; ++i) os << ',' << format_double(r.candidate(i));
        os << ',' << format_double(r.y_noisy) << ',' << format_double(r.true_f) << ',' << format_double(r.regret)
           << ',' << (r.violation ? 1 : 0) << '\n';
    }
}

inline void write_trace_csv(const std::string& path, const RegretTrace& trace) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_trace_csv(os, trace);
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace detail

/// Parses a trace CSV back into records (evaluated points are not stored and stay empty).
inline RegretTrace read_trace_csv(std::istream& is) {
    RegretTrace trace;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trace CSV is empty");
    const std::vector<std::string> header = detail::split(line, ',');
    if (header.size() < 5 || header.front() != "eval_index" || header.back() != "violation")
        throw std::runtime_error("trace CSV has an unexpected header");
    const int d = static_cast<int>(header.size()) - 5;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split(line, ',');
        if (cells.size() != header.size()) throw std::runtime_error("trace CSV row has wrong column count");
        RegretRecord r;
        r.eval_index = std::stoi(cells[0]);
        r.candidate.resize(d);
        for (int i = 0; i < d; ++i) r.candidate(i) = std::stod(cells[static_cast<std::size_t>(1 + i)]);
        r.y_noisy = std::stod(cells[static_cast<std::size_t>(1 + d)]);
        r.true_f = std::stod(cells[static_cast<std::size_t>(2 + d)]);
        r.regret = std::stod(cells[static_cast<std::size_t>(3 + d)]);
        r.violation = cells[static_cast<std::size_t>(4 + d)] == "1";
        trace.records.push_back(std::move(r));
    }
    return trace;
}

inline RegretTrace read_trace_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_trace_csv(is);
}

struct AggregateRow {
    int eval_index = 0;
    int runs = 0;
    double mean_regret = 0.0;
    double median_regret = 0.0;
    double stderr_regret = 0.0;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Per-evaluation-index statistics of simple regret across runs.
inline std::vector<AggregateRow> aggregate(const std::vector<RegretTrace>& traces) {
    std::map<int, std::vector<double>> by_index;
    for (const RegretTrace& t : traces)
        for (const RegretRecord& r : t.records) by_index[r.eval_index].push_back(r.regret);
    std::vector<AggregateRow> rows;
    rows.reserve(by_index.size());
    for (const auto& [index, values] : by_index) {
        AggregateRow row;
        row.eval_index = index;
        row.runs = static_cast<int>(values.size());
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean_regret = sum / row.runs;
        double ss = 0.0;
        for (double v : values) ss += (v - row.mean_regret) * (v - row.mean_regret);
        row.stderr_regret = row.runs > 1 ? std::sqrt(ss / (row.runs - 1)) / std::sqrt(double(row.runs)) : 0.0;
        row.median_regret = median_of(values);
        rows.push_back(row);
    }
    return rows;
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows, int failed_runs) {
    os << "eval_index,runs,mean_regret,median_regret,stderr_regret,failed_runs\n";
    for (const AggregateRow& r : rows)
        os << r.eval_index << ',' << r.runs << ',' << format_double(r.mean_regret) << ','
           << format_double(r.median_regret) << ',' << format_double(r.stderr_regret) << ',' << failed_runs << '\n';
}

inline void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows, int failed_runs) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_aggregate_csv(os, rows, failed_runs);
}

/// 64-bit FNV-1a, used for config fingerprints in trace metadata.
inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string format_hash(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace linebo
