#pragma once

#include "hunter/errors.hpp"
#include "hunter/time_series.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hunter {

/// Column layout of a CSV source. Cells are split on the bare delimiter;
/// quoting is not interpreted.
struct CsvOptions {
    std::string time_column = "time";
    char delimiter = ',';
};

/// Counters for rows the parser had to repair or discard.
struct CsvWarnings {
    std::size_t dropped_rows = 0;          // missing or unparsable metric values
    std::size_t duplicate_timestamps = 0;  // earlier occurrences discarded
};

namespace detail {

inline std::vector<std::string> split_cells(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == delimiter) {
            out.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    out.push_back(std::move(cell));
    return out;
}

inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_epoch(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return std::nullopt;
    for (std::size_t j = i; j < s.size(); ++j) {
        if (!std::isdigit(static_cast<unsigned char>(s[j]))) return std::nullopt;
    }
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno == ERANGE || end != s.c_str() + s.size()) return std::nullopt;
    return static_cast<std::int64_t>(v);
}

/// "YYYY-MM-DD[{T| }HH:MM:SS]" with optional trailing "Z" or "+-HH:MM" offset;
/// a bare date means midnight. The result is UTC epoch-seconds.
inline std::optional<std::int64_t> parse_iso8601(const std::string& s) {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    std::size_t consumed = 0;
    int fields = std::sscanf(s.c_str(), "%4d-%2d-%2d%zn", &year, &month, &day, &consumed);
    if (fields != 3 || consumed != 10) return std::nullopt;
    std::size_t rest = 10;
    if (rest < s.size() && (s[rest] == 'T' || s[rest] == ' ')) {
        std::size_t time_len = 0;
        fields = std::sscanf(s.c_str() + rest + 1, "%2d:%2d:%2d%zn", &hour, &minute, &second,
                             &time_len);
        if (fields != 3 || time_len != 8) return std::nullopt;
        rest += 1 + time_len;
    }
    std::int64_t offset = 0;
    if (rest < s.size()) {
        if (s[rest] == 'Z' && rest + 1 == s.size()) {
            rest += 1;
        } else if (s[rest] == '+' || s[rest] == '-') {
            int oh = 0, om = 0;
            std::size_t off_len = 0;
            fields = std::sscanf(s.c_str() + rest + 1, "%2d:%2d%zn", &oh, &om, &off_len);
            if (fields != 2 || off_len != 5 || rest + 6 != s.size()) return std::nullopt;
            offset = (s[rest] == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
            rest = s.size();
        } else {
            return std::nullopt;
        }
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
        second > 60) {
        return std::nullopt;
    }
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = month - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = minute;
    tm.tm_sec = second;
    return static_cast<std::int64_t>(timegm(&tm)) - offset;
}

} // namespace detail

/// UTC render of epoch-seconds as "YYYY-MM-DDTHH:MM:SSZ".
inline std::string to_iso8601(std::int64_t epoch_seconds) {
    const std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

/// Read a delimited file with a header row into a TimeSeries.
///
/// The time column is auto-detected as either integer epoch-seconds or
/// ISO-8601, uniformly for the whole file; mixing the two is an error. Rows
/// whose metric cells are missing or unparsable are dropped and counted.
/// Rows arrive in any order and are sorted by time; duplicate timestamps keep
/// the last occurrence in file order. An empty `metric_names` selects every
/// column except the time column. The series name is the file stem.
inline TimeSeries parse_csv(const std::string& path, const CsvOptions& options = {},
                            const std::vector<std::string>& metric_names = {},
                            CsvWarnings* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = detail::split_cells(line, options.delimiter);

    auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };

    std::vector<std::string> missing;
    const auto time_col = column_of(options.time_column);
    if (!time_col) missing.push_back(options.time_column);

    std::vector<std::string> metrics = metric_names;
    if (metrics.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (!time_col || i != *time_col) metrics.push_back(header[i]);
        }
    }
    std::vector<std::size_t> metric_cols;
    for (const auto& name : metrics) {
        if (auto col = column_of(name)) {
            metric_cols.push_back(*col);
        } else {
            missing.push_back(name);
        }
    }
    if (!missing.empty()) {
        std::string msg = path + ": missing header columns:";
        for (const auto& name : missing) msg += " " + name;
        throw FormatError(msg);
    }
    if (metrics.empty()) throw FormatError(path + ": no metric columns");

    struct Row {
        std::string time_text;
        std::vector<double> values;
    };
    CsvWarnings counts;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_cells(line, options.delimiter);
        if (cells.size() != header.size()) {
            ++counts.dropped_rows;
            continue;
        }
        Row row;
        row.time_text = cells[*time_col];
        bool ok = true;
        for (std::size_t col : metric_cols) {
            if (auto v = detail::parse_double(cells[col])) {
                row.values.push_back(*v);
            } else {
                ok = false;
                break;
            }
        }
        if (!ok) {
            ++counts.dropped_rows;
            continue;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError(path + ": no usable data rows");

    // Timestamp format is a property of the file: all-integer means epoch,
    // anything else must be ISO-8601 throughout.
    std::vector<std::int64_t> times(rows.size());
    bool all_epoch = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (auto t = detail::parse_epoch(rows[i].time_text)) {
            times[i] = *t;
        } else {
            all_epoch = false;
            break;
        }
    }
    if (!all_epoch) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (auto t = detail::parse_iso8601(rows[i].time_text)) {
                times[i] = *t;
            } else {
                throw FormatError(path + ": time value '" + rows[i].time_text +
                                  "' is neither epoch-seconds nor ISO-8601, or formats are "
                                  "mixed within the file");
            }
        }
    }

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    TimeSeries series;
    series.test_name = std::filesystem::path(path).stem().string();
    for (const auto& name : metrics) series.metrics[name] = {};
    for (std::size_t k = 0; k < order.size(); ++k) {
        // Stable sort keeps file order within equal keys, so the last of a
        // duplicate run is the last occurrence in the file.
        if (k + 1 < order.size() && times[order[k]] == times[order[k + 1]]) {
            ++counts.duplicate_timestamps;
            continue;
        }
        const Row& row = rows[order[k]];
        series.timestamps.push_back(times[order[k]]);
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            series.metrics[metrics[m]].push_back(row.values[m]);
        }
    }

    if (warnings) *warnings = counts;
    return series;
}

/// Write `series` with its metric columns (map order) after the time column.
/// Timestamps are epoch-seconds; values use max round-trip precision, so
/// parse_csv(write_csv(s)) reproduces the metric arrays exactly.
inline void write_csv(const TimeSeries& series, const std::string& path,
                      const CsvOptions& options = {}) {
    for (const auto& [name, values] : series.metrics) {
        if (name.find(options.delimiter) != std::string::npos) {
            throw FormatError("metric name '" + name + "' contains the delimiter");
        }
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file: " + path);
    out << options.time_column;
    for (const auto& [name, values] : series.metrics) out << options.delimiter << name;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.timestamps[i];
        for (const auto& [name, values] : series.metrics) {
            std::snprintf(buf, sizeof buf, "%.17g", values[i]);
            out << options.delimiter << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing CSV file: " + path);
}

} // namespace hunter
