#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hunter {

/// How a metric should be displayed and which direction counts as "better".
struct MetricDef {
    std::string name;
    double scale = 1.0;  // display multiplier, > 0
    int direction = 0;   // +1 higher is better, -1 lower is better, 0 unknown
};

/// Ordered samples of one performance test: shared timestamps plus one value
/// array per metric. Value and attribute arrays always have the same length
/// as `timestamps`. Treated as immutable once built; safe to share across
/// threads.
struct TimeSeries {
    std::string test_name;
    std::vector<std::int64_t> timestamps;  // strictly increasing epoch-seconds
    std::map<std::string, std::vector<double>> metrics;
    std::map<std::string, std::vector<std::string>> attributes;

    std::size_t size() const { return timestamps.size(); }
    bool empty() const { return timestamps.empty(); }
};

enum class DirectionEffect { improvement, regression, unknown };

inline const char* to_string(DirectionEffect e) {
    switch (e) {
    case DirectionEffect::improvement: return "improvement";
    case DirectionEffect::regression: return "regression";
    case DirectionEffect::unknown: return "unknown";
    }
    return "unknown";
}

/// A located distribution shift in one metric. `index` is the first point of
/// the new regime; segment statistics are measured over the neighbouring
/// segments fixed at pruning time.
struct ChangePoint {
    std::string metric;
    std::size_t index = 0;
    std::int64_t time = 0;
    double mean_before = 0.0;
    double mean_after = 0.0;
    double stddev_before = 0.0;
    double stddev_after = 0.0;
    double p_value = 1.0;
    double relative_change = 0.0;  // (mean_after - mean_before) / |mean_before|
    DirectionEffect direction_effect = DirectionEffect::unknown;
};

/// Change points from several metrics that landed on the same index.
struct ChangePointGroup {
    std::int64_t time = 0;
    std::size_t index = 0;
    std::vector<ChangePoint> changes;
};

/// One broken TimeSeries invariant, located as precisely as possible.
struct Violation {
    std::string message;
    std::string metric;       // empty when not metric-specific
    std::size_t index = 0;    // meaningful only when `has_index`
    bool has_index = false;
};

/// Diagnostic check of the TimeSeries invariants. Returns one record per
/// broken invariant; never throws.
inline std::vector<Violation> validate(const TimeSeries& series) {
    std::vector<Violation> out;
    const std::size_t n = series.timestamps.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (series.timestamps[i] <= series.timestamps[i - 1]) {
            out.push_back({"non-monotonic timestamp", "", i, true});
        }
    }
    for (const auto& [name, values] : series.metrics) {
        if (values.size() != n) {
            out.push_back({"length mismatch for metric '" + name + "': " +
                               std::to_string(values.size()) + " values vs " +
                               std::to_string(n) + " timestamps",
                           name, 0, false});
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) {
                out.push_back({"non-finite value in metric '" + name + "'", name, i, true});
            }
        }
    }
    for (const auto& [name, values] : series.attributes) {
        if (values.size() != n) {
            out.push_back({"length mismatch for attribute '" + name + "'", name, 0, false});
        }
    }
    return out;
}

/// Half-open sub-series [from, to), all arrays sliced consistently and
/// indices rebased to zero.
inline TimeSeries slice(const TimeSeries& series, std::size_t from, std::size_t to) {
    const std::size_t n = series.timestamps.size();
    if (from > to || to > n) {
        throw std::out_of_range("slice [" + std::to_string(from) + ", " + std::to_string(to) +
                                ") out of range for series of length " + std::to_string(n));
    }
    TimeSeries out;
    out.test_name = series.test_name;
    out.timestamps.assign(series.timestamps.begin() + static_cast<std::ptrdiff_t>(from),
                          series.timestamps.begin() + static_cast<std::ptrdiff_t>(to));
    for (const auto& [name, values] : series.metrics) {
        out.metrics[name].assign(values.begin() + static_cast<std::ptrdiff_t>(from),
                                 values.begin() + static_cast<std::ptrdiff_t>(to));
    }
    for (const auto& [name, values] : series.attributes) {
        out.attributes[name].assign(values.begin() + static_cast<std::ptrdiff_t>(from),
                                    values.begin() + static_cast<std::ptrdiff_t>(to));
    }
    return out;
}

inline bool operator==(const TimeSeries& a, const TimeSeries& b) {
    return a.test_name == b.test_name && a.timestamps == b.timestamps &&
           a.metrics == b.metrics && a.attributes == b.attributes;
}

} // namespace hunter
