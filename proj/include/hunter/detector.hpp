#pragma once

#include "hunter/errors.hpp"
#include "hunter/stats.hpp"
#include "hunter/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hunter {

/// Tuning knobs for the windowed divisive detector.
///
/// Splitting runs against the relaxed `weak_pvalue` so that recursion keeps
/// going past borderline points; the bottom-up prune then re-tests every
/// survivor against `max_pvalue` over whole-series neighbour segments.
struct DetectorConfig {
    std::size_t window_len = 50;
    std::size_t overlap = 25;
    double max_pvalue = 0.05;      // user-facing significance threshold
    double weak_pvalue = 0.5;      // split-phase threshold, >= max_pvalue;
                                   // equal thresholds disable the relaxed split
    double min_magnitude = 0.05;   // drop changes smaller than this fraction
    std::size_t min_segment = 2;

    /// Defaults with the weak threshold derived from `max_pvalue`.
    static DetectorConfig with_max_pvalue(double max_p) {
        DetectorConfig cfg;
        cfg.max_pvalue = max_p;
        cfg.weak_pvalue = std::min(1.0, 10.0 * max_p);
        return cfg;
    }

    void validate() const {
        if (min_segment < 2) throw ConfigError("detector: min_segment must be >= 2");
        if (window_len < 2 * min_segment)
            throw ConfigError("detector: window_len must be >= 2 * min_segment");
        if (overlap < min_segment || 2 * overlap > window_len)
            throw ConfigError("detector: overlap must be in [min_segment, window_len/2]");
        if (!(max_pvalue > 0.0 && max_pvalue < 1.0))
            throw ConfigError("detector: max_pvalue must be in (0, 1)");
        if (!(weak_pvalue >= max_pvalue && weak_pvalue <= 1.0))
            throw ConfigError("detector: weak_pvalue must be in [max_pvalue, 1]");
        if (!(min_magnitude >= 0.0)) throw ConfigError("detector: min_magnitude must be >= 0");
    }
};

using IndexRange = std::pair<std::size_t, std::size_t>;  // half-open [first, second)

/// Fixed-size windows anchored at the series end, consecutive windows
/// overlapping by `overlap` points. The newest points always sit inside one
/// full window; only the oldest window gets clipped at 0. A series no longer
/// than one window yields the single window [0, n).
inline std::vector<IndexRange> split_windows(std::size_t n, std::size_t window_len,
                                             std::size_t overlap) {
    if (window_len == 0 || overlap >= window_len) {
        throw ConfigError("split_windows: need window_len > overlap >= 0");
    }
    if (n == 0) return {};
    if (n <= window_len) return {{0, n}};

    const std::size_t step = window_len - overlap;
    std::vector<IndexRange> out;
    std::size_t start = n - window_len;
    while (true) {
        out.push_back({start, start + window_len});
        if (start == 0) break;
        if (start < step) {
            // Oldest window, clipped: keep its end so the overlap with the
            // next window stays exact.
            out.push_back({0, start + overlap});
            break;
        }
        start -= step;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

namespace detail {

inline void find_candidates_rec(std::span<const double> values, std::size_t offset,
                                std::size_t lo, std::size_t hi, const DetectorConfig& cfg,
                                std::vector<std::size_t>& out) {
    const auto segment = values.subspan(lo, hi - lo);
    const auto cand = max_qhat_candidate(segment, cfg.min_segment);
    if (!cand) return;
    const std::size_t split = lo + cand->index;
    const auto left = values.subspan(lo, split - lo);
    const auto right = values.subspan(split, hi - split);
    if (t_test(left, right).p_value > cfg.weak_pvalue) return;
    out.push_back(offset + split);
    find_candidates_rec(values, offset, lo, split, cfg, out);
    find_candidates_rec(values, offset, split, hi, cfg, out);
}

/// Per-candidate statistics over the segments delimited by its neighbours in
/// `points` (with the series bounds as outer sentinels).
struct SegmentStats {
    double mean_before = 0.0;
    double mean_after = 0.0;
    double stddev_before = 0.0;
    double stddev_after = 0.0;
    double p_value = 1.0;
    double relative_change = 0.0;
};

inline SegmentStats segment_stats(std::span<const double> values, std::size_t left,
                                  std::size_t point, std::size_t right) {
    const auto before = values.subspan(left, point - left);
    const auto after = values.subspan(point, right - point);
    SegmentStats s;
    s.mean_before = sample_mean(before);
    s.mean_after = sample_mean(after);
    s.stddev_before = std::sqrt(sample_variance(before));
    s.stddev_after = std::sqrt(sample_variance(after));
    s.p_value = t_test(before, after).p_value;
    if (s.mean_before == 0.0) {
        s.relative_change = s.mean_after >= s.mean_before
                                ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
    } else {
        s.relative_change = (s.mean_after - s.mean_before) / std::fabs(s.mean_before);
    }
    return s;
}

} // namespace detail

/// Recursive divisive search within one window. The best split is accepted
/// whenever its t-test clears the relaxed threshold, then both sides are
/// searched independently. Indices are relative to `values`; output ascending.
inline std::vector<std::size_t> find_candidates(std::span<const double> values,
                                                const DetectorConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> out;
    detail::find_candidates_rec(values, 0, 0, values.size(), cfg, out);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::size_t> find_candidates(const std::vector<double>& values,
                                                const DetectorConfig& cfg) {
    return find_candidates(std::span<const double>(values), cfg);
}

/// Bottom-up merge: repeatedly re-test every candidate against its current
/// neighbour segments over the whole series and drop the weakest candidate
/// whose p-value exceeds `max_pvalue` (ties to the smallest index), until all
/// survivors pass. A candidate whose neighbour segment has shrunk below
/// min_segment points is treated as p = 1 so crowded candidates cannot both
/// survive.
inline std::vector<std::size_t> prune_weak(std::span<const double> values,
                                           std::vector<std::size_t> candidates,
                                           double max_pvalue, std::size_t min_segment = 2) {
    const std::size_t n = values.size();
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    struct Entry {
        std::size_t index;
        double p;
        bool alive = true;
    };
    std::vector<Entry> entries;
    entries.reserve(candidates.size());
    for (std::size_t c : candidates) entries.push_back({c, 1.0});

    auto neighbor = [&](std::size_t i, int dir) -> std::size_t {
        // Bound of the segment next to entry i: the nearest alive candidate,
        // else the series edge.
        std::size_t j = i;
        while (true) {
            if (dir < 0) {
                if (j == 0) return 0;
                --j;
            } else {
                ++j;
                if (j == entries.size()) return n;
            }
            if (entries[j].alive) return entries[j].index;
        }
    };

    auto recompute = [&](std::size_t i) {
        const std::size_t left = neighbor(i, -1);
        const std::size_t right = neighbor(i, +1);
        const std::size_t c = entries[i].index;
        if (c - left < min_segment || right - c < min_segment) {
            entries[i].p = 1.0;
            return;
        }
        entries[i].p = t_test(values.subspan(left, c - left), values.subspan(c, right - c)).p_value;
    };

    for (std::size_t i = 0; i < entries.size(); ++i) recompute(i);

    while (true) {
        std::size_t worst = entries.size();
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (!entries[i].alive || entries[i].p <= max_pvalue) continue;
            if (worst == entries.size() || entries[i].p > entries[worst].p) worst = i;
        }
        if (worst == entries.size()) break;
        entries[worst].alive = false;
        for (std::size_t i = worst; i-- > 0;) {
            if (entries[i].alive) {
                recompute(i);
                break;
            }
        }
        for (std::size_t i = worst + 1; i < entries.size(); ++i) {
            if (entries[i].alive) {
                recompute(i);
                break;
            }
        }
    }

    std::vector<std::size_t> out;
    for (const auto& e : entries) {
        if (e.alive) out.push_back(e.index);
    }
    return out;
}

inline std::vector<std::size_t> prune_weak(const std::vector<double>& values,
                                           std::vector<std::size_t> candidates,
                                           double max_pvalue, std::size_t min_segment = 2) {
    return prune_weak(std::span<const double>(values), std::move(candidates), max_pvalue,
                      min_segment);
}

/// One-pass relative-magnitude filter over the surviving points. Means are
/// taken over the segments bounded by each point's neighbours in `points`;
/// a zero before-mean keeps the point (relative change from zero is
/// unbounded).
inline std::vector<std::size_t> filter_magnitude(std::span<const double> values,
                                                 const std::vector<std::size_t>& points,
                                                 double min_magnitude) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t left = i == 0 ? 0 : points[i - 1];
        const std::size_t right = i + 1 == points.size() ? values.size() : points[i + 1];
        const auto stats = detail::segment_stats(values, left, points[i], right);
        if (stats.mean_before == 0.0 || std::fabs(stats.relative_change) >= min_magnitude) {
            out.push_back(points[i]);
        }
    }
    return out;
}

inline std::vector<std::size_t> filter_magnitude(const std::vector<double>& values,
                                                 const std::vector<std::size_t>& points,
                                                 double min_magnitude) {
    return filter_magnitude(std::span<const double>(values), points, min_magnitude);
}

namespace detail {

/// Window + search + merge + prune, before the magnitude filter.
inline std::vector<std::size_t> pruned_candidates(std::span<const double> values,
                                                  const DetectorConfig& cfg) {
    std::set<std::size_t> merged;
    for (const auto& [lo, hi] : split_windows(values.size(), cfg.window_len, cfg.overlap)) {
        for (std::size_t rel : find_candidates(values.subspan(lo, hi - lo), cfg)) {
            merged.insert(lo + rel);
        }
    }
    std::vector<std::size_t> candidates(merged.begin(), merged.end());
    return prune_weak(values, std::move(candidates), cfg.max_pvalue, cfg.min_segment);
}

} // namespace detail

/// The full pipeline for one metric array: window, search, merge duplicate
/// finds from overlapping windows, prune against the whole series, filter by
/// magnitude. Returned indices are absolute and ascending.
inline std::vector<std::size_t> detect_indices(std::span<const double> values,
                                               const DetectorConfig& cfg) {
    cfg.validate();
    if (values.size() < 2 * cfg.min_segment) return {};
    return filter_magnitude(values, detail::pruned_candidates(values, cfg), cfg.min_magnitude);
}

inline std::vector<std::size_t> detect_indices(const std::vector<double>& values,
                                               const DetectorConfig& cfg) {
    return detect_indices(std::span<const double>(values), cfg);
}

/// Detect change points in every metric of `series`. Metrics appear in the
/// result only when they have at least one change point. `defs` supplies
/// display scale and improvement direction per metric; unknown metrics get
/// direction 0. Pure and deterministic: equal inputs give equal outputs.
///
/// Reported statistics (means, stddevs, p-value, relative change) are
/// measured over the neighbour segments as they stood at the end of pruning,
/// which is also what the magnitude filter saw.
inline std::map<std::string, std::vector<ChangePoint>> detect(
    const TimeSeries& series, const DetectorConfig& cfg,
    const std::map<std::string, MetricDef>& defs = {}) {
    cfg.validate();
    std::map<std::string, std::vector<ChangePoint>> out;
    const std::size_t n = series.size();
    if (n < 2 * cfg.min_segment) return out;

    for (const auto& [name, values] : series.metrics) {
        if (values.size() != n) {
            throw std::invalid_argument("detect: metric '" + name + "' has " +
                                        std::to_string(values.size()) + " values for " +
                                        std::to_string(n) + " timestamps");
        }
        const std::span<const double> v(values);
        const std::vector<std::size_t> pruned = detail::pruned_candidates(v, cfg);

        int direction = 0;
        if (auto it = defs.find(name); it != defs.end()) direction = it->second.direction;

        std::vector<ChangePoint> points;
        for (std::size_t i = 0; i < pruned.size(); ++i) {
            const std::size_t left = i == 0 ? 0 : pruned[i - 1];
            const std::size_t right = i + 1 == pruned.size() ? n : pruned[i + 1];
            const auto stats = detail::segment_stats(v, left, pruned[i], right);
            if (stats.mean_before != 0.0 &&
                std::fabs(stats.relative_change) < cfg.min_magnitude) {
                continue;
            }
            ChangePoint cp;
            cp.metric = name;
            cp.index = pruned[i];
            cp.time = series.timestamps[pruned[i]];
            cp.mean_before = stats.mean_before;
            cp.mean_after = stats.mean_after;
            cp.stddev_before = stats.stddev_before;
            cp.stddev_after = stats.stddev_after;
            cp.p_value = stats.p_value;
            cp.relative_change = stats.relative_change;
            if (direction == 0) {
                cp.direction_effect = DirectionEffect::unknown;
            } else {
                const double signed_effect =
                    (stats.relative_change >= 0.0 ? 1.0 : -1.0) * direction;
                cp.direction_effect = signed_effect > 0.0 ? DirectionEffect::improvement
                                                          : DirectionEffect::regression;
            }
            points.push_back(std::move(cp));
        }
        if (!points.empty()) out[name] = std::move(points);
    }
    return out;
}

/// Regroup per-metric change points by shared index, ascending. Within one
/// group the members keep metric-name order.
inline std::vector<ChangePointGroup> group_by_index(
    const std::map<std::string, std::vector<ChangePoint>>& results) {
    std::map<std::size_t, ChangePointGroup> groups;
    for (const auto& [metric, points] : results) {
        for (const auto& cp : points) {
            auto& g = groups[cp.index];
            g.index = cp.index;
            g.time = cp.time;
            g.changes.push_back(cp);
        }
    }
    std::vector<ChangePointGroup> out;
    out.reserve(groups.size());
    for (auto& [index, group] : groups) out.push_back(std::move(group));
    return out;
}

} // namespace hunter
