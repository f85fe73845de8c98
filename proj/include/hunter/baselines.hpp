#pragma once

#include "hunter/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hunter {

enum class SegmentCostKind { l2_mean };

/// L2 segment cost (sum of squared deviations from the segment mean) backed
/// by prefix sums, so any cost(a, b) query is O(1).
class SegmentCostModel {
public:
    explicit SegmentCostModel(std::span<const double> values,
                              SegmentCostKind kind = SegmentCostKind::l2_mean)
        : kind_(kind) {
        sum_.resize(values.size() + 1, 0.0);
        sum_sq_.resize(values.size() + 1, 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            sum_[i + 1] = sum_[i] + values[i];
            sum_sq_[i + 1] = sum_sq_[i] + values[i] * values[i];
        }
    }

    std::size_t size() const { return sum_.size() - 1; }
    SegmentCostKind kind() const { return kind_; }

    /// Cost of the half-open segment [a, b). Clamped at zero: the closed-form
    /// expression can round slightly negative on constant data.
    double cost(std::size_t a, std::size_t b) const {
        if (a >= b || b > size()) {
            throw std::out_of_range("segment_cost: empty or out-of-range segment [" +
                                    std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        const double s = sum_[b] - sum_[a];
        const double q = sum_sq_[b] - sum_sq_[a];
        const double len = static_cast<double>(b - a);
        return std::max(0.0, q - (s * s) / len);
    }

private:
    SegmentCostKind kind_;
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
};

inline double segment_cost(const SegmentCostModel& model, std::size_t a, std::size_t b) {
    return model.cost(a, b);
}

namespace detail {

/// Optimal-partition reconstruction: prev[t] is the change point preceding t.
inline std::vector<std::size_t> walk_back(const std::vector<std::size_t>& prev, std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t t = n; t > 0; t = prev[t]) {
        if (prev[t] > 0) out.push_back(prev[t]);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

} // namespace detail

/// Penalized optimal partitioning with PELT pruning. Minimizes
/// sum of segment costs + penalty * (number of change points), every segment
/// at least `min_segment` points. Ties break toward the smallest index.
///
/// Candidates are pruned by the usual rule F(s) + cost(s, t) > F(t), but the
/// removal takes effect only from time t + min_segment: for targets closer
/// than a full segment the dominating path through t is not yet admissible,
/// so dropping s immediately could lose the optimum. With the lag the output
/// provably equals the unpruned quadratic DP. The prune test carries a small
/// slack so candidates tied within rounding noise are never dropped.
inline std::vector<std::size_t> pelt(std::span<const double> values, double penalty,
                                     std::size_t min_segment = 2) {
    if (!(penalty >= 0.0)) throw std::invalid_argument("pelt: penalty must be >= 0");
    if (min_segment < 1) throw std::invalid_argument("pelt: min_segment must be >= 1");
    const std::size_t n = values.size();
    if (n < 2 * min_segment) return {};

    const SegmentCostModel model(values);
    const double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t never = std::numeric_limits<std::size_t>::max();

    std::vector<double> F(n + 1, inf);
    std::vector<std::size_t> prev(n + 1, 0);
    F[0] = -penalty;

    struct Candidate {
        std::size_t start;
        std::size_t drop_at;  // first time index this candidate is skipped
    };
    std::vector<Candidate> cands;
    cands.push_back({0, never});

    for (std::size_t t = min_segment; t <= n; ++t) {
        if (t >= 2 * min_segment) cands.push_back({t - min_segment, never});

        double best = inf;
        std::size_t best_s = 0;
        for (const auto& c : cands) {
            if (c.drop_at <= t) continue;
            const double val = F[c.start] + model.cost(c.start, t) + penalty;
            if (val < best) {
                best = val;
                best_s = c.start;
            }
        }
        F[t] = best;
        prev[t] = best_s;

        const double slack = 1e-9 * (1.0 + std::fabs(F[t]));
        for (auto& c : cands) {
            if (c.drop_at != never) continue;
            if (F[c.start] + model.cost(c.start, t) > F[t] + slack) {
                c.drop_at = t + min_segment;
            }
        }
        std::erase_if(cands, [t](const Candidate& c) { return c.drop_at <= t; });
    }
    return detail::walk_back(prev, n);
}

inline std::vector<std::size_t> pelt(const std::vector<double>& values, double penalty,
                                     std::size_t min_segment = 2) {
    return pelt(std::span<const double>(values), penalty, min_segment);
}

/// BIC-style default penalty for pelt: 2 * Var(values) * ln(n), with the
/// population variance. Zero for series too short to estimate.
inline double default_pelt_penalty(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    return 2.0 * var * std::log(static_cast<double>(n));
}

/// Unpruned quadratic optimal-partition DP over the same objective as pelt.
/// Test oracle; guarded to modest sizes.
inline std::vector<std::size_t> exhaustive_partition(std::span<const double> values,
                                                     double penalty,
                                                     std::size_t min_segment = 2) {
    if (!(penalty >= 0.0))
        throw std::invalid_argument("exhaustive_partition: penalty must be >= 0");
    const std::size_t n = values.size();
    if (n > 200) throw std::length_error("exhaustive_partition: oracle limited to n <= 200");
    if (n < 2 * min_segment) return {};

    const SegmentCostModel model(values);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> F(n + 1, inf);
    std::vector<std::size_t> prev(n + 1, 0);
    F[0] = -penalty;

    for (std::size_t t = min_segment; t <= n; ++t) {
        double best = inf;
        std::size_t best_s = 0;
        for (std::size_t s = 0; s + min_segment <= t; ++s) {
            if (F[s] == inf) continue;  // starts inside the first segment
            const double val = F[s] + model.cost(s, t) + penalty;
            if (val < best) {
                best = val;
                best_s = s;
            }
        }
        F[t] = best;
        prev[t] = best_s;
    }
    return detail::walk_back(prev, n);
}

inline std::vector<std::size_t> exhaustive_partition(const std::vector<double>& values,
                                                     double penalty,
                                                     std::size_t min_segment = 2) {
    return exhaustive_partition(std::span<const double>(values), penalty, min_segment);
}

/// Exact segmentation into k+1 segments (k change points) minimizing total
/// L2 cost, every segment at least `min_segment` points. Among cost-ties the
/// lexicographically smallest index sequence is returned.
inline std::vector<std::size_t> dynp(std::span<const double> values, std::size_t k,
                                     std::size_t min_segment = 2) {
    if (min_segment < 1) throw std::invalid_argument("dynp: min_segment must be >= 1");
    const std::size_t n = values.size();
    if ((k + 1) * min_segment > n) {
        throw std::length_error("dynp: cannot place " + std::to_string(k) +
                                " change points in " + std::to_string(n) +
                                " points with min segment " + std::to_string(min_segment));
    }
    if (k == 0) return {};

    const SegmentCostModel model(values);
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t segments = k + 1;

    // G[j][s]: minimal cost of partitioning [s, n) into j segments.
    // choice[j][s]: first split of the optimal (lexicographically smallest)
    // such partition.
    std::vector<std::vector<double>> G(segments + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<std::size_t>> choice(segments + 1,
                                                 std::vector<std::size_t>(n + 1, 0));
    for (std::size_t s = 0; s + min_segment <= n; ++s) G[1][s] = model.cost(s, n);

    for (std::size_t j = 2; j <= segments; ++j) {
        for (std::size_t s = 0; s + j * min_segment <= n; ++s) {
            const std::size_t last_c = n - (j - 1) * min_segment;
            for (std::size_t c = s + min_segment; c <= last_c; ++c) {
                const double val = model.cost(s, c) + G[j - 1][c];
                if (val < G[j][s]) {
                    G[j][s] = val;
                    choice[j][s] = c;
                }
            }
        }
    }

    std::vector<std::size_t> out;
    std::size_t s = 0;
    for (std::size_t j = segments; j >= 2; --j) {
        s = choice[j][s];
        out.push_back(s);
    }
    return out;
}

inline std::vector<std::size_t> dynp(const std::vector<double>& values, std::size_t k,
                                     std::size_t min_segment = 2) {
    return dynp(std::span<const double>(values), k, min_segment);
}

} // namespace hunter
