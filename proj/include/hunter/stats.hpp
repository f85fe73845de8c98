#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace hunter {

/// Result of a two-sided Welch t-test.
struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
};

/// A proposed split position: left = [0, index), right = [index, n).
struct SplitCandidate {
    std::size_t index = 0;
    double qhat = 0.0;  // clamped at zero; the raw statistic can dip below on noise
};

namespace detail {

// Continued fraction for the regularized incomplete beta, modified Lentz.
inline double beta_cont_frac(double a, double b, double x) {
    constexpr int max_iter = 400;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

/// Regularized incomplete beta I_x(a, b).
inline double ibeta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    // The continued fraction converges fast only below the mean of the
    // distribution; reflect otherwise.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(ln_front) * beta_cont_frac(a, b, x) / a;
    }
    return 1.0 - std::exp(ln_front) * beta_cont_frac(b, a, 1.0 - x) / b;
}

inline double sample_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Unbiased sample variance (n-1 denominator); 0 for fewer than 2 points.
inline double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace detail

/// CDF of Student's t distribution, evaluated through the regularized
/// incomplete beta function I_x(df/2, 1/2) with x = df / (df + t^2).
/// Absolute error below 1e-9 for df in [1, 1e6], |t| <= 50.
inline double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) {
        throw std::domain_error("student_t_cdf: degrees of freedom must be > 0");
    }
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double tail = detail::ibeta_reg(df / 2.0, 0.5, x);  // == 2 * P(T > |t|)
    return t > 0.0 ? 1.0 - tail / 2.0 : tail / 2.0;
}

/// Welch's unequal-variance t-test, two-sided.
///
/// Degenerate variances are decided by convention rather than left undefined:
/// two constant samples with equal values give p = 1, with different values
/// give p = 0. This keeps decisions on noiseless data obvious.
inline TTestResult t_test(std::span<const double> a, std::span<const double> b) {
    const std::size_t m = a.size();
    const std::size_t k = b.size();
    if (m < 2 || k < 2) {
        throw std::invalid_argument("t_test: each sample needs at least 2 points");
    }
    // Constancy is detected by comparing elements, not by var == 0: summation
    // rounding leaves a tiny nonzero variance on a constant sample, and the
    // Welch statistic inflates that residual by sqrt(n) into a fake signal.
    const auto is_const = [](std::span<const double> s) {
        return std::all_of(s.begin(), s.end(), [&](double x) { return x == s.front(); });
    };
    const bool const_a = is_const(a);
    const bool const_b = is_const(b);
    const double mean_a = const_a ? a.front() : detail::sample_mean(a);
    const double mean_b = const_b ? b.front() : detail::sample_mean(b);
    const double var_a = const_a ? 0.0 : detail::sample_variance(a);
    const double var_b = const_b ? 0.0 : detail::sample_variance(b);

    if (var_a == 0.0 && var_b == 0.0) {
        const double df = static_cast<double>(m + k - 2);
        if (mean_a == mean_b) return {0.0, df, 1.0};
        const double inf = std::numeric_limits<double>::infinity();
        return {mean_a > mean_b ? inf : -inf, df, 0.0};
    }

    const double se_a = var_a / static_cast<double>(m);
    const double se_b = var_b / static_cast<double>(k);
    const double t = (mean_a - mean_b) / std::sqrt(se_a + se_b);
    const double df = (se_a + se_b) * (se_a + se_b) /
                      (se_a * se_a / static_cast<double>(m - 1) +
                       se_b * se_b / static_cast<double>(k - 1));
    // Two-sided p = 2 * (1 - CDF(|t|)), computed without cancellation.
    const double x = df / (df + t * t);
    const double p = detail::ibeta_reg(df / 2.0, 0.5, x);
    return {t, df, p};
}

inline TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b) {
    return t_test(std::span<const double>(a), std::span<const double>(b));
}

/// The E-divisive divergence statistic for splitting `values` at `tau`
/// (left = [0, tau), right = [tau, n)):
///
///   Q(X, Y) = (m k / (m + k)) * [ (2 / (m k)) * sum_ij |x_i - y_j|^a
///                                 - C(m,2)^-1 * sum_{i<i'} |x_i - x_i'|^a
///                                 - C(k,2)^-1 * sum_{j<j'} |y_j - y_j'|^a ]
///
/// Within-sample terms vanish for sides with fewer than 2 points. This is the
/// naive O(n^2) evaluation and serves as the semantic definition; the scan in
/// max_qhat_candidate must stay equal to it within 1e-9.
inline double qhat(std::span<const double> values, std::size_t tau, double alpha = 1.0) {
    const std::size_t n = values.size();
    if (tau < 1 || tau >= n) {
        throw std::out_of_range("qhat: tau must satisfy 1 <= tau <= n-1");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw std::domain_error("qhat: non-finite value");
    }
    const auto dist = [alpha](double x, double y) {
        const double d = std::fabs(x - y);
        return alpha == 1.0 ? d : std::pow(d, alpha);
    };
    const double m = static_cast<double>(tau);
    const double k = static_cast<double>(n - tau);

    double cross = 0.0;
    for (std::size_t i = 0; i < tau; ++i)
        for (std::size_t j = tau; j < n; ++j) cross += dist(values[i], values[j]);

    double within_x = 0.0;
    for (std::size_t i = 0; i + 1 < tau; ++i)
        for (std::size_t j = i + 1; j < tau; ++j) within_x += dist(values[i], values[j]);

    double within_y = 0.0;
    for (std::size_t i = tau; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) within_y += dist(values[i], values[j]);

    double stat = 2.0 / (m * k) * cross;
    if (tau >= 2) stat -= within_x / (m * (m - 1.0) / 2.0);
    if (n - tau >= 2) stat -= within_y / (k * (k - 1.0) / 2.0);
    return m * k / (m + k) * stat;
}

inline double qhat(const std::vector<double>& values, std::size_t tau, double alpha = 1.0) {
    return qhat(std::span<const double>(values), tau, alpha);
}

/// One pass over every admissible split of `values` for alpha = 1, O(n^2)
/// total instead of O(n^2) per split. Moving the boundary one step right
/// shifts a single point between the samples, so the three distance sums can
/// be updated from the distances of that point to each side.
///
/// Returns the statistic for every tau in [min_segment, n - min_segment],
/// front of the vector aligned with tau = min_segment.
inline std::vector<double> qhat_scan(std::span<const double> values, std::size_t min_segment) {
    const std::size_t n = values.size();
    std::vector<double> out;
    if (min_segment < 1 || n < 2 * min_segment) return out;
    out.reserve(n - 2 * min_segment + 1);

    // State at boundary tau = 1.
    double cross = 0.0, within_x = 0.0, within_y = 0.0;
    for (std::size_t j = 1; j < n; ++j) cross += std::fabs(values[0] - values[j]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) within_y += std::fabs(values[i] - values[j]);

    for (std::size_t tau = 1; tau <= n - 1; ++tau) {
        if (tau >= min_segment && tau <= n - min_segment) {
            const double m = static_cast<double>(tau);
            const double k = static_cast<double>(n - tau);
            double stat = 2.0 / (m * k) * cross;
            if (tau >= 2) stat -= within_x / (m * (m - 1.0) / 2.0);
            if (n - tau >= 2) stat -= within_y / (k * (k - 1.0) / 2.0);
            out.push_back(m * k / (m + k) * stat);
        }
        if (tau == n - 1) break;
        // Move values[tau] from the right sample to the left one.
        const double moved = values[tau];
        double to_left = 0.0, to_right = 0.0;
        for (std::size_t i = 0; i < tau; ++i) to_left += std::fabs(moved - values[i]);
        for (std::size_t j = tau + 1; j < n; ++j) to_right += std::fabs(moved - values[j]);
        within_x += to_left;
        within_y -= to_right;
        cross += to_right - to_left;
    }
    return out;
}

/// The admissible split maximizing the divergence statistic, ties broken
/// toward the smallest index. Empty when the series is too short to leave
/// min_segment points on both sides. Deterministic.
inline std::optional<SplitCandidate> max_qhat_candidate(std::span<const double> values,
                                                        std::size_t min_segment) {
    if (min_segment < 2) {
        throw std::invalid_argument("max_qhat_candidate: min_segment must be >= 2");
    }
    const std::size_t n = values.size();
    if (n < 2 * min_segment) return std::nullopt;
    for (double v : values) {
        if (!std::isfinite(v)) throw std::domain_error("max_qhat_candidate: non-finite value");
    }
    const std::vector<double> stats = qhat_scan(values, min_segment);
    std::size_t best = 0;
    for (std::size_t i = 1; i < stats.size(); ++i) {
        if (stats[i] > stats[best]) best = i;
    }
    return SplitCandidate{min_segment + best, std::max(stats[best], 0.0)};
}

inline std::optional<SplitCandidate> max_qhat_candidate(const std::vector<double>& values,
                                                        std::size_t min_segment) {
    return max_qhat_candidate(std::span<const double>(values), min_segment);
}

} // namespace hunter
