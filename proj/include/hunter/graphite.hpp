#pragma once

#include "hunter/config.hpp"
#include "hunter/errors.hpp"
#include "hunter/time_series.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

namespace hunter {

/// Transient failures (connection errors, 5xx) are retried this many times in
/// total, sleeping `initial_backoff`, then twice that, between attempts.
struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
};

/// Graphite target paths for one metric: prefix, then each tag, then the
/// metric name, then each suffix, dot-joined; one target per (tag, suffix)
/// combination. A test without suffixes uses the shared graphite ones.
inline std::vector<std::string> render_targets(const GraphiteConfig& cfg,
                                               const TestConfig& test,
                                               const std::string& metric) {
    const std::vector<std::string>& suffixes =
        test.suffixes.empty() ? cfg.suffixes : test.suffixes;
    std::vector<std::string> tags = test.tags;
    if (tags.empty()) tags.push_back("");
    std::vector<std::string> out;
    for (const auto& tag : tags) {
        std::string base = test.prefix;
        if (!tag.empty()) base += "." + tag;
        base += "." + metric;
        if (suffixes.empty()) {
            out.push_back(base);
        } else {
            for (const auto& suffix : suffixes) out.push_back(base + "." + suffix);
        }
    }
    return out;
}

namespace detail {

/// GET with retries per `retry`; non-retryable statuses fail immediately.
inline std::string http_get_with_retry(httplib::Client& client, const std::string& path,
                                       const httplib::Params& params,
                                       const RetryPolicy& retry) {
    std::string last_error;
    for (int attempt = 1; attempt <= retry.attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(retry.initial_backoff * (1 << (attempt - 2)));
        }
        auto res = client.Get(path, params, httplib::Headers{});
        if (res && res->status == 200) return res->body;
        if (res && res->status < 500) {
            throw SourceError("graphite: HTTP " + std::to_string(res->status) + " for " + path);
        }
        last_error = res ? "HTTP " + std::to_string(res->status)
                         : "connection error (" + httplib::to_string(res.error()) + ")";
    }
    throw SourceError("graphite: " + last_error + " for " + path + " after " +
                      std::to_string(retry.attempts) + " attempts");
}

inline void merge_datapoints(const std::string& body, const std::string& target,
                             std::map<std::int64_t, double>& into) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw SourceError("graphite: malformed JSON for target " + target + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw SourceError("graphite: expected a JSON array for target " + target);
    }
    for (const auto& entry : doc) {
        const auto points = entry.find("datapoints");
        if (points == entry.end() || !points->is_array()) {
            throw SourceError("graphite: entry without datapoints for target " + target);
        }
        for (const auto& point : *points) {
            if (!point.is_array() || point.size() != 2) {
                throw SourceError("graphite: malformed datapoint for target " + target);
            }
            if (point[0].is_null()) continue;  // no sample recorded at that time
            into[point[1].get<std::int64_t>()] = point[0].get<double>();
        }
    }
}

} // namespace detail

/// Pull one render-API response per (metric, target) pair over [from, until]
/// and assemble a TimeSeries on the intersection of the metrics' timestamps.
/// Within one metric, later targets and later duplicates win. An empty
/// intersection gives an empty series (the caller decides how loudly to
/// warn); HTTP failures surface as SourceError after retries.
inline TimeSeries fetch_graphite(const GraphiteConfig& cfg, const TestConfig& test,
                                 std::int64_t from, std::int64_t until,
                                 const RetryPolicy& retry = {}) {
    if (cfg.url.empty()) throw ConfigError("graphite url must be non-empty");
    httplib::Client client(cfg.url);
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::seconds(30));

    std::map<std::string, std::map<std::int64_t, double>> per_metric;
    for (const auto& [metric, def] : test.metrics) {
        auto& merged = per_metric[metric];
        for (const auto& target : render_targets(cfg, test, metric)) {
            const httplib::Params params{{"target", target},
                                         {"format", "json"},
                                         {"from", std::to_string(from)},
                                         {"until", std::to_string(until)}};
            const std::string body =
                detail::http_get_with_retry(client, "/render", params, retry);
            detail::merge_datapoints(body, target, merged);
        }
    }

    TimeSeries series;
    series.test_name = test.name;
    if (per_metric.empty()) return series;

    const auto& first = per_metric.begin()->second;
    for (const auto& [ts, value] : first) {
        bool everywhere = true;
        for (const auto& [metric, points] : per_metric) {
            if (!points.count(ts)) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) series.timestamps.push_back(ts);
    }
    for (const auto& [metric, points] : per_metric) {
        auto& values = series.metrics[metric];
        values.reserve(series.timestamps.size());
        for (std::int64_t ts : series.timestamps) values.push_back(points.at(ts));
    }
    return series;
}

} // namespace hunter
