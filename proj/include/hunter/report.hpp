#pragma once

#include "hunter/csv.hpp"
#include "hunter/errors.hpp"
#include "hunter/time_series.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hunter {

enum class OutputFormat { text, csv, json };

inline const char* to_string(OutputFormat f) {
    switch (f) {
    case OutputFormat::text: return "text";
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    }
    return "text";
}

inline OutputFormat parse_output_format(const std::string& s) {
    if (s == "text") return OutputFormat::text;
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ConfigError("unknown output format '" + s + "' (expected text, csv, or json)");
}

/// Rendering and notification options. `since_days` caps output to change
/// points within the trailing window, measured against the newest data
/// timestamp rather than the wall clock so reruns and backfills render
/// identically. Unset means unlimited for the console and 7 days for the
/// webhook payload.
struct ReportOptions {
    std::optional<int> since_days;
    OutputFormat format = OutputFormat::text;

    void validate() const {
        if (since_days && *since_days <= 0) {
            throw ConfigError("since_days must be > 0 when present");
        }
    }
};

/// Groups whose time falls within the trailing `days` of `newest_ts`.
inline std::vector<ChangePointGroup> filter_since(const std::vector<ChangePointGroup>& groups,
                                                  std::int64_t newest_ts,
                                                  std::optional<int> days) {
    if (!days) return groups;
    const std::int64_t cutoff = newest_ts - static_cast<std::int64_t>(*days) * 86400;
    std::vector<ChangePointGroup> out;
    for (const auto& g : groups) {
        if (g.time >= cutoff) out.push_back(g);
    }
    return out;
}

namespace detail {

inline double display_scale(const std::map<std::string, MetricDef>& defs,
                            const std::string& metric) {
    const auto it = defs.find(metric);
    return it == defs.end() ? 1.0 : it->second.scale;
}

inline std::string format_num(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline std::string render_text(const std::vector<ChangePointGroup>& groups,
                               const std::map<std::string, MetricDef>& defs) {
    if (groups.empty()) return "no change points\n";

    struct Row {
        std::string metric, values, change, pvalue, effect;
    };
    std::vector<std::vector<Row>> blocks;
    std::size_t metric_w = 0, values_w = 0, change_w = 0, pvalue_w = 0;
    for (const auto& g : groups) {
        auto& block = blocks.emplace_back();
        for (const auto& cp : g.changes) {
            const double scale = display_scale(defs, cp.metric);
            Row row;
            row.metric = cp.metric;
            row.values = format_num(cp.mean_before * scale, "%.6g") + " -> " +
                         format_num(cp.mean_after * scale, "%.6g");
            row.change = format_num(cp.relative_change * 100.0, "%+.1f%%");
            row.pvalue = "p=" + format_num(cp.p_value, "%.3g");
            row.effect = to_string(cp.direction_effect);
            metric_w = std::max(metric_w, row.metric.size());
            values_w = std::max(values_w, row.values.size());
            change_w = std::max(change_w, row.change.size());
            pvalue_w = std::max(pvalue_w, row.pvalue.size());
            block.push_back(std::move(row));
        }
    }
    std::string out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        out += to_iso8601(groups[i].time) + " (index " + std::to_string(groups[i].index) +
               "):\n";
        for (const auto& row : blocks[i]) {
            char line[256];
            std::snprintf(line, sizeof line, "  %-*s  %-*s  %*s  %-*s  %s\n",
                          static_cast<int>(metric_w), row.metric.c_str(),
                          static_cast<int>(values_w), row.values.c_str(),
                          static_cast<int>(change_w), row.change.c_str(),
                          static_cast<int>(pvalue_w), row.pvalue.c_str(), row.effect.c_str());
            out += line;
        }
    }
    return out;
}

inline std::string render_csv(const std::vector<ChangePointGroup>& groups,
                              const std::map<std::string, MetricDef>& defs) {
    std::string out = "time,metric,before,after,change_pct,p_value,effect\n";
    for (const auto& g : groups) {
        for (const auto& cp : g.changes) {
            const double scale = display_scale(defs, cp.metric);
            out += to_iso8601(cp.time) + ',' + cp.metric + ',' +
                   format_num(cp.mean_before * scale, "%.17g") + ',' +
                   format_num(cp.mean_after * scale, "%.17g") + ',' +
                   format_num(cp.relative_change * 100.0, "%.17g") + ',' +
                   format_num(cp.p_value, "%.17g") + ',' + to_string(cp.direction_effect) +
                   '\n';
        }
    }
    return out;
}

/// {test, generated_at, text, changes[]} over already-filtered groups.
inline nlohmann::ordered_json build_payload(const std::string& test_name,
                                            const std::vector<ChangePointGroup>& groups,
                                            const std::map<std::string, MetricDef>& defs,
                                            std::int64_t newest_ts) {
    std::size_t count = 0;
    for (const auto& g : groups) count += g.changes.size();

    nlohmann::ordered_json doc;
    doc["test"] = test_name;
    doc["generated_at"] = to_iso8601(newest_ts);
    doc["text"] = std::to_string(count) + " change point(s) in " + test_name;
    auto& changes = doc["changes"] = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        for (const auto& cp : g.changes) {
            const double scale = display_scale(defs, cp.metric);
            nlohmann::ordered_json change;
            change["time"] = to_iso8601(cp.time);
            change["metric"] = cp.metric;
            change["before"] = cp.mean_before * scale;
            change["after"] = cp.mean_after * scale;
            change["change_pct"] = cp.relative_change * 100.0;
            change["p_value"] = cp.p_value;
            change["effect"] = to_string(cp.direction_effect);
            changes.push_back(std::move(change));
        }
    }
    return doc;
}

} // namespace detail

/// JSON notification document: {test, generated_at, text, changes[]} with
/// stable key order. Change points are capped to `since_days` (default 7)
/// before `newest_ts`, the newest data timestamp; `generated_at` is that same
/// data clock. `text` is a one-line human summary for chat clients.
inline nlohmann::ordered_json webhook_payload(const std::string& test_name,
                                              const std::vector<ChangePointGroup>& groups,
                                              const std::map<std::string, MetricDef>& defs,
                                              const ReportOptions& opts,
                                              std::int64_t newest_ts) {
    opts.validate();
    const auto recent = filter_since(groups, newest_ts, opts.since_days.value_or(7));
    return detail::build_payload(test_name, recent, defs, newest_ts);
}

/// Render `groups` in the configured format. Console output is uncapped
/// unless `since_days` is set; the json format emits the webhook document
/// (with the console's uncapped default). Pure: equal inputs give equal
/// bytes.
inline std::string render_report(const std::string& test_name,
                                 const std::vector<ChangePointGroup>& groups,
                                 const std::map<std::string, MetricDef>& defs,
                                 const ReportOptions& opts, std::int64_t newest_ts) {
    opts.validate();
    const auto shown = filter_since(groups, newest_ts, opts.since_days);
    switch (opts.format) {
    case OutputFormat::text: return detail::render_text(shown, defs);
    case OutputFormat::csv: return detail::render_csv(shown, defs);
    case OutputFormat::json:
        return detail::build_payload(test_name, shown, defs, newest_ts).dump(2) + "\n";
    }
    return {};
}

namespace detail {

/// Split "scheme://host[:port]/path" into the client base and request path.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("webhook url must start with http:// or https://: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace detail

/// POST the payload as JSON to the webhook. Best-effort: returns whether the
/// server answered 2xx; never throws on HTTP failure (configuration errors
/// still throw).
inline bool post_webhook(const std::string& url, const nlohmann::ordered_json& payload) {
    const auto [base, path] = detail::split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(std::chrono::seconds(5));
    auto res = client.Post(path, payload.dump(), "application/json");
    return res && res->status >= 200 && res->status < 300;
}

} // namespace hunter
