#pragma once

#include "hunter/errors.hpp"
#include "hunter/time_series.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hunter {

/// Shared graphite connection settings; `suffixes` is the default metric path
/// tail for tests that do not declare their own.
struct GraphiteConfig {
    std::string url;
    std::vector<std::string> suffixes;
};

/// Notification settings. The webhook receives a JSON payload per test.
struct SlackConfig {
    std::string webhook_url;
};

enum class SourceKind { csv, graphite };

/// One test definition after template resolution.
struct TestConfig {
    std::string name;
    SourceKind source = SourceKind::csv;
    std::map<std::string, MetricDef> metrics;
    std::vector<std::string> inherit;

    // csv source
    std::string csv_path;
    std::string csv_time_column = "time";
    char csv_delimiter = ',';

    // graphite source
    std::string prefix;
    std::vector<std::string> tags;
    std::vector<std::string> suffixes;
};

struct Config {
    std::optional<GraphiteConfig> graphite;
    std::map<std::string, TestConfig> templates;
    std::map<std::string, TestConfig> tests;
    std::optional<SlackConfig> slack;
};

namespace detail {

/// Overlay `src` onto `dst` key by key. The `metrics` map merges per metric
/// name (a colliding name is replaced whole); every other field replaces.
inline void overlay_node(YAML::Node dst, const YAML::Node& src, const std::string& where) {
    if (!src.IsMap()) throw ConfigError(where + ": expected a mapping");
    for (const auto& kv : src) {
        const std::string key = kv.first.as<std::string>();
        if (key == "metrics" && kv.second.IsMap() && dst[key] && dst[key].IsMap()) {
            YAML::Node merged = YAML::Clone(dst[key]);
            for (const auto& metric : kv.second) {
                merged[metric.first.as<std::string>()] = YAML::Clone(metric.second);
            }
            dst[key] = merged;
        } else {
            dst[key] = YAML::Clone(kv.second);
        }
    }
}

inline YAML::Node resolve_inherits(const std::string& name, const YAML::Node& body,
                                   const std::map<std::string, YAML::Node>& templates,
                                   std::set<std::string>& visiting) {
    if (!body.IsMap()) throw ConfigError("'" + name + "': expected a mapping");
    YAML::Node resolved(YAML::NodeType::Map);
    if (const YAML::Node inherit = body["inherit"]) {
        if (!inherit.IsSequence()) {
            throw ConfigError("'" + name + "': inherit must be a list of template names");
        }
        for (const auto& item : inherit) {
            const std::string parent = item.as<std::string>();
            const auto it = templates.find(parent);
            if (it == templates.end()) {
                throw ConfigError("'" + name + "': unknown template '" + parent + "'");
            }
            if (!visiting.insert(parent).second) {
                throw ConfigError("inheritance cycle involving template '" + parent + "'");
            }
            const YAML::Node base = resolve_inherits(parent, it->second, templates, visiting);
            visiting.erase(parent);
            overlay_node(resolved, base, parent);
        }
    }
    YAML::Node own(YAML::NodeType::Map);
    for (const auto& kv : body) {
        if (kv.first.as<std::string>() == "inherit") continue;
        own[kv.first.as<std::string>()] = kv.second;
    }
    overlay_node(resolved, own, name);
    return resolved;
}

inline std::vector<std::string> string_list(const YAML::Node& node, const std::string& where) {
    if (!node) return {};
    if (!node.IsSequence()) throw ConfigError(where + ": expected a list");
    std::vector<std::string> out;
    for (const auto& item : node) out.push_back(item.as<std::string>());
    return out;
}

/// Materialize a resolved node. Tests must end up with metrics and an
/// unambiguous source; templates (`complete` = false) may stay partial.
inline TestConfig materialize_test(const std::string& name, const YAML::Node& node,
                                   const YAML::Node& original_body, bool complete) {
    TestConfig test;
    test.name = name;
    test.inherit = string_list(original_body["inherit"], name + ".inherit");

    if (const YAML::Node metrics = node["metrics"]) {
        if (!metrics.IsMap()) throw ConfigError(name + ".metrics: expected a mapping");
        for (const auto& kv : metrics) {
            MetricDef def;
            def.name = kv.first.as<std::string>();
            if (!kv.second.IsMap()) {
                throw ConfigError(name + ".metrics." + def.name + ": expected a mapping");
            }
            if (const YAML::Node scale = kv.second["scale"]) def.scale = scale.as<double>();
            if (const YAML::Node dir = kv.second["direction"]) def.direction = dir.as<int>();
            test.metrics[def.name] = def;
        }
    }

    if (const YAML::Node path = node["path"]) test.csv_path = path.as<std::string>();
    if (const YAML::Node tc = node["time_column"]) test.csv_time_column = tc.as<std::string>();
    if (const YAML::Node delim = node["delimiter"]) {
        const std::string d = delim.as<std::string>();
        if (d.size() != 1) throw ConfigError(name + ".delimiter: expected one character");
        test.csv_delimiter = d[0];
    }
    if (const YAML::Node prefix = node["prefix"]) test.prefix = prefix.as<std::string>();
    test.tags = string_list(node["tags"], name + ".tags");
    test.suffixes = string_list(node["suffixes"], name + ".suffixes");

    bool have_source = false;
    if (const YAML::Node source = node["source"]) {
        const std::string s = source.as<std::string>();
        if (s == "csv") {
            test.source = SourceKind::csv;
        } else if (s == "graphite") {
            test.source = SourceKind::graphite;
        } else {
            throw ConfigError(name + ".source: expected csv or graphite, got '" + s + "'");
        }
        have_source = true;
    }

    if (!complete) return test;

    if (!have_source) {
        const bool has_path = !test.csv_path.empty();
        const bool has_prefix = !test.prefix.empty();
        if (has_path == has_prefix) {
            throw ConfigError("'" + name + "': cannot infer source; give exactly one of "
                              "path (csv) or prefix (graphite), or set source explicitly");
        }
        test.source = has_prefix ? SourceKind::graphite : SourceKind::csv;
    }
    if (test.metrics.empty()) {
        throw ConfigError("'" + name + "' has no metrics after template resolution");
    }
    if (test.source == SourceKind::csv && test.csv_path.empty()) {
        throw ConfigError("'" + name + "': csv source needs a path");
    }
    if (test.source == SourceKind::graphite && test.prefix.empty()) {
        throw ConfigError("'" + name + "': graphite source needs a prefix");
    }
    return test;
}

} // namespace detail

/// Parse a configuration document with sections `graphite`, `templates`,
/// `tests`, and `slack`. Each test resolves, in order, every template in its
/// `inherit` list (templates may themselves inherit), then overlays its own
/// fields; metric maps merge by metric name, all other fields override.
inline Config parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");

    Config cfg;
    if (const YAML::Node g = root["graphite"]) {
        if (!g.IsMap()) throw ConfigError("graphite: expected a mapping");
        GraphiteConfig graphite;
        if (const YAML::Node url = g["url"]) graphite.url = url.as<std::string>();
        if (graphite.url.empty()) throw ConfigError("graphite.url must be non-empty");
        graphite.suffixes = detail::string_list(g["suffixes"], "graphite.suffixes");
        cfg.graphite = std::move(graphite);
    }
    if (const YAML::Node s = root["slack"]) {
        if (!s.IsMap()) throw ConfigError("slack: expected a mapping");
        SlackConfig slack;
        if (const YAML::Node url = s["webhook_url"]) slack.webhook_url = url.as<std::string>();
        cfg.slack = std::move(slack);
    }

    std::map<std::string, YAML::Node> template_nodes;
    if (const YAML::Node templates = root["templates"]) {
        if (!templates.IsMap()) throw ConfigError("templates: expected a mapping");
        for (const auto& kv : templates) {
            template_nodes[kv.first.as<std::string>()] = kv.second;
        }
    }
    for (const auto& [name, body] : template_nodes) {
        std::set<std::string> visiting{name};
        const YAML::Node resolved =
            detail::resolve_inherits(name, body, template_nodes, visiting);
        cfg.templates[name] = detail::materialize_test(name, resolved, body, false);
    }

    if (const YAML::Node tests = root["tests"]) {
        if (!tests.IsMap()) throw ConfigError("tests: expected a mapping");
        for (const auto& kv : tests) {
            const std::string name = kv.first.as<std::string>();
            std::set<std::string> visiting;
            const YAML::Node resolved =
                detail::resolve_inherits(name, kv.second, template_nodes, visiting);
            TestConfig test = detail::materialize_test(name, resolved, kv.second, true);
            if (test.source == SourceKind::graphite && !cfg.graphite) {
                throw ConfigError("'" + name + "' is graphite-sourced but no graphite "
                                  "section is configured");
            }
            cfg.tests[name] = std::move(test);
        }
    }
    return cfg;
}

/// parse_config over a file.
inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace hunter
