#include <hunter/config.hpp>
#include <hunter/csv.hpp>
#include <hunter/detector.hpp>
#include <hunter/eval.hpp>
#include <hunter/graphite.hpp>
#include <hunter/report.hpp>
#include <hunter/time_series.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitError = 1;
constexpr int kExitRegression = 3;

std::int64_t parse_time_arg(const std::string& s) {
    if (auto epoch = hunter::detail::parse_epoch(s)) return *epoch;
    if (auto iso = hunter::detail::parse_iso8601(s)) return *iso;
    throw hunter::ConfigError("cannot parse time '" + s +
                              "' (expected epoch-seconds or ISO-8601)");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream stream(s);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Keep samples at or after `since`.
hunter::TimeSeries trim_since(const hunter::TimeSeries& series, std::int64_t since) {
    std::size_t first = 0;
    while (first < series.size() && series.timestamps[first] < since) ++first;
    return hunter::slice(series, first, series.size());
}

struct AnalyseArgs {
    std::string target;
    std::string config_path;
    std::string since;
    std::string output = "text";
    std::optional<std::size_t> window_len;
    std::optional<std::size_t> overlap;
    std::optional<double> max_pvalue;
    std::optional<double> min_magnitude;
    bool fail_on_regression = false;
    bool dry_run = false;
};

int run_analyse(const AnalyseArgs& args) {
    hunter::DetectorConfig detector;
    if (args.max_pvalue) detector = hunter::DetectorConfig::with_max_pvalue(*args.max_pvalue);
    if (args.window_len) detector.window_len = *args.window_len;
    if (args.overlap) detector.overlap = *args.overlap;
    if (args.min_magnitude) detector.min_magnitude = *args.min_magnitude;
    detector.validate();

    std::optional<std::int64_t> since;
    if (!args.since.empty()) since = parse_time_arg(args.since);

    hunter::Config config;
    if (!args.config_path.empty()) config = hunter::load_config(args.config_path);

    std::string webhook_url = config.slack ? config.slack->webhook_url : "";
    if (const char* env = std::getenv("HUNTER_WEBHOOK_URL")) webhook_url = env;

    // A target naming a readable file is analysed directly; anything else is
    // a configured test name.
    hunter::TimeSeries series;
    std::map<std::string, hunter::MetricDef> defs;
    hunter::CsvWarnings warnings;
    if (std::filesystem::exists(args.target)) {
        series = hunter::parse_csv(args.target, {}, {}, &warnings);
    } else {
        const auto it = config.tests.find(args.target);
        if (it == config.tests.end()) {
            throw hunter::ConfigError("'" + args.target +
                                      "' is neither a file nor a configured test" +
                                      (args.config_path.empty() ? " (missing --config?)" : ""));
        }
        const hunter::TestConfig& test = it->second;
        defs = test.metrics;
        if (test.source == hunter::SourceKind::csv) {
            // Relative data paths resolve against the config file.
            std::filesystem::path path(test.csv_path);
            if (path.is_relative()) {
                path = std::filesystem::path(args.config_path).parent_path() / path;
            }
            std::vector<std::string> metric_names;
            for (const auto& [name, def] : test.metrics) metric_names.push_back(name);
            series = hunter::parse_csv(path.string(),
                                       {test.csv_time_column, test.csv_delimiter},
                                       metric_names, &warnings);
            series.test_name = test.name;
        } else {
            const std::int64_t until = std::time(nullptr);
            const std::int64_t from = since ? *since : until - 30 * 86400;
            series = hunter::fetch_graphite(*config.graphite, test, from, until);
            if (series.empty()) {
                std::fprintf(stderr, "warning: no overlapping graphite samples for '%s'\n",
                             test.name.c_str());
            }
        }
    }
    if (warnings.dropped_rows > 0) {
        std::fprintf(stderr, "warning: dropped %zu unusable row(s)\n", warnings.dropped_rows);
    }
    if (warnings.duplicate_timestamps > 0) {
        std::fprintf(stderr, "warning: discarded %zu duplicate timestamp(s)\n",
                     warnings.duplicate_timestamps);
    }
    if (since) series = trim_since(series, *since);

    const auto results = hunter::detect(series, detector, defs);
    const auto groups = hunter::group_by_index(results);
    const std::int64_t newest = series.empty() ? 0 : series.timestamps.back();

    hunter::ReportOptions opts;
    opts.format = hunter::parse_output_format(args.output);
    std::fputs(hunter::render_report(series.test_name, groups, defs, opts, newest).c_str(),
               stdout);

    if (!webhook_url.empty()) {
        const auto payload =
            hunter::webhook_payload(series.test_name, groups, defs, {}, newest);
        if (args.dry_run) {
            std::fputs((payload.dump(2) + "\n").c_str(), stdout);
        } else if (!hunter::post_webhook(webhook_url, payload)) {
            std::fprintf(stderr, "warning: webhook POST to %s failed\n", webhook_url.c_str());
        }
    }

    if (args.fail_on_regression) {
        for (const auto& g : groups) {
            for (const auto& cp : g.changes) {
                if (cp.direction_effect == hunter::DirectionEffect::regression) {
                    std::fprintf(stderr, "regression: %s at %s\n", cp.metric.c_str(),
                                 hunter::to_iso8601(cp.time).c_str());
                    return kExitRegression;
                }
            }
        }
    }
    return 0;
}

struct EvaluateArgs {
    std::string scenarios = "all";
    std::string algorithms = "hunter,pelt,dynp";
    std::string margins = "10";
    std::string scenario_file;
    std::string output = "text";
    std::uint64_t seed = 0;
};

int run_evaluate(const EvaluateArgs& args) {
    std::vector<hunter::ScenarioSpec> available;
    if (args.scenario_file.empty()) {
        available = hunter::builtin_scenarios();
    } else {
        std::ifstream in(args.scenario_file);
        if (!in) throw hunter::IoError("cannot open scenario file: " + args.scenario_file);
        std::stringstream buf;
        buf << in.rdbuf();
        available = hunter::parse_scenarios(buf.str());
    }

    std::vector<hunter::ScenarioSpec> chosen;
    if (args.scenarios == "all") {
        chosen = available;
    } else {
        for (const auto& name : split_list(args.scenarios)) {
            bool found = false;
            for (const auto& spec : available) {
                if (spec.name == name) {
                    chosen.push_back(spec);
                    found = true;
                    break;
                }
            }
            if (!found) throw hunter::ConfigError("unknown scenario '" + name + "'");
        }
    }
    for (auto& spec : chosen) spec.base_seed += args.seed;

    std::vector<hunter::Algorithm> algorithms;
    for (const auto& name : split_list(args.algorithms)) {
        algorithms.push_back(hunter::parse_algorithm(name));
    }

    std::vector<std::size_t> margins;
    for (const auto& m : split_list(args.margins)) {
        const int v = std::stoi(m);
        if (v < 0) throw hunter::ConfigError("margins must be >= 0");
        margins.push_back(static_cast<std::size_t>(v));
    }

    const auto report = hunter::run_evaluation(chosen, algorithms, margins);
    if (args.output == "csv") {
        std::fputs(report.to_csv().c_str(), stdout);
    } else if (args.output == "text") {
        std::fputs(report.to_text().c_str(), stdout);
    } else {
        throw hunter::ConfigError("evaluate supports text or csv output, not '" +
                                  args.output + "'");
    }
    return 0;
}

struct GenerateArgs {
    std::string scenario;
    std::string scenario_file;
    std::string output;
    std::size_t variant = 0;
};

int run_generate(const GenerateArgs& args) {
    std::vector<hunter::ScenarioSpec> available;
    if (args.scenario_file.empty()) {
        available = hunter::builtin_scenarios();
    } else {
        std::ifstream in(args.scenario_file);
        if (!in) throw hunter::IoError("cannot open scenario file: " + args.scenario_file);
        std::stringstream buf;
        buf << in.rdbuf();
        available = hunter::parse_scenarios(buf.str());
    }
    for (const auto& spec : available) {
        if (spec.name != args.scenario) continue;
        const auto [series, truth] = hunter::generate(spec, args.variant);
        hunter::write_csv(series, args.output);
        std::string indices;
        for (std::size_t i : truth.indices) indices += " " + std::to_string(i);
        std::fprintf(stderr, "wrote %zu points to %s; true change point indices:%s\n",
                     series.size(), args.output.c_str(), indices.c_str());
        return 0;
    }
    throw hunter::ConfigError("unknown scenario '" + args.scenario + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"change point detection for performance test results"};
    app.require_subcommand(1);

    AnalyseArgs analyse_args;
    auto* analyse = app.add_subcommand("analyse", "detect change points in a CSV file or "
                                                  "configured test");
    analyse->add_option("target", analyse_args.target, "CSV path or test name")->required();
    analyse->add_option("--config", analyse_args.config_path, "YAML configuration file");
    analyse->add_option("--window-len", analyse_args.window_len, "detector window length");
    analyse->add_option("--overlap", analyse_args.overlap, "detector window overlap");
    analyse->add_option("--max-pvalue", analyse_args.max_pvalue,
                        "significance threshold (also derives the split threshold)");
    analyse->add_option("--min-magnitude", analyse_args.min_magnitude,
                        "minimum relative change to report");
    analyse->add_option("--since", analyse_args.since,
                        "drop samples before this time (epoch or ISO-8601)");
    analyse->add_option("--output", analyse_args.output, "text, csv, or json");
    analyse->add_flag("--fail-on-regression", analyse_args.fail_on_regression,
                      "exit 3 when a regression is detected");
    analyse->add_flag("--dry-run", analyse_args.dry_run,
                      "print the webhook payload instead of posting it");

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate",
                                        "score detectors on synthetic scenarios");
    evaluate->add_option("--scenarios", evaluate_args.scenarios,
                         "all or a comma-separated list of preset names");
    evaluate->add_option("--algorithms", evaluate_args.algorithms,
                         "comma-separated subset of hunter,pelt,dynp");
    evaluate->add_option("--margins", evaluate_args.margins,
                         "comma-separated match margins, e.g. 1,4,10,15");
    evaluate->add_option("--scenario-file", evaluate_args.scenario_file,
                         "YAML scenario presets (defaults to the builtins)");
    evaluate->add_option("--seed", evaluate_args.seed, "offset added to scenario seeds");
    evaluate->add_option("--output", evaluate_args.output, "text or csv");

    GenerateArgs generate_args;
    auto* generate = app.add_subcommand("generate", "write one scenario variant as CSV");
    generate->add_option("--scenario", generate_args.scenario, "preset name")->required();
    generate->add_option("--variant", generate_args.variant, "variant index");
    generate->add_option("--scenario-file", generate_args.scenario_file,
                         "YAML scenario presets (defaults to the builtins)");
    generate->add_option("--output", generate_args.output, "CSV path to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyse->parsed()) return run_analyse(analyse_args);
        if (evaluate->parsed()) return run_evaluate(evaluate_args);
        if (generate->parsed()) return run_generate(generate_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
