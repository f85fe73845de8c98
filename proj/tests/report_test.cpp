#include <hunter/report.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

using hunter::ChangePoint;
using hunter::ChangePointGroup;
using hunter::ConfigError;
using hunter::DirectionEffect;
using hunter::filter_since;
using hunter::MetricDef;
using hunter::OutputFormat;
using hunter::parse_output_format;
using hunter::render_report;
using hunter::ReportOptions;
using hunter::webhook_payload;

namespace {

ChangePoint make_cp(const std::string& metric, std::int64_t time, double before, double after,
                    double p, DirectionEffect effect) {
    ChangePoint cp;
    cp.metric = metric;
    cp.time = time;
    cp.mean_before = before;
    cp.mean_after = after;
    cp.p_value = p;
    cp.relative_change = (after - before) / std::fabs(before);
    cp.direction_effect = effect;
    return cp;
}

ChangePointGroup make_group(std::size_t index, std::int64_t time,
                            std::vector<ChangePoint> changes) {
    ChangePointGroup g;
    g.index = index;
    g.time = time;
    for (auto& cp : changes) {
        cp.index = index;
        g.changes.push_back(cp);
    }
    return g;
}

// 2023-01-15T10:30:00Z
constexpr std::int64_t kT0 = 1673778600;

} // namespace

TEST_CASE("empty reports state that plainly") {
    ReportOptions opts;
    CHECK(render_report("t", {}, {}, opts, kT0) == "no change points\n");
}

TEST_CASE("text report scales values and tags the direction") {
    // A latency jump of 1.0e8 -> 1.2e8 ns displayed in ms via scale 1.0e-6.
    const auto groups = {make_group(
        42, kT0, {make_cp("p99", kT0, 1.0e8, 1.2e8, 0.001, DirectionEffect::regression)})};
    const std::map<std::string, MetricDef> defs{{"p99", {"p99", 1.0e-6, -1}}};
    ReportOptions opts;
    const std::string text = render_report("t", {groups}, defs, opts, kT0);
    CHECK(text.find("2023-01-15T10:30:00Z (index 42):") != std::string::npos);
    CHECK(text.find("100 -> 120") != std::string::npos);
    CHECK(text.find("+20.0%") != std::string::npos);
    CHECK(text.find("p=0.001") != std::string::npos);
    CHECK(text.find("regression") != std::string::npos);
}

TEST_CASE("metrics sharing an index render under one group header") {
    const auto group = make_group(
        7, kT0,
        {make_cp("p99", kT0, 100.0, 120.0, 0.001, DirectionEffect::regression),
         make_cp("throughput", kT0, 50.0, 40.0, 0.002, DirectionEffect::regression)});
    ReportOptions opts;
    const std::string text = render_report("t", {group}, {}, opts, kT0);

    std::size_t headers = 0, pos = 0;
    while ((pos = text.find("(index 7):", pos)) != std::string::npos) {
        ++headers;
        pos += 1;
    }
    CHECK(headers == 1);
    // Rows align: both metric cells start at the same column and the longer
    // name sets the width.
    CHECK(text.find("  p99         100 -> 120") != std::string::npos);
    CHECK(text.find("  throughput  50 -> 40") != std::string::npos);
}

TEST_CASE("csv output is one machine row per change point") {
    const auto group = make_group(
        3, kT0, {make_cp("m", kT0, 10.0, 11.0, 0.5, DirectionEffect::unknown)});
    ReportOptions opts;
    opts.format = OutputFormat::csv;
    const std::string csv = render_report("t", {group}, {}, opts, kT0);
    CHECK(csv == "time,metric,before,after,change_pct,p_value,effect\n"
                 "2023-01-15T10:30:00Z,m,10,11,10,0.5,unknown\n");
}

TEST_CASE("json output carries the stable key order") {
    const auto group = make_group(
        3, kT0, {make_cp("m", kT0, 10.0, 11.0, 0.5, DirectionEffect::improvement)});
    ReportOptions opts;
    opts.format = OutputFormat::json;
    const std::string json = render_report("db.test", {group}, {}, opts, kT0);
    const auto doc = nlohmann::json::parse(json);
    CHECK(doc["test"] == "db.test");
    CHECK(doc["generated_at"] == "2023-01-15T10:30:00Z");
    CHECK(doc["text"] == "1 change point(s) in db.test");
    REQUIRE(doc["changes"].size() == 1);
    const auto& change = doc["changes"][0];
    CHECK(change["time"] == "2023-01-15T10:30:00Z");
    CHECK(change["metric"] == "m");
    CHECK(change["before"] == 10.0);
    CHECK(change["after"] == 11.0);
    CHECK(change["p_value"] == 0.5);
    CHECK(change["effect"] == "improvement");
    // Serialized order is insertion order, not alphabetical.
    CHECK(json.find("\"test\"") < json.find("\"generated_at\""));
    CHECK(json.find("\"generated_at\"") < json.find("\"text\""));
    CHECK(json.find("\"text\"") < json.find("\"changes\""));
    CHECK(json.find("\"time\"") < json.find("\"metric\""));
}

TEST_CASE("renderings are pure functions of their inputs") {
    const auto group = make_group(
        5, kT0, {make_cp("m", kT0, 1.0, 2.0, 0.01, DirectionEffect::improvement)});
    for (OutputFormat format : {OutputFormat::text, OutputFormat::csv, OutputFormat::json}) {
        ReportOptions opts;
        opts.format = format;
        CHECK(render_report("t", {group}, {}, opts, kT0) ==
              render_report("t", {group}, {}, opts, kT0));
    }
}

TEST_CASE("filter_since keeps the trailing window, boundary inclusive") {
    const auto old_group = make_group(
        1, kT0 - 10 * 86400, {make_cp("m", kT0 - 10 * 86400, 1, 2, 0.1, DirectionEffect::unknown)});
    const auto edge_group = make_group(
        2, kT0 - 7 * 86400, {make_cp("m", kT0 - 7 * 86400, 1, 2, 0.1, DirectionEffect::unknown)});
    const auto recent_group = make_group(
        3, kT0 - 2 * 86400, {make_cp("m", kT0 - 2 * 86400, 1, 2, 0.1, DirectionEffect::unknown)});
    const std::vector<ChangePointGroup> groups{old_group, edge_group, recent_group};

    CHECK(filter_since(groups, kT0, std::nullopt).size() == 3);
    CHECK(filter_since(groups, kT0, 7).size() == 2);  // the 7-day-old point is on the edge
    CHECK(filter_since(groups, kT0, 1).empty());      // the 2-day-old change is outside

    // Monotone: a larger window never loses a group.
    for (int days = 1; days <= 12; ++days) {
        const auto smaller = filter_since(groups, kT0, days);
        const auto larger = filter_since(groups, kT0, days + 1);
        CHECK(smaller.size() <= larger.size());
        for (const auto& g : smaller) {
            CHECK(std::any_of(larger.begin(), larger.end(),
                              [&](const ChangePointGroup& o) { return o.index == g.index; }));
        }
    }
}

TEST_CASE("webhook payload defaults to the trailing week") {
    const auto old_group = make_group(
        1, kT0 - 10 * 86400, {make_cp("m", kT0 - 10 * 86400, 1, 2, 0.1, DirectionEffect::unknown)});
    const auto recent_group = make_group(
        2, kT0 - 2 * 86400, {make_cp("m", kT0 - 2 * 86400, 1, 2, 0.1, DirectionEffect::unknown)});
    ReportOptions opts;

    auto doc = webhook_payload("t", {old_group, recent_group}, {}, opts, kT0);
    REQUIRE(doc["changes"].size() == 1);  // only the 2-day-old change
    CHECK(doc["generated_at"] == "2023-01-15T10:30:00Z");

    doc = webhook_payload("t", {old_group}, {}, opts, kT0);
    CHECK(doc["changes"].empty());
    CHECK(doc["text"] == "0 change point(s) in t");

    opts.since_days = 1;
    doc = webhook_payload("t", {old_group, recent_group}, {}, opts, kT0);
    CHECK(doc["changes"].empty());
    opts.since_days = 30;
    doc = webhook_payload("t", {old_group, recent_group}, {}, opts, kT0);
    CHECK(doc["changes"].size() == 2);
}

TEST_CASE("console output is uncapped unless asked") {
    const auto old_group = make_group(
        1, kT0 - 100 * 86400,
        {make_cp("m", kT0 - 100 * 86400, 1, 2, 0.1, DirectionEffect::unknown)});
    ReportOptions opts;
    CHECK(render_report("t", {old_group}, {}, opts, kT0).find("no change") ==
          std::string::npos);
    opts.since_days = 7;
    CHECK(render_report("t", {old_group}, {}, opts, kT0) == "no change points\n");
}

TEST_CASE("report options validate since_days") {
    ReportOptions opts;
    CHECK_NOTHROW(opts.validate());
    opts.since_days = 0;
    CHECK_THROWS_AS(opts.validate(), ConfigError);
    opts.since_days = -3;
    CHECK_THROWS_AS(opts.validate(), ConfigError);
    opts.since_days = 1;
    CHECK_NOTHROW(opts.validate());
}

TEST_CASE("output format names round-trip and reject strangers") {
    for (OutputFormat format : {OutputFormat::text, OutputFormat::csv, OutputFormat::json}) {
        CHECK(parse_output_format(hunter::to_string(format)) == format);
    }
    CHECK_THROWS_AS(parse_output_format("xml"), ConfigError);
}

TEST_CASE("post_webhook delivers the payload and reports the outcome") {
    httplib::Server server;
    std::string received_body, received_type;
    int respond_with = 200;
    server.Post("/hook/abc", [&](const httplib::Request& req, httplib::Response& res) {
        received_body = req.body;
        received_type = req.get_header_value("Content-Type");
        res.status = respond_with;
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/hook/abc";

    nlohmann::ordered_json payload;
    payload["test"] = "t";
    CHECK(hunter::post_webhook(url, payload));
    CHECK(received_body == payload.dump());
    CHECK(received_type == "application/json");

    respond_with = 500;
    CHECK_FALSE(hunter::post_webhook(url, payload));

    server.stop();
    thread.join();

    // Connection failures report false, never throw.
    CHECK_FALSE(hunter::post_webhook(url, payload));
    // A URL without a scheme is a configuration error.
    CHECK_THROWS_AS(hunter::post_webhook("hooks.local/abc", payload), ConfigError);
}
