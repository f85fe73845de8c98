#include "hunter/time_series.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hunter;

namespace {

TimeSeries make_series(std::size_t n, unsigned seed = 42) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    TimeSeries s;
    s.test_name = "unit.test";
    for (std::size_t i = 0; i < n; ++i) {
        s.timestamps.push_back(1600000000 + static_cast<std::int64_t>(i) * 60);
        s.metrics["throughput"].push_back(dist(rng));
        s.metrics["p99"].push_back(dist(rng));
        s.attributes["commit"].push_back("c" + std::to_string(i));
    }
    return s;
}

} // namespace

TEST_CASE("validate accepts well-formed series") {
    TimeSeries s;
    s.timestamps = {1, 2, 3};
    s.metrics["m"] = {1.0, 2.0, 3.0};
    CHECK(validate(s).empty());

    CHECK(validate(TimeSeries{}).empty());
    CHECK(validate(make_series(25)).empty());
}

TEST_CASE("validate reports each broken invariant") {
    SECTION("non-monotonic timestamps") {
        TimeSeries s;
        s.timestamps = {3, 2};
        auto v = validate(s);
        REQUIRE(v.size() == 1);
        CHECK(v[0].message == "non-monotonic timestamp");
        CHECK(v[0].index == 1);
    }

    SECTION("duplicate timestamps are non-monotonic too") {
        TimeSeries s;
        s.timestamps = {5, 5};
        CHECK(validate(s).size() == 1);
    }

    SECTION("ragged metric array") {
        TimeSeries s;
        s.timestamps = {1, 2, 3};
        s.metrics["m"] = {1.0, 2.0};
        auto v = validate(s);
        REQUIRE(v.size() == 1);
        CHECK(v[0].metric == "m");
        CHECK_FALSE(v[0].has_index);
    }

    SECTION("non-finite values flagged with index") {
        TimeSeries s;
        s.timestamps = {1, 2, 3};
        s.metrics["m"] = {1.0, std::nan(""), std::numeric_limits<double>::infinity()};
        auto v = validate(s);
        REQUIRE(v.size() == 2);
        CHECK(v[0].index == 1);
        CHECK(v[1].index == 2);
    }

    SECTION("ragged attribute array") {
        TimeSeries s;
        s.timestamps = {1, 2};
        s.metrics["m"] = {1.0, 2.0};
        s.attributes["commit"] = {"a"};
        CHECK(validate(s).size() == 1);
    }
}

TEST_CASE("validate flags randomly corrupted series and only those") {
    std::mt19937_64 rng(777);
    for (int round = 0; round < 100; ++round) {
        TimeSeries s = make_series(10 + rng() % 20, static_cast<unsigned>(round));
        const int corruption = static_cast<int>(rng() % 4);
        bool corrupted = true;
        const std::size_t n = s.size();
        switch (corruption) {
        case 0:
            corrupted = false;
            break;
        case 1:
            s.timestamps[1 + rng() % (n - 1)] = s.timestamps.front() - 1;
            break;
        case 2:
            s.metrics["p99"].pop_back();
            break;
        case 3:
            s.metrics["throughput"][rng() % n] = std::nan("");
            break;
        }
        CHECK(validate(s).empty() == !corrupted);
    }
}

TEST_CASE("slice basics") {
    const TimeSeries s = make_series(10);

    SECTION("identity") {
        CHECK(slice(s, 0, 10) == s);
    }

    SECTION("empty slice") {
        const TimeSeries e = slice(s, 3, 3);
        CHECK(e.empty());
        CHECK(e.metrics.at("p99").empty());
        CHECK(e.test_name == s.test_name);
    }

    SECTION("interior slice rebases to zero") {
        const TimeSeries part = slice(s, 2, 5);
        REQUIRE(part.size() == 3);
        CHECK(part.timestamps[0] == s.timestamps[2]);
        CHECK(part.metrics.at("throughput")[0] == s.metrics.at("throughput")[2]);
        CHECK(part.attributes.at("commit")[2] == s.attributes.at("commit")[4]);
    }

    SECTION("out of range") {
        CHECK_THROWS_AS(slice(s, 4, 11), std::out_of_range);
        CHECK_THROWS_AS(slice(s, 7, 6), std::out_of_range);
    }
}

TEST_CASE("slice composition property") {
    std::mt19937_64 rng(4242);
    const TimeSeries s = make_series(30);
    for (int round = 0; round < 50; ++round) {
        const std::size_t a = rng() % 31;
        const std::size_t b = a + rng() % (31 - a);
        const std::size_t len = b - a;
        const std::size_t c = len == 0 ? 0 : rng() % (len + 1);
        const std::size_t d = c + (len - c == 0 ? 0 : rng() % (len - c + 1));
        CHECK(slice(slice(s, a, b), c, d) == slice(s, a + c, a + d));
    }
}
