#include "hunter/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace hunter;

namespace {

struct TCdfPoint {
    double df;
    double t;
    double cdf;
};

// Frozen from a 50-digit evaluation of the regularized incomplete beta
// (values below DBL_MIN recorded as 0).
const TCdfPoint kTCdfGrid[] = {
    {1.0, -50.0, 0.0063653491009727966793},
    {1.0, -20.0, 0.015902251256176375182},
    {1.0, -10.0, 0.031725517430553569515},
    {1.0, -5.0, 0.062832958189001183814},
    {1.0, -2.0, 0.14758361765043327418},
    {1.0, -1.0, 0.25},
    {1.0, -0.5, 0.35241638234956672582},
    {1.0, -0.1, 0.46827448256944642874},
    {1.0, 0.0, 0.5},
    {1.0, 0.1, 0.53172551743055357126},
    {1.0, 0.5, 0.64758361765043327418},
    {1.0, 1.0, 0.75},
    {1.0, 2.0, 0.85241638234956672582},
    {1.0, 5.0, 0.93716704181099881619},
    {1.0, 10.0, 0.96827448256944643049},
    {1.0, 20.0, 0.98409774874382362482},
    {1.0, 50.0, 0.99363465089902720332},
    {2.0, -50.0, 0.00019988007994404029045},
    {2.0, -20.0, 0.0012453319461835484886},
    {2.0, -10.0, 0.0049262285116628454234},
    {2.0, -5.0, 0.018874775675311862909},
    {2.0, -2.0, 0.091751709536136983634},
    {2.0, -1.0, 0.21132486540518711775},
    {2.0, -0.5, 0.33333333333333333333},
    {2.0, -0.1, 0.46473271920707008461},
    {2.0, 0.0, 0.5},
    {2.0, 0.1, 0.53526728079292991539},
    {2.0, 0.5, 0.66666666666666666667},
    {2.0, 1.0, 0.78867513459481288225},
    {2.0, 2.0, 0.90824829046386301637},
    {2.0, 5.0, 0.98112522432468813709},
    {2.0, 10.0, 0.99507377148833715458},
    {2.0, 20.0, 0.99875466805381645151},
    {2.0, 50.0, 0.99980011992005595971},
    {5.0, -50.0, 3.0238788133006126158e-8},
    {5.0, -20.0, 2.8877581866120860461e-6},
    {5.0, -10.0, 0.000085473787871481795353},
    {5.0, -5.0, 0.0020523579900266612103},
    {5.0, -2.0, 0.050969739414929178123},
    {5.0, -1.0, 0.1816087338245613128},
    {5.0, -0.5, 0.31914943582046450335},
    {5.0, -0.1, 0.46211507057733018514},
    {5.0, 0.0, 0.5},
    {5.0, 0.1, 0.53788492942266981486},
    {5.0, 0.5, 0.68085056417953549665},
    {5.0, 1.0, 0.8183912661754386872},
    {5.0, 2.0, 0.94903026058507082188},
    {5.0, 5.0, 0.99794764200997333879},
    {5.0, 10.0, 0.9999145262121285182},
    {5.0, 20.0, 0.99999711224181338791},
    {5.0, 50.0, 0.99999996976121186699},
    {10.0, -50.0, 1.2371551646513399873e-13},
    {10.0, -20.0, 1.0730311586021259057e-9},
    {10.0, -10.0, 7.9477658779820597717e-7},
    {10.0, -5.0, 0.00026866680137822630854},
    {10.0, -2.0, 0.036694017385370182809},
    {10.0, -1.0, 0.17044656615102993634},
    {10.0, -0.5, 0.31394680287148647135},
    {10.0, -0.1, 0.46116035928220415759},
    {10.0, 0.0, 0.5},
    {10.0, 0.1, 0.53883964071779584241},
    {10.0, 0.5, 0.68605319712851352865},
    {10.0, 1.0, 0.82955343384897006366},
    {10.0, 2.0, 0.96330598261462981719},
    {10.0, 5.0, 0.99973133319862177369},
    {10.0, 10.0, 0.99999920522341220179},
    {10.0, 20.0, 0.9999999989269688414},
    {10.0, 50.0, 0.99999999999987628448},
    {30.0, -50.0, 9.3577088296113562982e-31},
    {30.0, -20.0, 3.3745418328856432006e-19},
    {30.0, -10.0, 2.2876257041148065963e-11},
    {30.0, -5.0, 0.000011648342733503897566},
    {30.0, -2.0, 0.02731252248149155196},
    {30.0, -1.0, 0.16265430771301494562},
    {30.0, -0.5, 0.31036150244256364298},
    {30.0, -0.1, 0.46050480589513557586},
    {30.0, 0.0, 0.5},
    {30.0, 0.1, 0.53949519410486442414},
    {30.0, 0.5, 0.68963849755743635702},
    {30.0, 1.0, 0.83734569228698505438},
    {30.0, 2.0, 0.97268747751850844804},
    {30.0, 5.0, 0.9999883516572664961},
    {30.0, 10.0, 0.99999999997712374296},
    {30.0, 20.0, 0.99999999999999999966},
    {30.0, 50.0, 1.0},
    {100.0, -50.0, 7.236081839880694376e-73},
    {100.0, -20.0, 4.9971339306684779667e-37},
    {100.0, -10.0, 4.9508444922970695877e-17},
    {100.0, -5.0, 1.2250867067519002115e-6},
    {100.0, -2.0, 0.0241060893655668398},
    {100.0, -1.0, 0.1598620778920616802},
    {100.0, -0.5, 0.30908678291544328599},
    {100.0, -0.1, 0.46027226554792561608},
    {100.0, 0.0, 0.5},
    {100.0, 0.1, 0.53972773445207438392},
    {100.0, 0.5, 0.69091321708455671401},
    {100.0, 1.0, 0.8401379221079383198},
    {100.0, 2.0, 0.9758939106344331602},
    {100.0, 5.0, 0.9999987749132932481},
    {100.0, 10.0, 0.99999999999999995049},
    {100.0, 20.0, 1.0},
    {100.0, 50.0, 1.0},
    {100000.0, -50.0, 0.0},
    {100000.0, -20.0, 4.1117469553271810757e-89},
    {100000.0, -10.0, 7.816507650103639002e-24},
    {100000.0, -5.0, 2.8713508393208364266e-7},
    {100000.0, -2.0, 0.022751481728753231625},
    {100000.0, -1.0, 0.15865646378205500803},
    {100000.0, -0.5, 0.30853808882720901947},
    {100000.0, -0.1, 0.46017226295336310877},
    {100000.0, 0.0, 0.5},
    {100000.0, 0.1, 0.53982773704663689123},
    {100000.0, 0.5, 0.69146191117279098053},
    {100000.0, 1.0, 0.84134353621794499197},
    {100000.0, 2.0, 0.97724851827124676838},
    {100000.0, 5.0, 0.99999971286491606792},
    {100000.0, 10.0, 1.0},
    {100000.0, 20.0, 1.0},
    {100000.0, 50.0, 1.0},
};

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

} // namespace

TEST_CASE("student_t_cdf matches the frozen high-precision grid") {
    for (const auto& pt : kTCdfGrid) {
        REQUIRE_THAT(student_t_cdf(pt.t, pt.df),
                     Catch::Matchers::WithinAbs(pt.cdf, 1e-9));
    }
}

TEST_CASE("student_t_cdf basics") {
    CHECK(student_t_cdf(0.0, 1.0) == 0.5);
    CHECK(student_t_cdf(0.0, 12345.0) == 0.5);
    CHECK(student_t_cdf(50.0, 10.0) >= 0.999999);
    CHECK_THROWS_AS(student_t_cdf(1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(student_t_cdf(1.0, -3.0), std::domain_error);

    SECTION("monotone non-decreasing in t") {
        for (double df : {1.0, 4.0, 17.5, 900.0}) {
            double prev = 0.0;
            for (double t = -50.0; t <= 50.0; t += 0.73) {
                const double c = student_t_cdf(t, df);
                CHECK(c >= prev);
                prev = c;
            }
        }
    }
}

TEST_CASE("t_test against frozen reference implementation values") {
    // p-values frozen from an independent, widely validated statistics
    // package (Welch two-sided).
    const std::vector<double> a1 = {27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1,
                                    21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4};
    const std::vector<double> b1 = {27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8,
                                    22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 30.6,
                                    24.2, 16.9, 23.2, 18.1, 25.1, 29.1};
    auto r1 = t_test(a1, b1);
    CHECK_THAT(r1.t_statistic, Catch::Matchers::WithinAbs(-2.45843551955285, 1e-9));
    CHECK_THAT(r1.degrees_of_freedom, Catch::Matchers::WithinAbs(32.36820616119813, 1e-6));
    CHECK_THAT(r1.p_value, Catch::Matchers::WithinAbs(0.01948332697072008, 1e-6));

    const std::vector<double> a2 = {3.0, 4.0, 1.0, 2.1};
    const std::vector<double> b2 = {490.2, 340.0, 433.9};
    auto r2 = t_test(a2, b2);
    CHECK_THAT(r2.t_statistic, Catch::Matchers::WithinAbs(-9.559497721932658, 1e-9));
    CHECK_THAT(r2.degrees_of_freedom, Catch::Matchers::WithinAbs(2.0008523488562844, 1e-6));
    CHECK_THAT(r2.p_value, Catch::Matchers::WithinAbs(0.01075156114978449, 1e-6));

    const std::vector<double> a3 = {17.2, 20.9, 22.6, 18.1, 21.7, 21.4, 23.5, 24.2, 14.7, 21.8};
    const std::vector<double> b3 = {21.5, 22.8, 21.0, 23.0, 21.6, 23.6, 22.5, 20.7, 23.4,
                                    21.8, 20.7, 21.6, 22.9, 22.4, 23.5, 22.5, 22.9, 22.8};
    CHECK_THAT(t_test(a3, b3).p_value,
               Catch::Matchers::WithinAbs(0.11620815095832725, 1e-6));

    const std::vector<double> a4 = {19.8, 20.4, 19.6, 17.8, 18.5, 18.9, 18.3, 18.9, 19.5, 22.0};
    const std::vector<double> b4 = {28.2, 26.6, 20.1, 23.3, 25.2, 22.1, 17.7, 27.6, 20.6, 13.7,
                                    23.2, 17.5, 20.6, 18.0, 23.9, 21.6, 24.3, 20.4, 23.9, 13.3};
    CHECK_THAT(t_test(a4, b4).p_value,
               Catch::Matchers::WithinAbs(0.035484530830010325, 1e-6));
}

TEST_CASE("t_test conventions and edge cases") {
    const std::vector<double> same = {1.0, 2.0, 3.0, 4.0};
    auto r = t_test(same, same);
    CHECK(r.t_statistic == 0.0);
    CHECK(r.p_value == 1.0);

    auto degenerate = t_test(std::vector<double>{0.0, 0.0, 0.0}, std::vector<double>{5.0, 5.0, 5.0});
    CHECK(degenerate.p_value == 0.0);

    auto equal_consts = t_test(std::vector<double>{2.0, 2.0}, std::vector<double>{2.0, 2.0});
    CHECK(equal_consts.p_value == 1.0);

    CHECK_THROWS_AS(t_test(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(t_test(std::vector<double>{}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);

    SECTION("symmetric in its arguments") {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 50; ++i) {
            auto a = random_values(rng, 2 + rng() % 20);
            auto b = random_values(rng, 2 + rng() % 20);
            auto ab = t_test(a, b);
            auto ba = t_test(b, a);
            CHECK(ab.p_value == ba.p_value);
            CHECK(ab.t_statistic == -ba.t_statistic);
        }
    }
}

TEST_CASE("qhat hand-checked examples") {
    const std::vector<double> constant = {3.5, 3.5, 3.5, 3.5};
    CHECK(qhat(constant, 2) == 0.0);

    const std::vector<double> step = {0.0, 0.0, 1.0, 1.0};
    CHECK_THAT(qhat(step, 2), Catch::Matchers::WithinAbs(2.0, 1e-12));

    CHECK_THROWS_AS(qhat(step, 0), std::out_of_range);
    CHECK_THROWS_AS(qhat(step, 4), std::out_of_range);
    const std::vector<double> bad = {0.0, std::nan(""), 1.0};
    CHECK_THROWS_AS(qhat(bad, 1), std::domain_error);
}

TEST_CASE("qhat scan equals the naive evaluation") {
    std::mt19937_64 rng(20240811);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 4 + rng() % 61;  // up to 64
        const auto values = random_values(rng, n);
        const std::size_t min_segment = 2;
        const auto scan = qhat_scan(values, min_segment);
        REQUIRE(scan.size() == n - 2 * min_segment + 1);
        for (std::size_t tau = min_segment; tau <= n - min_segment; ++tau) {
            REQUIRE_THAT(scan[tau - min_segment],
                         Catch::Matchers::WithinAbs(qhat(values, tau), 1e-9));
        }
    }
}

TEST_CASE("qhat invariances") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 6 + rng() % 40;
        const auto values = random_values(rng, n);
        const std::size_t tau = 2 + rng() % (n - 3);

        auto shifted = values;
        for (auto& v : shifted) v += 123.456;
        CHECK_THAT(qhat(shifted, tau), Catch::Matchers::WithinAbs(qhat(values, tau), 1e-9));

        // Reversal symmetry: splitting the reversed series at n - tau swaps X and Y.
        auto reversed = values;
        std::reverse(reversed.begin(), reversed.end());
        CHECK_THAT(qhat(reversed, n - tau), Catch::Matchers::WithinAbs(qhat(values, tau), 1e-9));

        // alpha = 1 homogeneity.
        auto scaled = values;
        for (auto& v : scaled) v *= -2.5;
        CHECK_THAT(qhat(scaled, tau), Catch::Matchers::WithinAbs(2.5 * qhat(values, tau), 1e-9));
    }
}

TEST_CASE("max_qhat_candidate") {
    SECTION("clean level shift") {
        std::vector<double> values(20, 0.0);
        std::fill(values.begin() + 10, values.end(), 10.0);
        auto cand = max_qhat_candidate(values, 2);
        REQUIRE(cand.has_value());
        CHECK(cand->index == 10);

        // Exhaustive-scan oracle agrees.
        std::size_t best_tau = 2;
        double best = qhat(values, 2);
        for (std::size_t tau = 3; tau <= values.size() - 2; ++tau) {
            const double q = qhat(values, tau);
            if (q > best) {
                best = q;
                best_tau = tau;
            }
        }
        CHECK(cand->index == best_tau);
        CHECK_THAT(cand->qhat, Catch::Matchers::WithinAbs(best, 1e-9));
    }

    SECTION("constant series ties break to the smallest admissible tau") {
        const std::vector<double> values(12, 7.0);
        auto cand = max_qhat_candidate(values, 3);
        REQUIRE(cand.has_value());
        CHECK(cand->index == 3);
        CHECK(cand->qhat == 0.0);
    }

    SECTION("too short") {
        const std::vector<double> values = {1.0, 2.0, 3.0};
        CHECK_FALSE(max_qhat_candidate(values, 2).has_value());
        CHECK_FALSE(max_qhat_candidate(std::vector<double>{}, 2).has_value());
    }

    SECTION("deterministic") {
        std::mt19937_64 rng(5);
        const auto values = random_values(rng, 40);
        auto first = max_qhat_candidate(values, 2);
        for (int i = 0; i < 10; ++i) {
            auto again = max_qhat_candidate(values, 2);
            REQUIRE(again.has_value());
            CHECK(again->index == first->index);
            CHECK(again->qhat == first->qhat);
        }
    }

    SECTION("random inputs match the exhaustive oracle") {
        std::mt19937_64 rng(31337);
        for (int round = 0; round < 100; ++round) {
            const std::size_t n = 4 + rng() % 40;
            const auto values = random_values(rng, n);
            auto cand = max_qhat_candidate(values, 2);
            REQUIRE(cand.has_value());
            std::size_t best_tau = 2;
            double best = qhat(values, 2);
            for (std::size_t tau = 3; tau <= n - 2; ++tau) {
                const double q = qhat(values, tau);
                if (q > best) {
                    best = q;
                    best_tau = tau;
                }
            }
            CHECK(cand->index == best_tau);
        }
    }
}
