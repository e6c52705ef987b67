#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "superconc/errors.hpp"
#include "superconc/rng.hpp"
#include "superconc/scantest.hpp"
#include "superconc/stats.hpp"

using namespace superconc;
using doctest::Approx;

TEST_CASE("class generators") {
    const auto d = ScanClass::disjoint(3, 4);
    CHECK(d.n == 12);
    CHECK(d.N() == 3);
    CHECK(d.sets[2] == std::vector<std::size_t>{8, 9, 10, 11});
    const auto s = ScanClass::sliding(5, 2);
    CHECK(s.N() == 4);
    CHECK(s.sets[3] == std::vector<std::size_t>{3, 4});
    CHECK_THROWS(ScanClass::from_sets(4, {{0, 1}, {2}}));
    CHECK_THROWS(ScanClass::from_sets(4, {{0, 4}}));
    CHECK(d.hash() != s.hash());
    CHECK(d.hash() == ScanClass::disjoint(3, 4).hash());
}

TEST_CASE("scan statistic") {
    const auto cls = ScanClass::disjoint(10, 10);
    const std::vector<double> ones(100, 1.0);
    const auto v = scan_statistic(ones, cls);
    CHECK(v.value == 10.0);
    CHECK(v.index == 0);

    NormalStream rng(4, 0);
    const auto sl = ScanClass::sliding(30, 5);
    std::vector<double> x(30);
    rng.fill_normal(x);
    double best = -1e300;
    std::size_t arg = 0;
    for (std::size_t i = 0; i + 5 <= 30; ++i) {
        double s = 0;
        for (std::size_t j = i; j < i + 5; ++j) s += x[j];
        if (s > best) best = s, arg = i;
    }
    CHECK(scan_statistic(x, sl).value == Approx(best));
    CHECK(scan_statistic(x, sl).index == arg);
}

TEST_CASE("decision at tau and monotonicity") {
    const auto cls = ScanClass::disjoint(2, 2);
    std::vector<double> x{1.0, 1.0, 0.0, 0.0};
    const double tau = scan_tau(1.0, 2, 2.0);
    CHECK(tau == 2.0);
    CHECK(decision(x, cls, tau) == 1);
    x[0] = 0.999;
    CHECK(decision(x, cls, tau) == 0);
    x[3] = 5.0;
    CHECK(decision(x, cls, tau) == 1);
}

TEST_CASE("threshold arithmetic") {
    CHECK(threshold_prop51(10.0, 0.1, 11.756) == Approx(2.724).epsilon(1e-3));
    CHECK(threshold_prop52(10.0, 1000.0, 0.1, 1.0, 11.756) == Approx(2.161).epsilon(1e-3));
    CHECK(threshold_prop51(10.0, 2.0, 5.0) == Approx(0.5));
    CHECK(threshold_prop52(10.0, 1000.0, 6.0, 1.0, 5.0) == Approx(0.5));
    CHECK_THROWS(threshold_prop51(10.0, 2.5, 5.0));
    CHECK_THROWS(threshold_prop52(10.0, 1.0, 0.1, 1.0, 0.0));
    CHECK_THROWS(threshold_prop52(10.0, 100.0, 0.1, 0.0, 0.0));
}

TEST_CASE("prop52 threshold decreases in c, N and K") {
    for (double c : {0.5, 1.0, 2.0})
        for (double N : {10.0, 100.0, 1000.0})
            for (double K : {4.0, 16.0, 64.0}) {
                const double e0 = 0.0;
                const double base = threshold_prop52(K, N, 0.1, c, e0 * K);
                CHECK(threshold_prop52(K, N, 0.1, 1.1 * c, e0 * K) < base);
                CHECK(threshold_prop52(K, 2.0 * N, 0.1, c, e0 * K) < base);
                CHECK(threshold_prop52(2.0 * K, N, 0.1, c, e0 * 2.0 * K) < base);
            }
}

TEST_CASE("null expectation of the scan maximum") {
    clear_E0_cache();
    const auto one = estimate_E0max(ScanClass::disjoint(1, 5), 100, 1);
    CHECK(one.mean == 0.0);
    CHECK(one.se == 0.0);
    const auto two = estimate_E0max(ScanClass::disjoint(2, 1), 100000, 1);
    CHECK(std::abs(two.mean - 1.0 / std::sqrt(std::numbers::pi)) < 4.0 * two.se);

    const auto cls = ScanClass::disjoint(10, 4);
    const auto m = null_scan_maxima(cls, 40000, 7);
    const auto [mean, var] = oracle::iid_max_moments(10);
    CHECK(std::abs(stats::mean(m) / 2.0 - mean) < 4.0 * std::sqrt(var / 40000.0));
    CHECK(std::abs(stats::variance(m) / 4.0 - var) < 4.0 * stats::jackknife_variance_se(m) / 4.0);

    const auto a = estimate_E0max(cls, 1000, 3);
    const auto b = estimate_E0max(cls, 1000, 3);
    CHECK(a.mean == b.mean);
}

TEST_CASE("risk limits") {
    const auto cls = ScanClass::disjoint(5, 4);
    RiskOptions opt;
    opt.trials = 4000;
    const auto zero = estimate_risk(cls, 0.0, 0.2, opt);
    CHECK(std::abs(zero.risk - 1.0) < 4.0 * zero.risk_se + 0.02);
    const auto big = estimate_risk(cls, 50.0, 0.2, opt);
    CHECK(big.type2 == 0.0);
    CHECK(big.risk == Approx(big.type1));
    const auto small = estimate_risk(cls, 1.0, 0.2, opt);
    const auto larger = estimate_risk(cls, 2.0, 0.2, opt);
    CHECK(larger.type2 <= small.type2);
}

TEST_CASE("large classes are subsampled") {
    const auto cls = ScanClass::sliding(200, 3);
    RiskOptions opt;
    opt.trials = 200;
    const auto r = estimate_risk(cls, 1.0, 0.2, opt);
    CHECK(r.subsampled);
    CHECK(r.sets_evaluated == 64);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("threshold table") {
    const std::vector<double> deltas{0.1, 1.0, 3.0};
    const auto rows = threshold_table(10.0, 100.0, 8.0, 1.0, deltas);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].prop51);
    CHECK_FALSE(rows[2].prop51);
    CHECK(rows[1].prop52 == Approx(threshold_prop52(10.0, 100.0, 1.0, 1.0, 8.0)));
}
