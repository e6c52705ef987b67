#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "superconc/errors.hpp"
#include "superconc/extremes.hpp"

using namespace superconc;
using doctest::Approx;

TEST_CASE("ties resolve to the smallest index") {
    const std::vector<double> x{0.1, -2.0, 0.1};
    const auto e = path_max(x);
    CHECK(e.value == 0.1);
    CHECK(e.index == 0);
}

TEST_CASE("normalization constants") {
    const auto c = norm_constants_from_log(8.0);
    CHECK(c.a_n == Approx(4.0));
    const double expect_b = 4.0 - (std::log(8.0) + std::log(4.0 * std::numbers::pi)) / 8.0;
    CHECK(c.b_n == Approx(expect_b));
    CHECK(c.b_n == Approx(3.4237).epsilon(1e-4));
    CHECK(norm_constants(1e4).a_n == Approx(4.29193).epsilon(1e-5));
    CHECK_THROWS_AS(norm_constants(1.0), DomainError);
}

TEST_CASE("gumbel law") {
    CHECK(gumbel_cdf(0.0) == Approx(std::exp(-1.0)));
    CHECK(gumbel_survival(5.0) == Approx(6.71509e-3).epsilon(1e-5));
    CHECK(gumbel_cdf(gumbel_quantile(0.3)) == Approx(0.3));
}

TEST_CASE("KS statistic of exact gumbel quantiles is small") {
    std::vector<double> z;
    for (int i = 0; i < 1000; ++i) z.push_back(gumbel_quantile((i + 0.5) / 1000.0));
    CHECK(ks_statistic_gumbel(z) == Approx(0.0005).epsilon(1e-6));
    for (double& v : z) v += 1.0;
    CHECK(ks_statistic_gumbel(z) > 0.2);
}

TEST_CASE("centering gap") {
    const auto c = norm_constants(100.0);
    const std::vector<double> at_b(5, c.b_n);
    CHECK(centering_gap(at_b, 100.0) == Approx(0.0).epsilon(1e-12));
    const std::vector<double> shifted(5, c.b_n + 1.0 / c.a_n);
    CHECK(centering_gap(shifted, 100.0) == Approx(1.0));
}

TEST_CASE("iid maxima moments match quadrature") {
    for (int n : {2, 10}) {
        const auto [m, v] = oracle::iid_max_moments(n);
        if (n == 2) {
            CHECK(m == Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-8));
            CHECK(v == Approx(1.0 - 1.0 / std::numbers::pi).epsilon(1e-8));
        }
        const PathGenerator gen(CovarianceModel::iid(), GridGeometry::sequence(n), SampleMethod::cholesky, 17);
        const auto s = simulate_extremes(gen, 100000, 0, 1);
        CHECK(std::abs(s.mean - m) < 4.0 * std::sqrt(v / 100000.0));
        CHECK(std::abs(s.variance - v) < 0.02 * v);
    }
}

TEST_CASE("argmax is uniform for iid paths") {
    const PathGenerator gen(CovarianceModel::iid(), GridGeometry::sequence(4), SampleMethod::cholesky, 3);
    const auto s = simulate_extremes(gen, 40000);
    REQUIRE(s.argmax_histogram.size() == 4);
    for (auto c : s.argmax_histogram) CHECK(std::abs(double(c) - 10000.0) < 400.0);
}

TEST_CASE("summary is independent of jobs") {
    const PathGenerator gen(CovarianceModel::ornstein_uhlenbeck(), GridGeometry::sequence(64),
                            SampleMethod::circulant, 3);
    const auto a = simulate_extremes(gen, 500, 0, 1);
    const auto b = simulate_extremes(gen, 500, 0, 3);
    CHECK(a.maxima == b.maxima);
    CHECK(a.argmax == b.argmax);
}
