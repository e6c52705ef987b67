#include <doctest.h>

#include <cmath>

#include "superconc/rng.hpp"
#include "superconc/stats.hpp"

using namespace superconc;
using doctest::Approx;

TEST_CASE("compensated sum keeps small terms") {
    stats::CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1000.0);
}

TEST_CASE("mean, variance and quantiles") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(stats::mean(x) == 3.0);
    CHECK(stats::variance(x) == 2.5);
    CHECK(stats::median(x) == 3.0);
    CHECK(stats::quantile_sorted(x, 0.25) == 2.0);
    CHECK(stats::quantile_sorted(x, 0.1) == Approx(1.4));
}

TEST_CASE("jackknife SE of the variance matches the brute-force jackknife") {
    NormalStream s(3, 0);
    std::vector<double> x(60);
    s.fill_normal(x);
    const double n = 60;
    std::vector<double> loo;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> y;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != i) y.push_back(x[j]);
        loo.push_back(stats::variance(y));
    }
    const double bar = stats::mean(loo);
    double ss = 0;
    for (double v : loo) ss += (v - bar) * (v - bar);
    CHECK(stats::jackknife_variance_se(x) == Approx(std::sqrt((n - 1) / n * ss)).epsilon(1e-9));
}

TEST_CASE("wilson interval") {
    const auto w = stats::wilson_interval(0, 100);
    CHECK(w.lo == 0.0);
    CHECK(w.hi == Approx(0.0370).epsilon(0.01));
    const auto full = stats::wilson_interval(100, 100);
    CHECK(full.hi == 1.0);
    const auto mid = stats::wilson_interval(50, 100);
    CHECK(mid.lo < 0.5);
    CHECK(mid.hi > 0.5);
}

TEST_CASE("least squares fits") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> y, q;
    for (double v : x) {
        y.push_back(2.0 * v + 1.0);
        q.push_back(0.5 * v * v - v + 3.0);
    }
    const auto f = stats::linear_fit(x, y);
    CHECK(f.slope == Approx(2.0));
    CHECK(f.intercept == Approx(1.0));
    CHECK(f.r2 == Approx(1.0));
    const auto c = stats::quadratic_fit(x, q);
    CHECK(c[0] == Approx(3.0));
    CHECK(c[1] == Approx(-1.0));
    CHECK(c[2] == Approx(0.5));
}

TEST_CASE("normal distribution helpers") {
    CHECK(stats::normal_cdf(0.0) == 0.5);
    CHECK(stats::normal_cdf(1.959963984540054) == Approx(0.975));
    CHECK(stats::normal_pdf(0.0) == Approx(0.3989422804014327));
}
