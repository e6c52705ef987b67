#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "superconc/errors.hpp"
#include "superconc/extremes.hpp"
#include "superconc/rng.hpp"
#include "superconc/verify.hpp"

using namespace superconc;
using doctest::Approx;

namespace {

TailEstimate synthetic_tail(std::vector<double> t, double (*survival)(double, double), double K) {
    TailEstimate e;
    e.samples = 1000000;
    for (double v : t) {
        e.t.push_back(v);
        e.survival.push_back(survival(v, K));
        e.lower.push_back(e.survival.back());
        e.upper.push_back(e.survival.back());
        e.low_resolution.push_back(false);
    }
    return e;
}

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(a + (b - a) * i / (count - 1));
    return v;
}

double exponential_survival(double t, double K) { return 6.0 * std::exp(-2.0 * t / std::sqrt(K)); }
double gaussian_survival(double t, double) { return 2.0 * std::exp(-t * t / 2.0); }

}  // namespace

TEST_CASE("variance estimate") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto v = estimate_var_max(x);
    CHECK(v.variance == Approx(5.0 / 3.0));
    CHECK(v.mean == 2.5);
    CHECK(v.batch == 4);
    CHECK(v.se > 0.0);
}

TEST_CASE("exact exponential tail is fitted exactly") {
    for (double K : {0.25, 1.0}) {
        const auto tail = synthetic_tail(linspace(0.0, 4.0, 400), exponential_survival, K);
        const auto fit = fit_tail_rate(tail, K);
        REQUIRE(fit.ok);
        CHECK(fit.c == Approx(2.0).epsilon(1e-6));
        CHECK(fit.r2 == Approx(1.0).epsilon(1e-9));
        const auto scaled = fit_tail_rate(tail, 4.0 * K);
        CHECK(scaled.c == Approx(4.0).epsilon(1e-6));
    }
}

TEST_CASE("gaussian tail is flagged as non-exponential on a wide range") {
    const auto tail = synthetic_tail(linspace(0.0, 6.0, 600), gaussian_survival, 1.0);
    const auto fit = fit_tail_rate(tail, 1.0, 1e-4, 0.5);
    CHECK_FALSE(fit.ok);
    CHECK_FALSE(fit.reason.empty());
}

TEST_CASE("too few points fail the fit") {
    const auto tail = synthetic_tail({0.0, 1.0}, exponential_survival, 1.0);
    CHECK_FALSE(fit_tail_rate(tail, 1.0).ok);
}

TEST_CASE("empirical tail estimate") {
    const std::vector<double> m{-1.0, 0.0, 1.0, 2.0};
    const std::vector<double> t{0.0, 1.0, 1.5, 3.0};
    const auto e = estimate_tail(m, 0.0, TailCenter::mean, t);
    CHECK(e.center_value == 0.5);
    CHECK(e.survival[0] == 1.0);
    CHECK(e.survival[1] == 0.5);
    CHECK(e.survival[2] == 0.5);
    CHECK(e.survival[3] == 0.0);
    CHECK(e.low_resolution[3]);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(e.lower[i] <= e.survival[i]);
        CHECK(e.survival[i] <= e.upper[i]);
    }
    const auto g = tail_grid(m, 5, 6.0);
    CHECK(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(tail_center_from_string("b_n") == TailCenter::b_n);
}

TEST_CASE("laplace margins for a standard normal law") {
    const auto [x, w] = oracle::gauss_hermite(80);
    const auto check = laplace_check_weighted(x, w, 1.0, 5);
    REQUIRE(check.points.size() == 5);
    for (const auto& p : check.points) {
        const double th = p.theta;
        const double expect = th == 0.0 ? 1.0 : 4.0 * (1.0 - std::exp(-th * th / 4.0)) / (th * th);
        CHECK(p.margin == Approx(expect).epsilon(1e-9));
    }
    CHECK(check.theta_max == 2.0);
    CHECK(check.C_hat == Approx(1.0).epsilon(1e-9));
    const double at1 = 4.0 * (1.0 - std::exp(-0.25));
    CHECK(at1 == Approx(0.8848).epsilon(1e-4));
}

TEST_CASE("laplace margins from samples") {
    NormalStream s(5, 0);
    std::vector<double> z(100000);
    s.fill_normal(z);
    const auto check = laplace_check(z, 1.0, 3);
    REQUIRE(check.points.size() == 3);
    CHECK(check.points[1].theta == 0.0);
    for (const auto& p : check.points) {
        const double th = p.theta;
        const double expect = th == 0.0 ? 1.0 : 4.0 * (1.0 - std::exp(-th * th / 4.0)) / (th * th);
        CHECK(std::abs(p.margin - expect) < 5.0 * p.se);
    }

    const std::vector<double> flat(100, 3.0);
    for (const auto& p : laplace_check(flat, 0.5, 7).points) CHECK(p.margin == 0.0);
}

TEST_CASE("laplace margins never overflow") {
    std::vector<double> m;
    for (int i = 0; i < 1000; ++i) m.push_back(i * 0.5);
    const auto check = laplace_check(m, 1e-4, 5);
    CHECK(check.all_finite);
    for (const auto& p : check.points) CHECK(std::isfinite(p.margin));
}

TEST_CASE("coupled maxima decorrelate") {
    const auto b = sample_sequence(CovarianceModel::iid(), 16, 4000, 2, SampleMethod::cholesky);
    CHECK(coupled_max_correlation(evolve_pair(b, 0.0, 3)) == Approx(1.0));
    const double near = coupled_max_correlation(evolve_pair(b, 0.1, 3));
    const double mid = coupled_max_correlation(evolve_pair(b, 1.0, 3));
    CHECK(near > mid);
    CHECK(std::abs(coupled_max_correlation(evolve_pair(b, 50.0, 3))) < 4.0 / std::sqrt(4000.0));
}
