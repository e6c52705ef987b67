#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "superconc/covering.hpp"
#include "superconc/errors.hpp"

using namespace superconc;
using doctest::Approx;

namespace {
std::vector<std::size_t> range(std::size_t a, std::size_t b) {
    std::vector<std::size_t> r;
    for (std::size_t i = a; i <= b; ++i) r.push_back(i);
    return r;
}
}  // namespace

TEST_CASE("sequence blocks for n = 16, alpha = 1/2") {
    CHECK(block_half_width(16, 0.5) == 4);
    const auto c = build_sequence_covering(16, 0.5);
    REQUIRE(c.blocks.size() == 3);
    CHECK(c.blocks[0] == range(0, 7));
    CHECK(c.blocks[1] == range(3, 11));
    CHECK(c.blocks[2] == range(7, 15));
    CHECK(c.multiplicity == 3);
}

TEST_CASE("degenerate coverings are rejected") {
    CHECK_THROWS_AS(build_sequence_covering(4, 0.9), ConfigError);
    CHECK_THROWS_AS(build_sequence_covering(2, 0.5), ConfigError);
}

TEST_CASE("sequence coverings satisfy both hypotheses") {
    const auto model = CovarianceModel::ornstein_uhlenbeck();
    for (std::size_t n : {50u, 200u}) {
        const auto c = build_sequence_covering(n, 0.5);
        const double r0 = evaluate(model, double(block_half_width(n, 0.5)));
        const auto check = verify_covering(c, gram_matrix(model, n), r0);
        CHECK(check.ok);
        CHECK(check.observed_multiplicity <= 3);
    }
}

TEST_CASE("a dropped block yields a witness") {
    const auto model = CovarianceModel::ornstein_uhlenbeck();
    auto c = build_sequence_covering(16, 0.5);
    c.blocks.erase(c.blocks.begin() + 1);
    const auto check = verify_covering(c, gram_matrix(model, 16), evaluate(model, 4.0));
    CHECK_FALSE(check.ok);
    REQUIRE(check.violating_pair);
    const auto [i, j] = *check.violating_pair;
    CHECK(i < j);
    CHECK(j - i <= 4);
}

TEST_CASE("rho and the scale K") {
    CHECK(rho_analytic(1e4, 0.5).rho == Approx(0.04));
    CHECK(rho_analytic(10.0, 0.5).rho == 1.0);
    CHECK_THROWS_AS(rho_analytic(1e4, -0.1), ConstraintError);
    CHECK(bound_scale(0.0, 1.0) == std::numeric_limits<double>::infinity());
    CHECK(bound_scale(0.1, std::exp(-4.0)) == Approx(0.25));
    CHECK(bound_scale(0.5, std::exp(-4.0)) == Approx(0.5));

    Covering one{4, {range(0, 3)}, 0.0, 1, CoveringKind::sequence_blocks};
    const std::vector<std::size_t> argmax(kMinRhoSamples, 2);
    CHECK(rho_monte_carlo(one, argmax).rho == 1.0);
    CHECK_THROWS_AS(rho_monte_carlo(one, std::vector<std::size_t>(10, 0)), DomainError);
}

TEST_CASE("iid sequence bound uses singletons") {
    const auto n = static_cast<std::size_t>(std::llround(std::exp(4.0)));
    SequenceBoundOptions opt;
    opt.batch = kMinRhoSamples;
    opt.c_sud = kDefaultSudakovConstant;
    const auto r = sequence_bound(CovarianceModel::iid(), n, 0.5, opt);
    CHECK(r.covering_kind == CoveringKind::singletons);
    CHECK(r.r0 == 0.0);
    REQUIRE(r.rho_analytic);
    CHECK(*r.rho_analytic == Approx(1.0 / double(n)));
    CHECK(std::abs(r.rho - 1.0 / double(n)) < 5.0 * r.rho_se + 1e-12);
    CHECK(r.K == Approx(1.0 / std::log(1.0 / r.rho)));
}

TEST_CASE("sequence bound rejects models outside the hypotheses") {
    const auto strong = CovarianceModel::tabulated({{0.0, 1.0}, {1.0, 0.6}, {50.0, 0.0}});
    CHECK_THROWS_WITH_AS(sequence_bound(strong, 100, 0.5), doctest::Contains("phi(1) = 0.6"), HypothesisError);
}

TEST_CASE("analytic route") {
    const auto e = sudakov_exponents(std::exp(-1.0), 1.0, 0.1);
    CHECK(e.delta == Approx(2.0 * (1.0 - std::exp(-1.0))));
    CHECK(e.epsilon == Approx(e.delta * e.delta / 2.0));
    CHECK(e.eta == Approx(e.epsilon - 0.1));
}

TEST_CASE("display scale") {
    const auto ou = CovarianceModel::ornstein_uhlenbeck();
    CHECK(display_scale(ou, 1e4, 0.5) == Approx(1.0 / std::log(1e4)));
    CHECK(display_scale(CovarianceModel::power_decay(1.0, 0.1), 100.0, 0.5) ==
          Approx(std::pow(1.0 + 100.0, -0.1)));
}

TEST_CASE("field covering numbers and scale") {
    const std::vector<double> e1{100.0};
    CHECK(box_covering_number(e1) == 50.0);
    const std::vector<double> e2{3.0, 5.0};
    CHECK(box_covering_number(e2) == 6.0);
    CHECK(field_scale(CovarianceModel::ornstein_uhlenbeck(), std::exp(10.0), 0.5) == Approx(0.1));
}

TEST_CASE("greedy net on a 20 x 20 grid") {
    const std::vector<double> extent{19.0, 19.0};
    const auto pts = GridGeometry::box(2, extent, 1.0).coordinates();
    const auto net = greedy_net(pts, 3.0);
    const auto check = verify_net(pts, net, 3.0);
    CHECK(check.separated);
    CHECK(check.maximal);
    CHECK(check.min_separation > 3.0);
    CHECK(check.max_gap <= 3.0);
    // Independent separation and maximality check.
    for (std::size_t a = 0; a < net.size(); ++a)
        for (std::size_t b = a + 1; b < net.size(); ++b)
            CHECK((pts.row(net[a]) - pts.row(net[b])).norm() > 3.0);
    for (Eigen::Index p = 0; p < pts.rows(); ++p) {
        double best = 1e300;
        for (auto q : net) best = std::min(best, (pts.row(p) - pts.row(q)).norm());
        CHECK(best <= 3.0);
    }
}

TEST_CASE("field bound is consistent with its own formula") {
    const std::vector<double> extent{60.0};
    FieldBoundOptions opt;
    opt.batch = 500;
    const auto r = field_bound(CovarianceModel::ornstein_uhlenbeck(), 1, extent, opt);
    REQUIRE(r.c1);
    REQUIRE(r.c2);
    CHECK(*r.c1 <= *r.c2);
    CHECK(*r.exponent == Approx(0.125 * (*r.c1 / *r.c2) * (*r.c1 / *r.c2)));
    CHECK(r.K == Approx(field_scale(CovarianceModel::ornstein_uhlenbeck(), 30.0, *r.exponent)));
}

TEST_CASE("correlated vectors") {
    CHECK(correlated_bound(0.01, 100000).K == Approx(std::max(0.01, 1.0 / std::log(1e5))));
    CHECK(correlated_bound(0.01, 22027).K == Approx(0.1).epsilon(1e-4));
    CHECK(correlated_bound(0.5, 10).K == 0.5);
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(3, 3);
    g(0, 1) = g(1, 0) = 0.3;
    CHECK_THROWS_AS(correlated_bound(0.2, 3, &g), HypothesisError);
    CHECK_NOTHROW(correlated_bound(0.3, 3, &g));
}

TEST_CASE("sign vectors") {
    const auto r = find_sign_vectors(64, 10, default_sign_threshold(64), 5, 10000);
    CHECK(r.vectors.size() == 10);
    CHECK(verify_sign_vectors(r.vectors, r.threshold));
    CHECK(default_sign_threshold(64) == Approx(16.0));
    const auto sat = find_sign_vectors(3, 10, 0.0, 5, 500);
    CHECK(sat.saturated);
    CHECK(sat.vectors.size() == 1);
    CHECK(sign_pair_pass_probability(100, std::pow(100.0, 2.0 / 3.0)) ==
          Approx(oracle::sign_dot_within(100, std::pow(100.0, 2.0 / 3.0))).epsilon(1e-12));
    CHECK(sign_pair_pass_probability(3, 0.0) == 0.0);
}

TEST_CASE("tail curves and crossover") {
    CHECK(tail_bound(0.25, 1.0, 2.0) == Approx(6.0 * std::exp(-4.0)));
    CHECK(gaussian_tail_bound(2.0) == Approx(2.0 * std::exp(-2.0)));
    const auto x = tail_crossover(0.01, 1.0);
    REQUIRE(x);
    for (double t : {x->lo, x->hi}) CHECK(tail_bound(0.01, 1.0, t) == Approx(gaussian_tail_bound(t)).epsilon(1e-7));
    const double mid = 0.5 * (x->lo + x->hi);
    CHECK(tail_bound(0.01, 1.0, mid) < gaussian_tail_bound(mid));
    CHECK_FALSE(tail_crossover(1.0, 1.0));
}

TEST_CASE("an underflowed r0 does not make zero covariances close") {
    const auto model = CovarianceModel::gaussian_smooth(2.0);
    const auto c = build_sequence_covering(1024, 0.5);
    const double r0 = evaluate(model, 32.0);
    CHECK(r0 == 0.0);
    CHECK(verify_covering(c, gram_matrix(model, 1024), r0).ok);
    CHECK(verify_covering(singleton_covering(8), gram_matrix(CovarianceModel::iid(), 8), 0.0).ok);
}
