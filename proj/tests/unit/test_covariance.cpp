#include <doctest.h>

#include <cmath>

#include "superconc/covariance.hpp"
#include "superconc/errors.hpp"

using namespace superconc;
using doctest::Approx;

TEST_CASE("closed forms") {
    CHECK(evaluate(CovarianceModel::ornstein_uhlenbeck(), 1.0) == Approx(std::exp(-1.0)));
    CHECK(evaluate(CovarianceModel::ornstein_uhlenbeck(2.0, 2.0), 1.5) == Approx(std::exp(-4.5)));
    CHECK(evaluate(CovarianceModel::gaussian_smooth(2.0), 1.0) == Approx(std::exp(-1.0)));
    CHECK(evaluate(CovarianceModel::power_decay(1.0, 1.0), 3.0) == Approx(0.1));
    CHECK(evaluate(CovarianceModel::log_decay(1.0, 1.0), std::exp(1.0) - 1.0) == Approx(0.5));
    CHECK(evaluate(CovarianceModel::iid(), 0.0) == 1.0);
    CHECK(evaluate(CovarianceModel::iid(), 1.0) == 0.0);
}

TEST_CASE("every model is normalized and takes nonnegative lags") {
    for (const auto& m : {CovarianceModel::iid(), CovarianceModel::ornstein_uhlenbeck(0.7, 1.5),
                          CovarianceModel::gaussian_smooth(3.0), CovarianceModel::power_decay(2.0, 0.5),
                          CovarianceModel::log_decay(1.0, 2.0)}) {
        CHECK(evaluate(m, 0.0) == 1.0);
        CHECK_THROWS_AS(evaluate(m, -2.5), DomainError);
    }
}

TEST_CASE("table interpolation") {
    const auto m = CovarianceModel::tabulated({{0.0, 1.0}, {1.0, 0.4}, {3.0, 0.0}});
    CHECK(evaluate(m, 0.5) == Approx(0.7));
    CHECK(evaluate(m, 2.0) == Approx(0.2));
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(CovarianceModel::ornstein_uhlenbeck(1.0, 2.5).validate(), ConfigError);
    CHECK_THROWS_AS(CovarianceModel::ornstein_uhlenbeck(-1.0).validate(), ConfigError);
    CHECK_THROWS_AS(CovarianceModel::tabulated({{0.0, 0.9}, {1.0, 0.1}}).validate(), ConfigError);
    CHECK_THROWS(covariance_kind_from_string("brownian"));
    CHECK(covariance_kind_from_string("power_decay") == CovarianceKind::power_decay);
}

TEST_CASE("hypothesis checks") {
    const auto ou = check_hypotheses(CovarianceModel::ornstein_uhlenbeck());
    CHECK(ou.nonincreasing);
    CHECK(ou.phi1_lt_half);
    CHECK(ou.phi1 == Approx(std::exp(-1.0)));
    CHECK(ou.berman_ok);

    const auto strong = check_hypotheses(CovarianceModel::tabulated({{0.0, 1.0}, {1.0, 0.6}, {2.0, 0.0}}));
    CHECK_FALSE(strong.phi1_lt_half);
    CHECK(strong.phi1 == Approx(0.6));
    CHECK_FALSE(strong.sequence_pipeline_ok());

    const auto bump = check_hypotheses(
        CovarianceModel::tabulated({{0.0, 1.0}, {1.0, 0.2}, {2.0, 0.3}, {3.0, 0.0}}), {0.0, 1.0, 2.0, 3.0});
    CHECK_FALSE(bump.nonincreasing);
    REQUIRE(bump.nonincreasing_witness);
    CHECK(*bump.nonincreasing_witness == Approx(2.0));

    const auto slow = check_hypotheses(CovarianceModel::log_decay(1.0, 0.5));
    CHECK_FALSE(slow.berman_ok);
}

TEST_CASE("gram matrices") {
    const auto g = gram_matrix(CovarianceModel::ornstein_uhlenbeck(), 3);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == Approx(std::exp(-1.0)));
    CHECK(g(0, 2) == Approx(std::exp(-2.0)));
    CHECK(g(2, 0) == g(0, 2));

    PointSet pts(2, 2);
    pts << 0.0, 0.0, 3.0, 4.0;
    const auto h = gram_matrix(CovarianceModel::ornstein_uhlenbeck(), pts);
    CHECK(h(0, 1) == Approx(std::exp(-5.0)));
}
