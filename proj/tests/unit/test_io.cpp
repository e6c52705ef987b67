#include <doctest.h>

#include <cmath>
#include <limits>

#include "superconc/errors.hpp"
#include "superconc/json_io.hpp"

using namespace superconc;

TEST_CASE("double formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "null");
    CHECK(format_double(std::nan("")) == "null");
}

TEST_CASE("dump is stable and round-trips") {
    json j{{"b", 1.5}, {"a", {1, 2}}, {"c", std::numeric_limits<double>::quiet_NaN()}};
    const auto text = dump_json(j);
    CHECK(text == dump_json(j));
    CHECK(text.find("\"a\"") < text.find("\"b\""));
    const auto back = json::parse(text);
    CHECK(back["b"] == 1.5);
    CHECK(back["c"].is_null());
    const double third = 1.0 / 3.0;
    CHECK(json::parse(dump_json(json{{"x", third}}))["x"].get<double>() == third);
}

TEST_CASE("models round-trip") {
    for (const auto& m : {CovarianceModel::iid(), CovarianceModel::ornstein_uhlenbeck(0.7, 1.5),
                          CovarianceModel::gaussian_smooth(2.0), CovarianceModel::power_decay(3.0, 0.5),
                          CovarianceModel::log_decay(1.0, 2.0),
                          CovarianceModel::tabulated({{0.0, 1.0}, {2.0, 0.1}})}) {
        CHECK(model_from_json(model_to_json(m)) == m);
    }
}

TEST_CASE("model errors name the field") {
    CHECK_THROWS_WITH_AS(model_from_json(json{{"kind", "brownian"}}), doctest::Contains("model.kind"), ConfigError);
    CHECK_THROWS_WITH_AS(model_from_json(json{{"kind", "ornstein_uhlenbeck"}, {"params", {{"x", 1}}}}),
                         doctest::Contains("model.params.x"), ConfigError);
}

TEST_CASE("geometry and scan classes round-trip") {
    const std::vector<double> extent{4.0, 2.0};
    const auto g = GridGeometry::box(2, extent, 0.5);
    CHECK(geometry_from_json(geometry_to_json(g)) == g);
    const auto cls = ScanClass::sliding(10, 3);
    const auto back = scan_class_from_json(scan_class_to_json(cls));
    CHECK(back.sets == cls.sets);
    CHECK(back.n == cls.n);
    CHECK_THROWS_AS(scan_class_from_json(json{{"n", 3}, {"sets", {{0, 5}}}}), ConfigError);
}

TEST_CASE("reports serialize") {
    const auto h = to_json_value(check_hypotheses(CovarianceModel::ornstein_uhlenbeck()));
    CHECK(h["phi1_lt_half"] == true);
    BoundReport r;
    const auto b = to_json_value(r);
    CHECK(b["K"].is_null());
    CHECK(dump_json(b).find("null") != std::string::npos);
}
