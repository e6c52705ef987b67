#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "experiment.hpp"
#include "superconc/errors.hpp"

using namespace superconc;
using namespace superconc::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("superconc_cli_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("unknown kinds and keys name the field") {
    CHECK_THROWS_WITH_AS(config_from_json(json{{"kind", "nonsense"}}), doctest::Contains("config.kind"), ConfigError);
    CHECK_THROWS_WITH_AS(config_from_json(json{{"kind", "gumbel_convergence"}, {"bogus", 1}}),
                         doctest::Contains("config.bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(config_from_json(json{{"kind", "gumbel_convergence"}, {"model", {{"kind", "nope"}}}}), doctest::Contains("model.kind"),
                         ConfigError);
}

TEST_CASE("alpha outside (0, 1) is a range diagnostic") {
    ExperimentConfig c;
    c.kind = ExperimentKind::tail_bounds;
    c.alpha = 1.0;
    const auto d = validate(c);
    REQUIRE_FALSE(d.empty());
    CHECK(d.front().field == "alpha");
    CHECK(d.front().message.find("range error") != std::string::npos);
}

TEST_CASE("capacity diagnostic") {
    ExperimentConfig c;
    c.kind = ExperimentKind::gumbel_convergence;
    c.sizes = {1000000};
    c.batch = 100000;
    ::setenv("SUPERCONC_CAP_BYTES", "1000000", 1);
    const auto d = validate(c);
    ::unsetenv("SUPERCONC_CAP_BYTES");
    bool found = false;
    for (const auto& x : d) found = found || x.message.find("capacity") != std::string::npos;
    CHECK(found);
    CHECK(estimate_memory(c) > 1000000);
}

TEST_CASE("model and generator specs") {
    CHECK(parse_model_spec("ornstein_uhlenbeck:rate=2") == CovarianceModel::ornstein_uhlenbeck(2.0));
    CHECK(parse_model_spec(R"({"kind":"power_decay","params":{"power":0.5}})") ==
          CovarianceModel::power_decay(1.0, 0.5));
    CHECK(parse_generator("disjoint:3,4").N() == 3);
    CHECK(parse_generator("sliding:10,3").N() == 8);
    CHECK_THROWS_AS(parse_generator("ring:3"), ConfigError);
}

TEST_CASE("config echo round-trips") {
    ExperimentConfig c;
    c.kind = ExperimentKind::scan_risk;
    c.delta = 0.05;
    c.c = 1.5;
    const auto j = config_to_json(c);
    CHECK(config_to_json(config_from_json(j)) == j);
    CHECK_FALSE(j.contains("out"));
    CHECK_FALSE(j.contains("jobs"));
}

TEST_CASE("equal configs produce identical files") {
    ExperimentConfig c;
    c.kind = ExperimentKind::gumbel_convergence;
    c.model = CovarianceModel::ornstein_uhlenbeck();
    c.sizes = {32, 64};
    c.batch = 300;
    c.seed = 9;
    const auto da = scratch("a");
    const auto db = scratch("b");
    c.out = da;
    const auto ra = run(c);
    c.out = db;
    c.jobs = 2;
    const auto rb = run(c);
    REQUIRE(ra.files == rb.files);
    for (const auto& f : ra.files) {
        if (f == "timing.json") continue;
        CHECK_MESSAGE(slurp(da / f) == slurp(db / f), f);
        CHECK_FALSE(slurp(da / f).empty());
    }
    std::filesystem::remove_all(da);
    std::filesystem::remove_all(db);
}
