#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "superconc/batch_io.hpp"
#include "superconc/errors.hpp"
#include "superconc/sampler.hpp"
#include "superconc/stats.hpp"

using namespace superconc;
using doctest::Approx;

TEST_CASE("cholesky of a 2x2 gram") {
    const auto L = cholesky_lower(gram_matrix(CovarianceModel::ornstein_uhlenbeck(), 2));
    CHECK(L(0, 0) == Approx(1.0));
    CHECK(L(0, 1) == 0.0);
    CHECK(L(1, 0) == Approx(std::exp(-1.0)));
    CHECK(L(1, 1) == Approx(std::sqrt(1.0 - std::exp(-2.0))));
}

TEST_CASE("singular grams are reported") {
    Eigen::MatrixXd g(2, 2);
    g << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(cholesky_lower(g), DecompositionError);
}

TEST_CASE("circulant embedding eigenvalues match a direct DFT") {
    const auto model = CovarianceModel::ornstein_uhlenbeck();
    const PathGenerator gen(model, GridGeometry::sequence(4), SampleMethod::circulant, 1);
    REQUIRE(gen.embedding_size() == std::vector<std::size_t>{8});
    std::vector<double> row(8);
    for (std::size_t j = 0; j < 8; ++j) row[j] = evaluate(model, double(std::min(j, 8 - j)));
    CHECK(row[4] == Approx(std::exp(-4.0)));
    const auto expect = oracle::dft_real(row);
    const auto got = gen.embedding_eigenvalues();
    REQUIRE(got.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) CHECK(got[k] == Approx(expect[k]).epsilon(1e-10));
}

TEST_CASE("both methods reproduce the covariance") {
    const auto model = CovarianceModel::ornstein_uhlenbeck(0.5);
    for (auto method : {SampleMethod::cholesky, SampleMethod::circulant}) {
        const auto b = sample_sequence(model, 6, 40000, 11, method);
        const auto row0 = b.paths.row(0);
        const auto row3 = b.paths.row(3);
        const double var = row0.squaredNorm() / 40000.0;
        const double cov = row0.dot(row3) / 40000.0;
        CHECK(std::abs(var - 1.0) < 0.03);
        CHECK(std::abs(cov - std::exp(-1.5)) < 0.03);
    }
}

TEST_CASE("generation is deterministic and independent of jobs") {
    const auto model = CovarianceModel::gaussian_smooth(2.0);
    const auto a = sample_sequence(model, 50, 64, 5, SampleMethod::circulant, {0, 1});
    const auto b = sample_sequence(model, 50, 64, 5, SampleMethod::circulant, {0, 4});
    CHECK(a.paths == b.paths);
    const auto c = sample_sequence(model, 50, 64, 5, SampleMethod::circulant, {10, 1});
    CHECK(c.paths.col(0) == a.paths.col(10));
}

TEST_CASE("a one-dimensional field equals the matching sequence") {
    const auto model = CovarianceModel::ornstein_uhlenbeck();
    const std::vector<double> extent{10.0};
    const auto f = sample_field_grid(model, 1, extent, 1.0, 8, 3, SampleMethod::cholesky);
    const auto s = sample_sequence(model, 11, 8, 3, SampleMethod::cholesky);
    REQUIRE(f.length() == 11);
    CHECK(f.paths == s.paths);
}

TEST_CASE("two-dimensional grid geometry") {
    const std::vector<double> extent{2.0, 1.0};
    const auto g = GridGeometry::box(2, extent, 0.5);
    CHECK(g.points[0] == 5);
    CHECK(g.points[1] == 3);
    CHECK(g.size() == 15);
    const auto pts = g.coordinates();
    CHECK(pts.rows() == 15);
    CHECK(pts.cols() == 2);
}

TEST_CASE("ornstein-uhlenbeck coupling") {
    const auto b = sample_sequence(CovarianceModel::iid(), 1, 40000, 9, SampleMethod::cholesky);
    const auto same = evolve_pair(b, 0.0, 77);
    CHECK(same.evolved.paths == b.paths);
    const auto half = evolve_pair(b, std::log(2.0), 77);
    const double cov = b.paths.row(0).dot(half.evolved.paths.row(0)) / 40000.0;
    CHECK(std::abs(cov - 0.5) < 0.02);
    const double var = half.evolved.paths.row(0).squaredNorm() / 40000.0;
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("batch files round-trip") {
    const auto b = sample_sequence(CovarianceModel::ornstein_uhlenbeck(), 7, 5, 21);
    const auto path = std::filesystem::temp_directory_path() / "superconc_test_batch.bin";
    write_batch(b, path);
    const auto h = read_batch_header(path);
    CHECK(h.n == 7);
    CHECK(h.batch == 5);
    const auto r = read_batch(path);
    CHECK(r.paths == b.paths);
    CHECK(r.model == b.model);
    CHECK(r.seed == b.seed);
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("memory cap follows the environment") {
    ::setenv("SUPERCONC_CAP_BYTES", "1000", 1);
    CHECK(memory_cap_bytes() == 1000);
    CHECK_THROWS_AS(sample_sequence(CovarianceModel::iid(), 100, 100, 1), CapacityError);
    ::unsetenv("SUPERCONC_CAP_BYTES");
    CHECK(memory_cap_bytes() > 1000);
}
