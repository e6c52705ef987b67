#pragma once

// Exact samplers for centered unit-variance stationary Gaussian sequences and
// grid fields, plus the Ornstein-Uhlenbeck coupled pair X^t.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "superconc/covariance.hpp"

namespace superconc {

enum class SampleMethod {
    automatic,  ///< cholesky up to kCholeskyMaxPoints points, circulant above
    cholesky,
    circulant,
};

inline constexpr std::size_t kCholeskyMaxPoints = 2048;

std::string_view to_string(SampleMethod method);
SampleMethod sample_method_from_string(std::string_view name);

/// Memory cap in bytes; SUPERCONC_CAP_BYTES overrides the 2 GiB default.
std::size_t memory_cap_bytes();

/// A regular grid with `points[k]` nodes along axis k and uniform spacing.
/// Sequences are the 1-d grid with spacing 1. Flattened index is row-major:
/// i = i0 * points[1] + i1.
struct GridGeometry {
    int dim = 1;
    double spacing = 1.0;
    std::array<std::size_t, 2> points{1, 1};

    static GridGeometry sequence(std::size_t n);
    /// ⌊extent / spacing⌋ + 1 nodes per axis, so [0, extent] is covered.
    static GridGeometry box(int dim, std::span<const double> extent, double spacing);

    std::size_t size() const noexcept { return points[0] * (dim == 2 ? points[1] : 1); }
    /// Coordinates of flattened node `index` (dim columns).
    PointSet coordinates() const;

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Prepared factorization for one (model, geometry, method). Generation is a
/// pure function of (seed, stream) and safe to call concurrently.
class PathGenerator {
public:
    PathGenerator(const CovarianceModel& model, const GridGeometry& geometry,
                  SampleMethod method, std::uint64_t seed);

    std::size_t size() const noexcept;
    SampleMethod method() const noexcept;  ///< resolved method, never automatic
    std::uint64_t seed() const noexcept;
    const GridGeometry& geometry() const noexcept;
    const CovarianceModel& model() const noexcept;

    /// Writes the path of stream `stream` into `out` (length size()).
    void generate(std::uint64_t stream, std::span<double> out) const;

    /// Circulant embedding extent per axis (empty for cholesky / iid).
    std::vector<std::size_t> embedding_size() const;
    /// Circulant eigenvalues in FFT order (empty for cholesky / iid).
    std::vector<double> embedding_eigenvalues() const;
    /// Lower Cholesky factor (empty for circulant / iid).
    const Eigen::MatrixXd& cholesky_factor() const;

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
};

/// Lower-triangular Cholesky factor. Throws DecompositionError naming the
/// first leading minor whose pivot is not positive beyond `relative_tol`.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& gram, double relative_tol = 1e-12);

struct SampleBatch {
    Eigen::MatrixXd paths;  ///< size() x batch, column-major; column k is one path
    CovarianceModel model;
    GridGeometry geometry;
    std::uint64_t seed = 0;
    std::uint64_t stream_base = 0;  ///< column k uses stream stream_base + k
    SampleMethod method = SampleMethod::cholesky;

    std::size_t batch() const noexcept { return static_cast<std::size_t>(paths.cols()); }
    std::size_t length() const noexcept { return static_cast<std::size_t>(paths.rows()); }
    std::span<const double> path(std::size_t k) const {
        return {paths.data() + static_cast<std::ptrdiff_t>(k) * paths.rows(),
                static_cast<std::size_t>(paths.rows())};
    }
};

struct SampleOptions {
    std::uint64_t stream_base = 0;
    unsigned jobs = 1;
};

SampleBatch sample_sequence(const CovarianceModel& model, std::size_t n, std::size_t batch,
                            std::uint64_t seed, SampleMethod method = SampleMethod::automatic,
                            const SampleOptions& options = {});

/// d in {1, 2}; `extent` has d entries. Rejects d >= 3.
SampleBatch sample_field_grid(const CovarianceModel& model, int d, std::span<const double> extent,
                              double spacing, std::size_t batch, std::uint64_t seed,
                              SampleMethod method = SampleMethod::automatic,
                              const SampleOptions& options = {});

/// Materializes `batch` paths from a prepared generator.
SampleBatch sample_batch(const PathGenerator& generator, std::size_t batch,
                         const SampleOptions& options = {});

struct CoupledBatch {
    SampleBatch base;
    SampleBatch evolved;  ///< e^{-t} base + sqrt(1 - e^{-2t}) Y, Y an independent copy
    double time = 0.0;
};

/// Y is drawn from the same model and geometry with `seed2`.
CoupledBatch evolve_pair(const SampleBatch& batch, double t, std::uint64_t seed2, unsigned jobs = 1);

}  // namespace superconc
