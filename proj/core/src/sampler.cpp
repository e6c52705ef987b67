#include "superconc/sampler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "superconc/errors.hpp"
#include "superconc/parallel.hpp"
#include "superconc/rng.hpp"

namespace superconc {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr double kEmbeddingTolerance = 1e-10;
constexpr std::size_t kMaxPaddingFactor = 64;

void check_capacity(std::size_t bytes, const char* what) {
    const std::size_t cap = memory_cap_bytes();
    if (bytes > cap) {
        std::ostringstream os;
        os << what << " needs " << bytes << " bytes, above the memory cap of " << cap
           << " bytes (set SUPERCONC_CAP_BYTES to raise it)";
        throw CapacityError(os.str(), bytes, cap);
    }
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) throw CapacityError("fftw_malloc failed", sizeof(fftw_complex) * n, memory_cap_bytes());
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

fftw_plan make_plan(const std::array<std::size_t, 2>& extent, fftw_complex* buffer) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_plan plan = nullptr;
    if (extent[1] == 1)
        plan = fftw_plan_dft_1d(static_cast<int>(extent[0]), buffer, buffer, FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    else
        plan = fftw_plan_dft_2d(static_cast<int>(extent[0]), static_cast<int>(extent[1]), buffer, buffer,
                                FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw Error("FFTW failed to create a plan");
    return plan;
}

void destroy_plan(fftw_plan plan) {
    if (plan == nullptr) return;
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

}  // namespace

std::string_view to_string(SampleMethod method) {
    switch (method) {
        case SampleMethod::automatic: return "auto";
        case SampleMethod::cholesky: return "cholesky";
        case SampleMethod::circulant: return "circulant";
    }
    return "unknown";
}

SampleMethod sample_method_from_string(std::string_view name) {
    if (name == "auto" || name == "automatic") return SampleMethod::automatic;
    if (name == "cholesky") return SampleMethod::cholesky;
    if (name == "circulant") return SampleMethod::circulant;
    throw ConfigError("unknown sampling method '" + std::string(name) + "'");
}

std::size_t memory_cap_bytes() {
    if (const char* env = std::getenv("SUPERCONC_CAP_BYTES")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t{2} << 30;
}

GridGeometry GridGeometry::sequence(std::size_t n) {
    if (n == 0) throw DomainError("sequence length must be positive");
    GridGeometry g;
    g.dim = 1;
    g.spacing = 1.0;
    g.points = {n, 1};
    return g;
}

GridGeometry GridGeometry::box(int dim, std::span<const double> extent, double spacing) {
    if (dim >= 3) throw DomainError("fields of dimension 3 or more are not supported");
    if (dim < 1) throw DomainError("field dimension must be 1 or 2");
    if (extent.size() != static_cast<std::size_t>(dim)) throw DomainError("extent needs one entry per axis");
    if (!(spacing > 0.0)) throw DomainError("grid spacing must be positive");
    GridGeometry g;
    g.dim = dim;
    g.spacing = spacing;
    for (int k = 0; k < dim; ++k) {
        if (!(extent[k] > 0.0)) throw DomainError("extent must be positive");
        // Small relative nudge so that e.g. 10 / 1 gives exactly 11 nodes.
        const auto nodes = static_cast<std::size_t>(std::floor(extent[k] / spacing * (1.0 + 1e-12))) + 1;
        if (nodes < 2) throw DomainError("extent / spacing must yield at least 2 points per axis");
        g.points[k] = nodes;
    }
    return g;
}

PointSet GridGeometry::coordinates() const {
    PointSet pts(static_cast<Eigen::Index>(size()), dim);
    for (std::size_t i = 0; i < size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (dim == 1) {
            pts(row, 0) = spacing * static_cast<double>(i);
        } else {
            pts(row, 0) = spacing * static_cast<double>(i / points[1]);
            pts(row, 1) = spacing * static_cast<double>(i % points[1]);
        }
    }
    return pts;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& gram, double relative_tol) {
    const Eigen::Index n = gram.rows();
    if (gram.cols() != n) throw DomainError("Cholesky needs a square matrix");
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    const double scale = n > 0 ? gram.diagonal().cwiseAbs().maxCoeff() : 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double pivot = gram(j, j) - L.row(j).head(j).squaredNorm();
        if (!(pivot > relative_tol * scale)) {
            std::ostringstream os;
            os << "gram matrix is not numerically positive definite: leading minor of order " << (j + 1)
               << " has pivot " << pivot;
            throw DecompositionError(os.str(), static_cast<std::size_t>(j), pivot);
        }
        const double d = std::sqrt(pivot);
        L(j, j) = d;
        const Eigen::Index rest = n - j - 1;
        if (rest > 0) {
            L.col(j).tail(rest) = (gram.col(j).tail(rest) - L.bottomLeftCorner(rest, j) * L.row(j).head(j).transpose()) / d;
        }
    }
    return L;
}

struct PathGenerator::Impl {
    CovarianceModel model;
    GridGeometry geometry;
    SampleMethod method = SampleMethod::cholesky;
    std::uint64_t seed = 0;
    bool identity = false;

    Eigen::MatrixXd factor;

    std::array<std::size_t, 2> embedding{1, 1};
    std::vector<double> eigenvalues;
    std::vector<double> amplitude;  // sqrt(max(lambda, 0) / M)
    fftw_plan plan = nullptr;

    Impl() = default;
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
    ~Impl() { destroy_plan(plan); }

    std::size_t embedding_total() const { return embedding[0] * embedding[1]; }

    void build_cholesky() {
        const std::size_t n = geometry.size();
        check_capacity(2 * n * n * sizeof(double), "Cholesky factorization");
        const Eigen::MatrixXd gram = geometry.dim == 1 && geometry.points[1] == 1
                                         ? gram_matrix(model, n, geometry.spacing)
                                         : gram_matrix(model, geometry.coordinates());
        factor = cholesky_lower(gram);
    }

    // Eigenvalues of the even circulant extension of phi over an m0 x m1 torus.
    std::vector<double> embedding_spectrum(const std::array<std::size_t, 2>& m) const {
        const std::size_t total = m[0] * m[1];
        FftwBuffer buf(total);
        fftw_plan p = make_plan(m, buf.data);
        for (std::size_t k0 = 0; k0 < m[0]; ++k0) {
            const double w0 = static_cast<double>(std::min(k0, m[0] - k0));
            for (std::size_t k1 = 0; k1 < m[1]; ++k1) {
                const double w1 = static_cast<double>(std::min(k1, m[1] - k1));
                const double v = evaluate(model, geometry.spacing * std::sqrt(w0 * w0 + w1 * w1));
                buf.data[k0 * m[1] + k1][0] = v;
                buf.data[k0 * m[1] + k1][1] = 0.0;
            }
        }
        fftw_execute_dft(p, buf.data, buf.data);
        destroy_plan(p);
        std::vector<double> lambda(total);
        for (std::size_t k = 0; k < total; ++k) lambda[k] = buf.data[k][0];
        return lambda;
    }

    void build_circulant() {
        const std::size_t n0 = geometry.points[0];
        const std::size_t n1 = geometry.dim == 2 ? geometry.points[1] : 1;
        const std::array<std::size_t, 2> base{2 * n0, n1 > 1 ? 2 * n1 : 1};
        std::vector<std::size_t> attempted;
        double most_negative = 0.0;
        for (std::size_t pad = 1; pad <= kMaxPaddingFactor; pad *= 2) {
            const std::array<std::size_t, 2> m{base[0] * pad, base[1] == 1 ? 1 : base[1] * pad};
            const std::size_t total = m[0] * m[1];
            check_capacity(total * (sizeof(fftw_complex) + 2 * sizeof(double)), "circulant embedding");
            attempted.push_back(total);
            std::vector<double> lambda;
            try {
                lambda = embedding_spectrum(m);
            } catch (const RangeError& e) {
                std::ostringstream os;
                os << "circulant embedding of size " << total << " needs lags beyond the covariance table: "
                   << e.what();
                throw EmbeddingError(os.str(), most_negative, attempted);
            }
            const double top = *std::max_element(lambda.begin(), lambda.end());
            const double bottom = *std::min_element(lambda.begin(), lambda.end());
            if (bottom >= -kEmbeddingTolerance * top) {
                embedding = m;
                eigenvalues = std::move(lambda);
                amplitude.resize(total);
                for (std::size_t k = 0; k < total; ++k)
                    amplitude[k] = std::sqrt(std::max(eigenvalues[k], 0.0) / static_cast<double>(total));
                FftwBuffer scratch(total);
                plan = make_plan(embedding, scratch.data);
                return;
            }
            most_negative = attempted.size() == 1 ? bottom : std::min(most_negative, bottom);
        }
        std::ostringstream os;
        os << "circulant embedding has a negative eigenvalue (most negative " << most_negative
           << ") at every padding tried; sizes:";
        for (auto s : attempted) os << ' ' << s;
        throw EmbeddingError(os.str(), most_negative, attempted);
    }

    void generate(std::uint64_t stream, std::span<double> out) const {
        NormalStream normals(seed, stream);
        if (identity) {
            normals.fill_normal(out);
            return;
        }
        if (method == SampleMethod::cholesky) {
            Eigen::VectorXd z(static_cast<Eigen::Index>(out.size()));
            normals.fill_normal({z.data(), out.size()});
            Eigen::Map<Eigen::VectorXd> y(out.data(), static_cast<Eigen::Index>(out.size()));
            y.noalias() = factor.triangularView<Eigen::Lower>() * z;
            return;
        }
        const std::size_t total = embedding_total();
        FftwBuffer buf(total);
        for (std::size_t k = 0; k < total; ++k) {
            const double re = normals.next_normal();
            const double im = normals.next_normal();
            buf.data[k][0] = amplitude[k] * re;
            buf.data[k][1] = amplitude[k] * im;
        }
        fftw_execute_dft(plan, buf.data, buf.data);
        const std::size_t n1 = geometry.dim == 2 ? geometry.points[1] : 1;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const std::size_t i0 = i / n1;
            const std::size_t i1 = i % n1;
            out[i] = buf.data[i0 * embedding[1] + i1][0];
        }
    }
};

PathGenerator::PathGenerator(const CovarianceModel& model, const GridGeometry& geometry, SampleMethod method,
                             std::uint64_t seed) {
    model.validate();
    if (geometry.dim < 1 || geometry.dim > 2) throw DomainError("grid dimension must be 1 or 2");
    auto impl = std::make_shared<Impl>();
    impl->model = model;
    impl->geometry = geometry;
    impl->seed = seed;
    if (method == SampleMethod::automatic)
        method = geometry.size() > kCholeskyMaxPoints ? SampleMethod::circulant : SampleMethod::cholesky;
    impl->method = method;
    if (model.kind == CovarianceKind::iid) {
        // The factor is the identity under either method.
        impl->identity = true;
    } else if (method == SampleMethod::cholesky) {
        impl->build_cholesky();
    } else {
        impl->build_circulant();
    }
    impl_ = std::move(impl);
}

std::size_t PathGenerator::size() const noexcept { return impl_->geometry.size(); }
SampleMethod PathGenerator::method() const noexcept { return impl_->method; }
std::uint64_t PathGenerator::seed() const noexcept { return impl_->seed; }
const GridGeometry& PathGenerator::geometry() const noexcept { return impl_->geometry; }
const CovarianceModel& PathGenerator::model() const noexcept { return impl_->model; }

void PathGenerator::generate(std::uint64_t stream, std::span<double> out) const {
    if (out.size() != size()) throw DomainError("output span length does not match the generator size");
    impl_->generate(stream, out);
}

std::vector<std::size_t> PathGenerator::embedding_size() const {
    if (impl_->eigenvalues.empty()) return {};
    if (impl_->embedding[1] == 1) return {impl_->embedding[0]};
    return {impl_->embedding[0], impl_->embedding[1]};
}

std::vector<double> PathGenerator::embedding_eigenvalues() const { return impl_->eigenvalues; }

const Eigen::MatrixXd& PathGenerator::cholesky_factor() const { return impl_->factor; }

SampleBatch sample_batch(const PathGenerator& generator, std::size_t batch, const SampleOptions& options) {
    if (batch == 0) throw DomainError("batch must be positive");
    const std::size_t n = generator.size();
    check_capacity(n * batch * sizeof(double), "sample batch");
    SampleBatch out;
    out.paths.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(batch));
    out.model = generator.model();
    out.geometry = generator.geometry();
    out.seed = generator.seed();
    out.stream_base = options.stream_base;
    out.method = generator.method();
    parallel_for(batch, options.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            generator.generate(options.stream_base + k,
                               {out.paths.data() + static_cast<std::ptrdiff_t>(k * n), n});
    });
    return out;
}

SampleBatch sample_sequence(const CovarianceModel& model, std::size_t n, std::size_t batch, std::uint64_t seed,
                            SampleMethod method, const SampleOptions& options) {
    if (n == 0) throw DomainError("sequence length must be positive");
    const PathGenerator generator(model, GridGeometry::sequence(n), method, seed);
    return sample_batch(generator, batch, options);
}

SampleBatch sample_field_grid(const CovarianceModel& model, int d, std::span<const double> extent, double spacing,
                              std::size_t batch, std::uint64_t seed, SampleMethod method,
                              const SampleOptions& options) {
    const GridGeometry geometry = GridGeometry::box(d, extent, spacing);
    const PathGenerator generator(model, geometry, method, seed);
    return sample_batch(generator, batch, options);
}

CoupledBatch evolve_pair(const SampleBatch& batch, double t, std::uint64_t seed2, unsigned jobs) {
    if (!(t >= 0.0)) throw DomainError("evolution time must be nonnegative");
    const PathGenerator generator(batch.model, batch.geometry, batch.method, seed2);
    SampleOptions options;
    options.stream_base = batch.stream_base;
    options.jobs = jobs;
    const SampleBatch copy = sample_batch(generator, batch.batch(), options);
    const double decay = std::exp(-t);
    const double noise = std::sqrt(-std::expm1(-2.0 * t));
    CoupledBatch out;
    out.base = batch;
    out.evolved = copy;
    out.evolved.paths = decay * batch.paths + noise * copy.paths;
    out.time = t;
    return out;
}

}  // namespace superconc
