#pragma once

// Coverings of index sets and the constant pipelines behind the tail bounds
// 6 exp(-c t / sqrt(K)).

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "superconc/covariance.hpp"
#include "superconc/extremes.hpp"
#include "superconc/sampler.hpp"

namespace superconc {

enum class CoveringKind { sequence_blocks, field_net, singletons };

std::string_view to_string(CoveringKind kind);

/// Blocks of zero-based indices into {0, ..., n-1}.
struct Covering {
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> blocks;
    double r0 = 0.0;
    int multiplicity = 1;  ///< declared bound C on the number of blocks holding an index
    CoveringKind kind = CoveringKind::singletons;
};

/// floor(n^alpha), robust to exact powers such as 16^0.5.
std::size_t block_half_width(std::size_t n, double alpha);

/// Overlapping blocks of 2m + 1 consecutive indices starting every m indices,
/// m = floor(n^alpha), clamped to the index range; C = 3. Throws ConfigError
/// when one block would cover everything (lower alpha) or m < 1.
Covering build_sequence_covering(std::size_t n, double alpha);

Covering singleton_covering(std::size_t n, double r0 = 0.0);

struct CoveringCheck {
    bool ok = true;
    std::optional<std::pair<std::size_t, std::size_t>> violating_pair;  ///< Gamma_ij >= r0, no shared block
    std::optional<std::size_t> violating_index;                         ///< uncovered or over-covered index
    int observed_multiplicity = 0;
    std::string reason;
};

/// Exhaustive check of both covering hypotheses against `gram`. A pair is
/// close when its entry is >= r0 and positive.
CoveringCheck verify_covering(const Covering& covering, const Eigen::MatrixXd& gram, double r0);

enum class RhoSource { analytic, monte_carlo };

std::string_view to_string(RhoSource source);

struct RhoEstimate {
    double rho = 1.0;
    RhoSource source = RhoSource::monte_carlo;
    double standard_error = 0.0;
    std::size_t samples = 0;
    std::size_t argmax_block = 0;
};

inline constexpr std::size_t kMinRhoSamples = 10000;

/// max_D P(I in D) from argmax draws; needs at least kMinRhoSamples of them.
RhoEstimate rho_monte_carlo(const Covering& covering, std::span<const std::size_t> argmax);

/// Sudakov-gap exponents of the analytic route.
struct SudakovExponents {
    double delta = 0.0;    ///< 2 (1 - phi(1))
    double epsilon = 0.0;  ///< (c_sud delta)^2 / 2
    double eta = 0.0;      ///< epsilon - alpha
};

/// Default Sudakov constant; the theory only asserts that one exists.
inline const double kDefaultSudakovConstant = 0.47918940950330096;  // 1 / sqrt(2 pi log 2)

SudakovExponents sudakov_exponents(double phi1, double c_sud, double alpha);

/// rho = min(1, 4 / n^eta); throws ConstraintError when eta <= 0.
RhoEstimate rho_analytic(double n, double eta);

/// K = max(r0, 1 / log(1 / rho)); +infinity when rho >= 1.
double bound_scale(double r0, double rho);

/// max(phi(n^alpha), 1 / log n), the scale shown in the sequence tail bound.
double display_scale(const CovarianceModel& model, double n, double alpha);

enum class BoundPipeline { sequence, field, correlated };

std::string_view to_string(BoundPipeline pipeline);

struct BoundReport {
    BoundPipeline pipeline = BoundPipeline::sequence;
    std::size_t n = 0;  ///< index count (grid size for fields)
    CoveringKind covering_kind = CoveringKind::singletons;
    std::size_t blocks = 0;
    int multiplicity = 1;

    std::optional<double> alpha;
    std::optional<std::size_t> m;
    double r0 = 0.0;
    double rho = 1.0;
    RhoSource rho_source = RhoSource::monte_carlo;
    double rho_se = 0.0;
    std::optional<double> rho_analytic;  ///< cross-check when available

    std::optional<double> delta;
    std::optional<double> epsilon;
    std::optional<double> eta;
    std::optional<double> c_sud;

    double K = std::numeric_limits<double>::infinity();
    std::optional<double> K_display;  ///< max(phi(n^alpha), 1/log n) or the field display formula
    bool usable = false;
    std::optional<double> c;

    // Field pipeline.
    std::optional<double> covering_number;
    std::optional<double> s0;
    std::optional<double> c1;
    std::optional<double> c2;
    std::optional<double> fit_slope;
    std::optional<double> exponent;
    std::optional<std::size_t> net_size;

    std::vector<std::string> notes;
};

struct SequenceBoundOptions {
    RhoSource rho_source = RhoSource::monte_carlo;
    std::optional<double> c_sud;  ///< enables the analytic cross-check / route
    std::optional<double> c;      ///< tail constant, carried into the report
    std::size_t batch = kMinRhoSamples;
    std::uint64_t seed = 1;
    SampleMethod method = SampleMethod::automatic;
    unsigned jobs = 1;
};

/// Constant pipeline for stationary sequences. Throws HypothesisError if phi
/// is not non-increasing or phi(1) >= 1/2.
BoundReport sequence_bound(const CovarianceModel& model, std::size_t n, double alpha,
                           const SequenceBoundOptions& options = {});

/// N(A) for the box [0, e_1] x ... : prod ceil(e_i / 2).
double box_covering_number(std::span<const double> extent);

/// max(phi(N^exponent), 1 / log N).
double field_scale(const CovarianceModel& model, double covering_number, double exponent);

/// Greedy maximal s0-separated subset of `points` (strict separation > s0),
/// scanning rows in order. Returns row indices.
std::vector<std::size_t> greedy_net(const PointSet& points, double s0);

struct NetCheck {
    bool separated = true;
    bool maximal = true;
    double min_separation = std::numeric_limits<double>::infinity();
    double max_gap = 0.0;  ///< max over points of the distance to the nearest net point
};

NetCheck verify_net(const PointSet& points, std::span<const std::size_t> net, double s0);

/// Balls of radius `radius` around the net points as a covering.
Covering net_covering(const PointSet& points, std::span<const std::size_t> net, double radius, double r0);

struct FieldBoundOptions {
    std::optional<double> exponent_ratio;                ///< overrides (1/8)(c1/c2)^2
    std::optional<std::pair<double, double>> c1c2;      ///< skips the regression
    double spacing = 0.5;
    std::size_t batch = 2000;
    std::size_t scales = 4;
    std::uint64_t seed = 1;
    SampleMethod method = SampleMethod::automatic;
    unsigned jobs = 1;
};

struct SupremumScaling {
    std::vector<double> covering_numbers;
    std::vector<double> mean_suprema;
    double c1 = 0.0;  ///< min m(A) / sqrt(log N(A)) over scales
    double c2 = 0.0;  ///< max m(A) / sqrt(log N(A)) over scales
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Regresses empirical E[sup over sub-box] on sqrt(log N(A)) over dyadic
/// sub-boxes [0, extent / 2^j]^d of one simulated grid batch.
SupremumScaling estimate_supremum_scaling(const SampleBatch& batch, std::span<const double> extent,
                                          std::size_t scales);

BoundReport field_bound(const CovarianceModel& model, int d, std::span<const double> extent,
                        const FieldBoundOptions& options = {});

/// Singleton covering with K = max(epsilon, 1/log n). When `gram` is given,
/// every off-diagonal entry must be <= epsilon (HypothesisError otherwise).
BoundReport correlated_bound(double epsilon, std::size_t n, const Eigen::MatrixXd* gram = nullptr);

using SignVector = std::vector<std::int8_t>;

struct SignVectorResult {
    std::vector<SignVector> vectors;
    std::size_t tries = 0;
    bool saturated = false;
    double acceptance_rate = 0.0;   ///< accepted / tries
    std::size_t comparisons = 0;    ///< candidate-vs-accepted dot products evaluated
    std::size_t passed_comparisons = 0;
    double pairwise_pass_rate = 0.0;
    double threshold = 0.0;
};

int dot(const SignVector& a, const SignVector& b);

/// Rejection sampling of uniform sign vectors with all pairwise |dot| <= threshold.
SignVectorResult find_sign_vectors(std::size_t n, std::size_t target, double threshold, std::uint64_t seed,
                                   std::size_t max_tries);

/// Default threshold n^{2/3}.
double default_sign_threshold(std::size_t n);

bool verify_sign_vectors(const std::vector<SignVector>& vectors, double threshold);

/// P(|sigma . sigma'| <= threshold) for independent uniform sign vectors of
/// length n, i.e. P(|2 Bin(n, 1/2) - n| <= threshold).
double sign_pair_pass_probability(std::size_t n, double threshold);

/// Superconcentration tail bound 6 exp(-c t / sqrt(K)).
double tail_bound(double K, double c, double t);
/// Classical Gaussian concentration bound 2 exp(-t^2 / 2).
double gaussian_tail_bound(double t);

std::vector<double> tail_curve(double K, double c, std::span<const double> t_grid);
std::vector<double> gaussian_tail_curve(std::span<const double> t_grid);

/// The interval (lo, hi) of t on which the superconcentration bound is below
/// the Gaussian bound: roots of c t / sqrt(K) = t^2 / 2 + log 3.
struct Crossover {
    double lo = 0.0;
    double hi = 0.0;
};

std::optional<Crossover> tail_crossover(double K, double c, double rel_tol = 1e-9);

}  // namespace superconc
