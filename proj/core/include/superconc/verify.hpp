#pragma once

// Monte Carlo checks of the variance, tail, and Laplace-transform inequalities
// for maxima.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "superconc/covariance.hpp"
#include "superconc/sampler.hpp"

namespace superconc {

struct VarianceEstimate {
    double variance = 0.0;  ///< unbiased
    double se = 0.0;        ///< jackknife
    double mean = 0.0;
    double mean_se = 0.0;
    std::size_t batch = 0;
};

VarianceEstimate estimate_var_max(std::span<const double> maxima);
VarianceEstimate estimate_var_max(const CovarianceModel& model, std::size_t n, std::size_t batch,
                                  std::uint64_t seed, SampleMethod method = SampleMethod::automatic,
                                  unsigned jobs = 1);

enum class TailCenter { mean, b_n, median };

std::string_view to_string(TailCenter center);
TailCenter tail_center_from_string(std::string_view name);

/// Empirical P(|M - center| >= t) on a t grid.
struct TailEstimate {
    std::vector<double> t;
    std::vector<double> survival;
    std::vector<double> lower;  ///< Wilson band
    std::vector<double> upper;
    std::vector<bool> low_resolution;  ///< no sample reached t
    TailCenter center = TailCenter::mean;
    double center_value = 0.0;
    std::size_t samples = 0;

    // Filled by fit_tail_rate when attached.
    std::optional<double> c_fit;
    std::optional<double> fit_lo;
    std::optional<double> fit_hi;
    std::optional<double> gaussian_rate;
};

/// `points` values evenly spaced over [0, sds * sd(maxima)].
std::vector<double> tail_grid(std::span<const double> maxima, std::size_t points = 200, double sds = 6.0);

/// `n` is only used for center = b_n.
TailEstimate estimate_tail(std::span<const double> maxima, double n, TailCenter center,
                           std::span<const double> t_grid);
TailEstimate estimate_tail(const CovarianceModel& model, std::size_t n, std::size_t batch, std::uint64_t seed,
                           TailCenter center, std::span<const double> t_grid,
                           SampleMethod method = SampleMethod::automatic, unsigned jobs = 1);

inline constexpr double kTailFitLo = 1e-3;
inline constexpr double kTailFitHi = 0.3;

struct TailFit {
    bool ok = false;           ///< false: too few points or non-exponential shape
    double c = 0.0;            ///< slope of -log(S/6) against t / sqrt(K)
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    double slope_ratio = 1.0;  ///< local slope at the upper end over the lower end (quadratic fit)
    double gaussian_rate = 0.0;  ///< slope of -log S against t^2
    double gaussian_r2 = 0.0;
    double range_lo = kTailFitLo;
    double range_hi = kTailFitHi;
    std::string reason;
};

/// Least-squares exponential rate over grid points with survival in
/// [lo, hi]. Non-exponential when R^2 < 0.9 or the local slope changes by
/// more than a factor of 2 across the range.
TailFit fit_tail_rate(const TailEstimate& tail, double K, double lo = kTailFitLo, double hi = kTailFitHi);

/// Copies the fit into the estimate's optional fields.
void attach_fit(TailEstimate& tail, const TailFit& fit);

struct LaplacePoint {
    double theta = 0.0;
    double var_half = 0.0;  ///< Var(e^{theta Z / 2}), rescaled by e^{-theta max Z}
    double mean_exp = 0.0;  ///< E[e^{theta Z}], same rescaling
    double margin = 0.0;    ///< Var / ((theta^2 / 4) K E); Var(Z) / K at theta = 0
    double se = 0.0;        ///< jackknife
    bool finite = true;
};

struct LaplaceCheck {
    double K = 0.0;
    double theta_max = 0.0;  ///< 2 / sqrt(K)
    std::vector<LaplacePoint> points;
    double C_hat = 0.0;  ///< max margin
    double C_hat_se = 0.0;
    double C_hat_theta = 0.0;
    bool all_finite = true;
    std::size_t samples = 0;
};

/// Margins on `theta_points` evenly spaced values over [-2/sqrt(K), 2/sqrt(K)].
/// Z = M - mean(M). The common factor e^{theta max Z} is divided out of both
/// sides so exponentials never overflow.
LaplaceCheck laplace_check(std::span<const double> maxima, double K, std::size_t theta_points);

/// Same margins for a weighted law (quadrature nodes and weights summing to 1);
/// no standard errors. Z is centered by the weighted mean.
LaplaceCheck laplace_check_weighted(std::span<const double> z, std::span<const double> weights, double K,
                                    std::size_t theta_points);

/// Empirical correlation of (M, M^t) over a coupled batch.
double coupled_max_correlation(const CoupledBatch& coupled);

}  // namespace superconc
