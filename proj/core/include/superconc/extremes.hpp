#pragma once

// Maxima, argmaxima, Gumbel normalization, and convergence diagnostics.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "superconc/sampler.hpp"

namespace superconc {

/// Per-path maximum and argmax (zero-based; ties go to the smallest index)
/// plus batch aggregates.
struct ExtremeSummary {
    std::vector<double> maxima;
    std::vector<std::size_t> argmax;
    std::size_t length = 0;  ///< path length n

    double mean = 0.0;
    double variance = 0.0;  ///< unbiased
    std::vector<double> quantile_levels;
    std::vector<double> quantiles;
    std::vector<std::size_t> argmax_histogram;  ///< counts per index, size n

    std::size_t batch() const noexcept { return maxima.size(); }
};

struct PathExtreme {
    double value;
    std::size_t index;
};

/// Maximum of one path, first attaining index.
PathExtreme path_max(std::span<const double> path);

/// Default quantile levels reported in summaries.
std::vector<double> default_quantile_levels();

ExtremeSummary max_argmax(const SampleBatch& batch);

/// Builds aggregates from precomputed maxima / argmax (argmax may be empty).
ExtremeSummary summarize_extremes(std::vector<double> maxima, std::vector<std::size_t> argmax,
                                  std::size_t length);

/// Streams `batch` paths through `generator` without materializing them.
ExtremeSummary simulate_extremes(const PathGenerator& generator, std::size_t batch,
                                 std::uint64_t stream_base = 0, unsigned jobs = 1);

struct NormalizationConstants {
    double log_n = 0.0;
    double a_n = 0.0;
    double b_n = 0.0;
};

/// a_n = sqrt(2 log n), b_n = a_n - (log log n + log 4 pi) / (2 a_n).
/// Requires n >= 2; for n = 2 the log log term is negative but finite.
NormalizationConstants norm_constants(double n);

/// Same formulas parametrized directly by log n (> 0).
NormalizationConstants norm_constants_from_log(double log_n);

double gumbel_cdf(double x);
/// 1 - exp(-e^{-x}) computed as -expm1(-e^{-x}).
double gumbel_survival(double x);
double gumbel_quantile(double p);

/// Exact one-sample Kolmogorov-Smirnov distance between a_n (M - b_n) and
/// the Gumbel law. Needs at least 100 values.
double ks_to_gumbel(std::span<const double> maxima, double n);

/// Exact one-sample KS statistic of already normalized values against Gumbel.
double ks_statistic_gumbel(std::span<const double> normalized);

/// Mean of |a_n (M - b_n)|.
double centering_gap(std::span<const double> maxima, double n);

enum class EmpiricalCenter { mean, median };

/// Continuous-time suprema have no closed-form b_T here; this is the
/// empirical substitute.
double empirical_centering(std::span<const double> maxima, EmpiricalCenter kind);

}  // namespace superconc
