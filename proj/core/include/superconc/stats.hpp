#pragma once

// Small numerical helpers shared by the estimators.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace superconc::stats {

/// Neumaier-compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double mean(std::span<const double> xs);

/// Unbiased sample variance (two-pass, compensated). Zero for fewer than two values.
double variance(std::span<const double> xs);

/// Jackknife standard error of the unbiased sample variance, O(n).
double jackknife_variance_se(std::span<const double> xs);

/// Standard error of the mean.
double mean_se(std::span<const double> xs);

/// Linear-interpolation quantile (type 7) of an already sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

double median(std::span<const double> xs);

/// Pearson correlation; NaN when either side is constant.
double correlation(std::span<const double> xs, std::span<const double> ys);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Binomial standard error sqrt(p(1-p)/n).
double binomial_se(double p, std::size_t trials);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Least squares y = q2 x^2 + q1 x + q0; returns {q0, q1, q2}.
std::vector<double> quadratic_fit(std::span<const double> x, std::span<const double> y);

double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace superconc::stats
