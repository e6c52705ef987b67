#include "superconc/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "superconc/errors.hpp"

namespace superconc::stats {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        carry_ += (sum_ - t) + x;
    else
        carry_ += (x - t) + sum_;
    sum_ = t;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    CompensatedSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(xs.size() - 1);
}

double jackknife_variance_se(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 3) return std::numeric_limits<double>::quiet_NaN();
    const double nd = static_cast<double>(n);
    const double m = mean(xs);
    CompensatedSum ss;
    for (double x : xs) ss.add((x - m) * (x - m));
    const double total = ss.value();
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - m;
        loo[i] = (total - nd / (nd - 1.0) * d * d) / (nd - 2.0);
    }
    const double loo_mean = mean(loo);
    CompensatedSum acc;
    for (double v : loo) acc.add((v - loo_mean) * (v - loo_mean));
    return std::sqrt((nd - 1.0) / nd * acc.value());
}

double mean_se(std::span<const double> xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level outside [0, 1]");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mx = mean(xs);
    const double my = mean(ys);
    CompensatedSum sxy, sxx, syy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    const double denom = std::sqrt(sxx.value() * syy.value());
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy.value() / denom;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // Rounding can leave p a hair outside the interval at p = 0 or 1.
    return {std::min(p, std::max(0.0, centre - half)), std::max(p, std::min(1.0, centre + half))};
}

double binomial_se(double p, std::size_t trials) {
    if (trials == 0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("linear fit needs two or more paired points");
    const double mx = mean(x);
    const double my = mean(y);
    CompensatedSum sxx, sxy, syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
        syy.add((y[i] - my) * (y[i] - my));
    }
    if (sxx.value() == 0.0) throw DomainError("linear fit with constant abscissa");
    LinearFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    fit.points = x.size();
    CompensatedSum rss;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        rss.add(r * r);
    }
    fit.r2 = syy.value() > 0.0 ? 1.0 - rss.value() / syy.value() : 1.0;
    return fit;
}

std::vector<double> quadratic_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) throw DomainError("quadratic fit needs three or more points");
    Eigen::MatrixXd design(x.size(), 3);
    Eigen::VectorXd rhs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = x[i];
        design(i, 2) = x[i] * x[i];
        rhs(i) = y[i];
    }
    const Eigen::VectorXd q = design.colPivHouseholderQr().solve(rhs);
    return {q(0), q(1), q(2)};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace superconc::stats
