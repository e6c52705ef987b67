#include "superconc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "superconc/errors.hpp"
#include "superconc/extremes.hpp"
#include "superconc/stats.hpp"

namespace superconc {

namespace {

std::vector<double> theta_grid(double K, std::size_t count) {
    if (!(K > 0.0)) throw DomainError("K must be positive");
    if (count < 2) throw DomainError("theta grid needs at least 2 points");
    const double tmax = 2.0 / std::sqrt(K);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = -tmax + 2.0 * tmax * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    // Exact zero for odd grids.
    if (count % 2 == 1) grid[count / 2] = 0.0;
    return grid;
}

void finish_check(LaplaceCheck& check) {
    check.C_hat = -std::numeric_limits<double>::infinity();
    for (const auto& p : check.points) {
        if (!p.finite) {
            check.all_finite = false;
            continue;
        }
        if (p.margin > check.C_hat) {
            check.C_hat = p.margin;
            check.C_hat_se = p.se;
            check.C_hat_theta = p.theta;
        }
    }
}

}  // namespace

VarianceEstimate estimate_var_max(std::span<const double> maxima) {
    if (maxima.size() < 3) throw DomainError("variance estimate needs at least 3 maxima");
    VarianceEstimate v;
    v.batch = maxima.size();
    v.mean = stats::mean(maxima);
    v.mean_se = stats::mean_se(maxima);
    v.variance = stats::variance(maxima);
    v.se = stats::jackknife_variance_se(maxima);
    return v;
}

VarianceEstimate estimate_var_max(const CovarianceModel& model, std::size_t n, std::size_t batch,
                                  std::uint64_t seed, SampleMethod method, unsigned jobs) {
    const PathGenerator gen(model, GridGeometry::sequence(n), method, seed);
    const auto ex = simulate_extremes(gen, batch, 0, jobs);
    return estimate_var_max(ex.maxima);
}

std::string_view to_string(TailCenter center) {
    switch (center) {
        case TailCenter::mean: return "mean";
        case TailCenter::b_n: return "b_n";
        case TailCenter::median: return "median";
    }
    return "unknown";
}

TailCenter tail_center_from_string(std::string_view name) {
    if (name == "mean") return TailCenter::mean;
    if (name == "b_n") return TailCenter::b_n;
    if (name == "median") return TailCenter::median;
    throw ConfigError("unknown tail center '" + std::string(name) + "' (expected mean, b_n or median)");
}

std::vector<double> tail_grid(std::span<const double> maxima, std::size_t points, double sds) {
    if (points < 2) throw DomainError("t grid needs at least 2 points");
    const double top = sds * std::sqrt(stats::variance(maxima));
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) grid[i] = top * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

TailEstimate estimate_tail(std::span<const double> maxima, double n, TailCenter center,
                           std::span<const double> t_grid) {
    if (maxima.empty()) throw DomainError("tail estimate needs maxima");
    TailEstimate tail;
    tail.center = center;
    tail.samples = maxima.size();
    switch (center) {
        case TailCenter::mean: tail.center_value = stats::mean(maxima); break;
        case TailCenter::median: tail.center_value = stats::median(maxima); break;
        case TailCenter::b_n: tail.center_value = norm_constants(n).b_n; break;
    }
    std::vector<double> dev(maxima.size());
    for (std::size_t i = 0; i < maxima.size(); ++i) dev[i] = std::abs(maxima[i] - tail.center_value);
    std::sort(dev.begin(), dev.end());
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        if (!(t >= prev)) throw DomainError("t grid must be non-decreasing");
        prev = t;
        const auto hits = static_cast<std::size_t>(dev.end() - std::lower_bound(dev.begin(), dev.end(), t));
        const auto band = stats::wilson_interval(hits, dev.size());
        tail.t.push_back(t);
        tail.survival.push_back(static_cast<double>(hits) / static_cast<double>(dev.size()));
        tail.lower.push_back(band.lo);
        tail.upper.push_back(band.hi);
        tail.low_resolution.push_back(hits == 0);
    }
    return tail;
}

TailEstimate estimate_tail(const CovarianceModel& model, std::size_t n, std::size_t batch, std::uint64_t seed,
                           TailCenter center, std::span<const double> t_grid, SampleMethod method,
                           unsigned jobs) {
    const PathGenerator gen(model, GridGeometry::sequence(n), method, seed);
    const auto ex = simulate_extremes(gen, batch, 0, jobs);
    return estimate_tail(ex.maxima, static_cast<double>(n), center, t_grid);
}

TailFit fit_tail_rate(const TailEstimate& tail, double K, double lo, double hi) {
    if (!(K > 0.0)) throw DomainError("K must be positive");
    TailFit fit;
    fit.range_lo = lo;
    fit.range_hi = hi;
    std::vector<double> x, y, t2, ylog;
    const double scale = 1.0 / std::sqrt(K);
    for (std::size_t i = 0; i < tail.t.size(); ++i) {
        const double s = tail.survival[i];
        if (s < lo || s > hi) continue;
        x.push_back(tail.t[i] * scale);
        y.push_back(-std::log(s / 6.0));
        t2.push_back(tail.t[i] * tail.t[i]);
        ylog.push_back(-std::log(s));
    }
    fit.points = x.size();
    if (x.size() < 5) {
        fit.reason = "fewer than 5 grid points with survival in the fit range";
        return fit;
    }
    const auto lin = stats::linear_fit(x, y);
    fit.c = lin.slope;
    fit.intercept = lin.intercept;
    fit.r2 = lin.r2;
    const auto gauss = stats::linear_fit(t2, ylog);
    fit.gaussian_rate = gauss.slope;
    fit.gaussian_r2 = gauss.r2;

    const auto q = stats::quadratic_fit(x, y);
    const double xlo = *std::min_element(x.begin(), x.end());
    const double xhi = *std::max_element(x.begin(), x.end());
    const double slope_lo = q[1] + 2.0 * q[2] * xlo;
    const double slope_hi = q[1] + 2.0 * q[2] * xhi;
    fit.slope_ratio = slope_lo > 0.0 ? slope_hi / slope_lo : std::numeric_limits<double>::infinity();

    fit.ok = true;
    if (!(fit.c > 0.0)) {
        fit.ok = false;
        fit.reason = "fitted rate is not positive";
    } else if (fit.r2 < 0.9) {
        fit.ok = false;
        fit.reason = "non-exponential: R^2 below 0.9";
    } else if (!(fit.slope_ratio >= 0.5 && fit.slope_ratio <= 2.0)) {
        fit.ok = false;
        fit.reason = "non-exponential: local slope changes by more than a factor of 2";
    }
    return fit;
}

void attach_fit(TailEstimate& tail, const TailFit& fit) {
    tail.fit_lo = fit.range_lo;
    tail.fit_hi = fit.range_hi;
    tail.gaussian_rate = fit.gaussian_rate;
    if (fit.ok)
        tail.c_fit = fit.c;
    else
        tail.c_fit.reset();
}

LaplaceCheck laplace_check(std::span<const double> maxima, double K, std::size_t theta_points) {
    const std::size_t n = maxima.size();
    if (n < 3) throw DomainError("Laplace check needs at least 3 maxima");
    LaplaceCheck check;
    check.K = K;
    check.samples = n;
    const auto grid = theta_grid(K, theta_points);
    check.theta_max = grid.back();

    const double mu = stats::mean(maxima);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = maxima[i] - mu;
    const double zmax = *std::max_element(z.begin(), z.end());
    const double zmin = *std::min_element(z.begin(), z.end());
    const double dn = static_cast<double>(n);

    std::vector<double> u(n), loo(n);
    for (double theta : grid) {
        LaplacePoint p;
        p.theta = theta;
        if (theta == 0.0) {
            p.var_half = 0.0;
            p.mean_exp = 1.0;
            p.margin = stats::variance(z) / K;
            p.se = stats::jackknife_variance_se(z) / K;
            check.points.push_back(p);
            continue;
        }
        // u_i = e^{theta z_i / 2} / e^{theta z_top / 2}, z_top the extreme in the theta direction.
        const double shift = 0.5 * theta * (theta > 0.0 ? zmax : zmin);
        stats::CompensatedSum s1, s2;
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = std::exp(0.5 * theta * z[i] - shift);
            s1.add(u[i]);
            s2.add(u[i] * u[i]);
        }
        const double m2 = s2.value() / dn;
        const double var = stats::variance(u);
        const double denom = 0.25 * theta * theta * K;
        p.var_half = var;
        p.mean_exp = m2;
        p.margin = var / (denom * m2);
        p.finite = std::isfinite(p.margin) && m2 > 0.0;
        if (p.finite) {
            // Leave-one-out margins from running sums.
            const double S1 = s1.value(), S2 = s2.value();
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double a = S1 - u[i];
                const double b = S2 - u[i] * u[i];
                const double v = (b - a * a / (dn - 1.0)) / (dn - 2.0);
                loo[i] = v / (denom * b / (dn - 1.0));
                acc += loo[i];
            }
            const double lbar = acc / dn;
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) ss += (loo[i] - lbar) * (loo[i] - lbar);
            p.se = std::sqrt((dn - 1.0) / dn * ss);
        }
        check.points.push_back(p);
    }
    finish_check(check);
    return check;
}

LaplaceCheck laplace_check_weighted(std::span<const double> z, std::span<const double> weights, double K,
                                    std::size_t theta_points) {
    if (z.size() != weights.size() || z.empty()) throw DomainError("nodes and weights must match");
    LaplaceCheck check;
    check.K = K;
    check.samples = z.size();
    const auto grid = theta_grid(K, theta_points);
    check.theta_max = grid.back();
    stats::CompensatedSum wsum, zsum;
    for (std::size_t i = 0; i < z.size(); ++i) {
        wsum.add(weights[i]);
        zsum.add(weights[i] * z[i]);
    }
    const double W = wsum.value();
    const double mu = zsum.value() / W;
    for (double theta : grid) {
        LaplacePoint p;
        p.theta = theta;
        stats::CompensatedSum a, b;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double zc = z[i] - mu;
            if (theta == 0.0) {
                a.add(weights[i] * zc * zc);
            } else {
                const double e = std::exp(0.5 * theta * zc);
                a.add(weights[i] * e);
                b.add(weights[i] * e * e);
            }
        }
        if (theta == 0.0) {
            p.margin = a.value() / W / K;
        } else {
            const double m1 = a.value() / W;
            const double m2 = b.value() / W;
            p.var_half = m2 - m1 * m1;
            p.mean_exp = m2;
            p.margin = p.var_half / (0.25 * theta * theta * K * m2);
        }
        p.finite = std::isfinite(p.margin);
        check.points.push_back(p);
    }
    finish_check(check);
    return check;
}

double coupled_max_correlation(const CoupledBatch& coupled) {
    const auto a = max_argmax(coupled.base);
    const auto b = max_argmax(coupled.evolved);
    return stats::correlation(a.maxima, b.maxima);
}

}  // namespace superconc
