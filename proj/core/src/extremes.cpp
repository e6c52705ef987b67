#include "superconc/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "superconc/errors.hpp"
#include "superconc/parallel.hpp"
#include "superconc/stats.hpp"

namespace superconc {

PathExtreme path_max(std::span<const double> path) {
    if (path.empty()) throw DomainError("maximum of an empty path");
    PathExtreme best{path[0], 0};
    for (std::size_t i = 1; i < path.size(); ++i)
        if (path[i] > best.value) best = {path[i], i};
    return best;
}

std::vector<double> default_quantile_levels() { return {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}; }

ExtremeSummary summarize_extremes(std::vector<double> maxima, std::vector<std::size_t> argmax, std::size_t length) {
    if (maxima.empty()) throw DomainError("extreme summary of an empty batch");
    ExtremeSummary s;
    s.length = length;
    s.mean = stats::mean(maxima);
    s.variance = stats::variance(maxima);
    s.quantile_levels = default_quantile_levels();
    std::vector<double> sorted = maxima;
    std::sort(sorted.begin(), sorted.end());
    for (double p : s.quantile_levels) s.quantiles.push_back(stats::quantile_sorted(sorted, p));
    if (!argmax.empty()) {
        s.argmax_histogram.assign(length, 0);
        for (std::size_t i : argmax) ++s.argmax_histogram.at(i);
    }
    s.maxima = std::move(maxima);
    s.argmax = std::move(argmax);
    return s;
}

ExtremeSummary max_argmax(const SampleBatch& batch) {
    std::vector<double> maxima(batch.batch());
    std::vector<std::size_t> argmax(batch.batch());
    for (std::size_t k = 0; k < batch.batch(); ++k) {
        const auto e = path_max(batch.path(k));
        maxima[k] = e.value;
        argmax[k] = e.index;
    }
    return summarize_extremes(std::move(maxima), std::move(argmax), batch.length());
}

ExtremeSummary simulate_extremes(const PathGenerator& generator, std::size_t batch, std::uint64_t stream_base,
                                 unsigned jobs) {
    if (batch == 0) throw DomainError("batch must be positive");
    std::vector<double> maxima(batch);
    std::vector<std::size_t> argmax(batch);
    parallel_for(batch, jobs, [&](std::size_t begin, std::size_t end) {
        std::vector<double> path(generator.size());
        for (std::size_t k = begin; k < end; ++k) {
            generator.generate(stream_base + k, path);
            const auto e = path_max(path);
            maxima[k] = e.value;
            argmax[k] = e.index;
        }
    });
    return summarize_extremes(std::move(maxima), std::move(argmax), generator.size());
}

NormalizationConstants norm_constants_from_log(double log_n) {
    if (!(log_n > 0.0)) throw DomainError("normalization constants need log n > 0");
    NormalizationConstants c;
    c.log_n = log_n;
    c.a_n = std::sqrt(2.0 * log_n);
    c.b_n = c.a_n - 0.5 / c.a_n * (std::log(log_n) + std::log(4.0 * std::numbers::pi));
    return c;
}

NormalizationConstants norm_constants(double n) {
    if (!(n >= 2.0)) throw DomainError("normalization constants need n >= 2");
    return norm_constants_from_log(std::log(n));
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double gumbel_survival(double x) { return -std::expm1(-std::exp(-x)); }

double gumbel_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("Gumbel quantile level must lie in (0, 1)");
    return -std::log(-std::log(p));
}

double ks_statistic_gumbel(std::span<const double> normalized) {
    if (normalized.empty()) throw DomainError("KS statistic of an empty sample");
    std::vector<double> z(normalized.begin(), normalized.end());
    std::sort(z.begin(), z.end());
    const double count = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = gumbel_cdf(z[i]);
        d = std::max({d, static_cast<double>(i + 1) / count - f, f - static_cast<double>(i) / count});
    }
    return d;
}

double ks_to_gumbel(std::span<const double> maxima, double n) {
    if (maxima.size() < 100) throw DomainError("ks_to_gumbel needs at least 100 maxima");
    const auto c = norm_constants(n);
    std::vector<double> z(maxima.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = c.a_n * (maxima[i] - c.b_n);
    return ks_statistic_gumbel(z);
}

double centering_gap(std::span<const double> maxima, double n) {
    if (maxima.empty()) throw DomainError("centering gap of an empty sample");
    const auto c = norm_constants(n);
    stats::CompensatedSum s;
    for (double m : maxima) s.add(std::abs(c.a_n * (m - c.b_n)));
    return s.value() / static_cast<double>(maxima.size());
}

double empirical_centering(std::span<const double> maxima, EmpiricalCenter kind) {
    if (maxima.empty()) throw DomainError("centering of an empty sample");
    return kind == EmpiricalCenter::mean ? stats::mean(maxima) : stats::median(maxima);
}

}  // namespace superconc
