#include "superconc/scantest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include "superconc/errors.hpp"
#include "superconc/parallel.hpp"
#include "superconc/rng.hpp"
#include "superconc/stats.hpp"

namespace superconc {

namespace {

constexpr std::uint64_t kE0Tag = 0xE0;
constexpr std::uint64_t kRiskTag = 0x5C;
constexpr std::uint64_t kSubsampleTag = 0x55;

std::mutex& cache_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::tuple<std::uint64_t, std::size_t, std::uint64_t>, E0Estimate>& cache() {
    static std::map<std::tuple<std::uint64_t, std::size_t, std::uint64_t>, E0Estimate> c;
    return c;
}

/// Scan maxima of `trials` draws, x ~ N(shift 1_S, I).
std::vector<double> simulate_scan(const ScanClass& cls, std::size_t trials, std::uint64_t seed, std::uint32_t cell,
                                  const std::vector<std::size_t>* shifted, double mu, unsigned jobs) {
    std::vector<double> out(trials);
    parallel_for(trials, jobs, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(cls.n);
        for (std::size_t k = begin; k < end; ++k) {
            NormalStream rng(seed, stream_id(cell, k));
            rng.fill_normal(x);
            if (shifted)
                for (std::size_t i : *shifted) x[i] += mu;
            out[k] = scan_statistic(x, cls).value;
        }
    });
    return out;
}

}  // namespace

ScanClass ScanClass::disjoint(std::size_t N, std::size_t K) {
    if (N < 1 || K < 1) throw DomainError("disjoint class needs N >= 1 and K >= 1");
    ScanClass c;
    c.n = N * K;
    c.K = K;
    for (std::size_t s = 0; s < N; ++s) {
        std::vector<std::size_t> set(K);
        std::iota(set.begin(), set.end(), s * K);
        c.sets.push_back(std::move(set));
    }
    return c;
}

ScanClass ScanClass::sliding(std::size_t n, std::size_t K) {
    if (K < 1 || K > n) throw DomainError("sliding class needs 1 <= K <= n");
    ScanClass c;
    c.n = n;
    c.K = K;
    for (std::size_t s = 0; s + K <= n; ++s) {
        std::vector<std::size_t> set(K);
        std::iota(set.begin(), set.end(), s);
        c.sets.push_back(std::move(set));
    }
    return c;
}

ScanClass ScanClass::from_sets(std::size_t n, std::vector<std::vector<std::size_t>> sets) {
    if (sets.empty()) throw DomainError("scan class needs at least one set");
    ScanClass c;
    c.n = n;
    c.K = sets.front().size();
    if (c.K == 0) throw DomainError("scan sets must be non-empty");
    for (std::size_t s = 0; s < sets.size(); ++s) {
        if (sets[s].size() != c.K)
            throw DomainError("set " + std::to_string(s) + " has cardinality " + std::to_string(sets[s].size()) +
                              ", expected " + std::to_string(c.K));
        auto sorted = sets[s];
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DomainError("set " + std::to_string(s) + " repeats an index");
        if (sorted.back() >= n) throw DomainError("set " + std::to_string(s) + " has an index outside {0, ..., n-1}");
    }
    c.sets = std::move(sets);
    return c;
}

std::uint64_t ScanClass::hash() const noexcept {
    std::uint64_t h = derive_seed(n, K);
    for (const auto& s : sets) {
        h = derive_seed(h, 0xFFFFFFFFull);
        for (std::size_t i : s) h = derive_seed(h, i);
    }
    return h;
}

ScanValue scan_statistic(std::span<const double> x, const ScanClass& cls) {
    if (x.size() != cls.n) throw DomainError("vector length does not match the class's n");
    ScanValue best{-std::numeric_limits<double>::infinity(), 0};
    for (std::size_t s = 0; s < cls.sets.size(); ++s) {
        double sum = 0.0;
        for (std::size_t i : cls.sets[s]) sum += x[i];
        if (sum > best.value) best = {sum, s};
    }
    return best;
}

double scan_tau(double mu, std::size_t K, double e0max) { return 0.5 * (mu * static_cast<double>(K) + e0max); }

int decision(std::span<const double> x, const ScanClass& cls, double tau) {
    return scan_statistic(x, cls).value >= tau ? 1 : 0;
}

double threshold_prop51(double K, double delta, double e0max) {
    if (!(K > 0.0)) throw DomainError("K must be positive");
    if (!(delta > 0.0 && delta <= 2.0)) throw DomainError("delta must lie in (0, 2]");
    return e0max / K + 2.0 * std::sqrt(2.0 / K * std::log(2.0 / delta));
}

double threshold_prop52(double K, double N, double delta, double c, double e0max) {
    if (!(K > 0.0)) throw DomainError("K must be positive");
    if (!(N >= 2.0)) throw DomainError("threshold needs N >= 2 (it involves log N)");
    if (!(delta > 0.0 && delta <= 6.0)) throw DomainError("delta must lie in (0, 6]");
    if (!(c > 0.0)) throw DomainError("c must be positive");
    return e0max / K + std::log(6.0 / delta) * 2.0 / (c * std::sqrt(K * std::log(N)));
}

std::string_view to_string(ThresholdKind kind) { return kind == ThresholdKind::prop51 ? "prop51" : "prop52"; }

ThresholdKind threshold_kind_from_string(std::string_view name) {
    if (name == "prop51") return ThresholdKind::prop51;
    if (name == "prop52") return ThresholdKind::prop52;
    throw ConfigError("unknown threshold '" + std::string(name) + "' (expected prop51 or prop52)");
}

std::vector<double> null_scan_maxima(const ScanClass& cls, std::size_t trials, std::uint64_t seed, unsigned jobs) {
    if (trials < 2) throw DomainError("need at least 2 trials");
    return simulate_scan(cls, trials, derive_seed(seed, kE0Tag), 0, nullptr, 0.0, jobs);
}

E0Estimate estimate_E0max(const ScanClass& cls, std::size_t trials, std::uint64_t seed, unsigned jobs) {
    // A single centered set-sum has mean exactly zero.
    if (cls.N() == 1) return {0.0, 0.0, trials};
    const auto key = std::make_tuple(cls.hash(), trials, seed);
    {
        std::lock_guard lock(cache_mutex());
        const auto it = cache().find(key);
        if (it != cache().end()) return it->second;
    }
    const auto m = null_scan_maxima(cls, trials, seed, jobs);
    const E0Estimate e{stats::mean(m), stats::mean_se(m), trials};
    std::lock_guard lock(cache_mutex());
    cache().emplace(key, e);
    return e;
}

void clear_E0_cache() {
    std::lock_guard lock(cache_mutex());
    cache().clear();
}

ScanCalibration calibrate_scan_c(const ScanClass& cls, std::size_t trials, std::uint64_t seed, unsigned jobs) {
    if (cls.N() < 2) throw DomainError("calibration needs N >= 2");
    ScanCalibration cal;
    const auto m = null_scan_maxima(cls, trials, derive_seed(seed, 0xCA), jobs);
    cal.K_fit = static_cast<double>(cls.K) / std::log(static_cast<double>(cls.N()));
    const auto grid = tail_grid(m);
    const auto tail = estimate_tail(m, 2.0, TailCenter::mean, grid);
    cal.fit = fit_tail_rate(tail, cal.K_fit);
    if (!(cal.fit.c > 0.0)) throw DomainError("scan calibration failed: " + cal.fit.reason);
    cal.c = cal.fit.c;
    return cal;
}

RiskReport estimate_risk(const ScanClass& cls, double mu, double delta, const RiskOptions& options) {
    if (options.trials < 2) throw DomainError("need at least 2 trials");
    RiskReport r;
    r.mu = mu;
    r.delta = delta;
    r.trials = options.trials;
    const auto e0 = estimate_E0max(cls, options.e0_trials ? options.e0_trials : options.trials, options.seed,
                                   options.jobs);
    r.e0max = e0.mean;
    r.e0_se = e0.se;
    r.tau = scan_tau(mu, cls.K, e0.mean);

    const std::uint64_t seed = derive_seed(options.seed, kRiskTag);
    const auto null = simulate_scan(cls, options.trials, seed, 0, nullptr, 0.0, options.jobs);
    std::size_t rejects = 0;
    for (double v : null) rejects += v >= r.tau;
    const double dt = static_cast<double>(options.trials);
    r.type1 = static_cast<double>(rejects) / dt;
    r.type1_se = stats::binomial_se(r.type1, options.trials);

    std::vector<std::size_t> chosen(cls.N());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    if (cls.N() > options.max_alternatives) {
        NormalStream pick(derive_seed(options.seed, kSubsampleTag), 0);
        for (std::size_t i = 0; i < options.max_alternatives; ++i) {
            const std::size_t j = i + pick.next_below(chosen.size() - i);
            std::swap(chosen[i], chosen[j]);
        }
        chosen.resize(options.max_alternatives);
        r.subsampled = true;
        r.warnings.push_back("type-II averaged over a uniform subsample of " +
                             std::to_string(options.max_alternatives) + " of " + std::to_string(cls.N()) +
                             " sets; the standard error ignores the subsampling variance");
    }
    r.sets_evaluated = chosen.size();
    stats::CompensatedSum p2, var2;
    for (std::size_t s : chosen) {
        const auto alt = simulate_scan(cls, options.trials, seed, static_cast<std::uint32_t>(s + 1), &cls.sets[s],
                                       mu, options.jobs);
        std::size_t accepts = 0;
        for (double v : alt) accepts += v < r.tau;
        const double p = static_cast<double>(accepts) / dt;
        p2.add(p);
        var2.add(p * (1.0 - p) / dt);
    }
    const double m = static_cast<double>(chosen.size());
    r.type2 = p2.value() / m;
    r.type2_se = std::sqrt(var2.value()) / m;
    r.risk = r.type1 + r.type2;
    r.risk_se = std::hypot(r.type1_se, r.type2_se);
    if (r.risk_se > delta / 3.0)
        r.warnings.push_back("trials too few for the target delta: risk SE exceeds delta / 3");
    return r;
}

RiskReport estimate_risk_at_threshold(const ScanClass& cls, ThresholdKind kind, double delta,
                                      std::optional<double> c, const RiskOptions& options) {
    const auto e0 = estimate_E0max(cls, options.e0_trials ? options.e0_trials : options.trials, options.seed,
                                   options.jobs);
    const double K = static_cast<double>(cls.K);
    double mu = 0.0;
    if (kind == ThresholdKind::prop51) {
        mu = threshold_prop51(K, delta, e0.mean);
    } else {
        if (!c) throw ConfigError("prop52 threshold needs a constant c (configured or calibrated)");
        mu = threshold_prop52(K, static_cast<double>(cls.N()), delta, *c, e0.mean);
    }
    auto r = estimate_risk(cls, mu, delta, options);
    r.threshold = kind;
    if (kind == ThresholdKind::prop52) r.c_used = c;
    return r;
}

std::vector<ThresholdRow> threshold_table(double K, double N, double e0max, double c, std::span<const double> deltas) {
    std::vector<ThresholdRow> rows;
    for (double d : deltas) {
        ThresholdRow row;
        row.delta = d;
        if (d <= 2.0) row.prop51 = threshold_prop51(K, d, e0max);
        row.prop52 = threshold_prop52(K, N, d, c, e0max);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace superconc
