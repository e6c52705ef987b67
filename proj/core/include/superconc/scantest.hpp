#pragma once

// Scan test for an elevated mean on one set of a class: scan statistic,
// the two acceptance thresholds, and Monte Carlo risk.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "superconc/verify.hpp"

namespace superconc {

/// N index sets of common cardinality K inside {0, ..., n-1}.
struct ScanClass {
    std::size_t n = 0;
    std::size_t K = 0;
    std::vector<std::vector<std::size_t>> sets;

    std::size_t N() const noexcept { return sets.size(); }

    /// N consecutive disjoint blocks of size K; n = N K.
    static ScanClass disjoint(std::size_t N, std::size_t K);
    /// All windows {i, ..., i + K - 1}; N = n - K + 1.
    static ScanClass sliding(std::size_t n, std::size_t K);
    /// Validates equal cardinality and the index range.
    static ScanClass from_sets(std::size_t n, std::vector<std::vector<std::size_t>> sets);

    std::uint64_t hash() const noexcept;
};

struct ScanValue {
    double value = 0.0;
    std::size_t index = 0;  ///< zero-based; ties go to the smallest index
};

ScanValue scan_statistic(std::span<const double> x, const ScanClass& cls);

/// tau = (mu K + E0max) / 2.
double scan_tau(double mu, std::size_t K, double e0max);

/// 1 iff the scan statistic is >= tau.
int decision(std::span<const double> x, const ScanClass& cls, double tau);

/// E0max / K + 2 sqrt((2 / K) log(2 / delta)), delta in (0, 2].
double threshold_prop51(double K, double delta, double e0max);

/// E0max / K + log(6 / delta) 2 / (c sqrt(K log N)), delta in (0, 6], N >= 2, c > 0.
double threshold_prop52(double K, double N, double delta, double c, double e0max);

enum class ThresholdKind { prop51, prop52 };

std::string_view to_string(ThresholdKind kind);
ThresholdKind threshold_kind_from_string(std::string_view name);

struct E0Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t trials = 0;
};

/// Null scan maxima, one per trial (components iid standard normal).
std::vector<double> null_scan_maxima(const ScanClass& cls, std::size_t trials, std::uint64_t seed,
                                     unsigned jobs = 1);

/// Monte Carlo E_0[max_S X_S], cached per (class, trials, seed). N = 1 gives
/// the exact value 0.
E0Estimate estimate_E0max(const ScanClass& cls, std::size_t trials, std::uint64_t seed, unsigned jobs = 1);

void clear_E0_cache();

struct ScanCalibration {
    double c = 0.0;
    double K_fit = 0.0;  ///< K / log N
    TailFit fit;
};

/// Fits c on the tail of |max_S X_S - mean| under H_0 with K_fit = K / log N.
ScanCalibration calibrate_scan_c(const ScanClass& cls, std::size_t trials, std::uint64_t seed, unsigned jobs = 1);

struct RiskOptions {
    std::size_t trials = 2000;
    std::size_t e0_trials = 0;  ///< 0: same as trials
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::size_t max_alternatives = 64;
};

struct RiskReport {
    double mu = 0.0;
    double delta = 0.0;
    std::optional<ThresholdKind> threshold;  ///< set when mu came from a threshold
    std::optional<double> c_used;
    double e0max = 0.0;
    double e0_se = 0.0;
    double tau = 0.0;
    double type1 = 0.0;
    double type1_se = 0.0;
    double type2 = 0.0;  ///< mean over the evaluated sets
    double type2_se = 0.0;
    double risk = 0.0;  ///< type1 + type2, in [0, 2]
    double risk_se = 0.0;
    std::size_t trials = 0;
    std::size_t sets_evaluated = 0;
    bool subsampled = false;
    std::vector<std::string> warnings;
};

/// Risk of the scan test at a given mu.
RiskReport estimate_risk(const ScanClass& cls, double mu, double delta, const RiskOptions& options = {});

/// Risk with mu set to the chosen threshold (c required for prop52).
RiskReport estimate_risk_at_threshold(const ScanClass& cls, ThresholdKind kind, double delta,
                                      std::optional<double> c, const RiskOptions& options = {});

struct ThresholdRow {
    double delta = 0.0;
    std::optional<double> prop51;  ///< absent when delta > 2
    double prop52 = 0.0;
};

std::vector<ThresholdRow> threshold_table(double K, double N, double e0max, double c,
                                          std::span<const double> deltas);

}  // namespace superconc
