#pragma once

// Stationary covariance functions phi(|t - s|) with phi(0) = 1.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace superconc {

enum class CovarianceKind {
    iid,                 ///< phi(0) = 1, phi(t) = 0 for t > 0
    ornstein_uhlenbeck,  ///< exp(-rate * t^exponent), exponent in (0, 2]
    gaussian_smooth,     ///< exp(-lambda2 * t^2 / 2), so -phi''(0) = lambda2
    power_decay,         ///< (1 + (t / scale)^2)^(-power)
    log_decay,           ///< (1 + log(1 + t / scale))^(-power)
    table,               ///< linear interpolation of tabulated (lag, value) pairs
};

std::string_view to_string(CovarianceKind kind);
CovarianceKind covariance_kind_from_string(std::string_view name);

struct CovarianceModel {
    CovarianceKind kind = CovarianceKind::iid;

    // ornstein_uhlenbeck: amplitude and exponent of 1 - C|t|^a + o(|t|^a).
    double rate = 1.0;
    double exponent = 1.0;
    // gaussian_smooth: second spectral moment.
    double lambda2 = 1.0;
    // power_decay / log_decay.
    double scale = 1.0;
    double power = 1.0;
    // table: strictly increasing lags starting at 0 with value 1.
    std::vector<std::pair<double, double>> table;

    static CovarianceModel iid();
    static CovarianceModel ornstein_uhlenbeck(double rate = 1.0, double exponent = 1.0);
    static CovarianceModel gaussian_smooth(double lambda2 = 1.0);
    static CovarianceModel power_decay(double scale = 1.0, double power = 1.0);
    static CovarianceModel log_decay(double scale = 1.0, double power = 1.0);
    static CovarianceModel tabulated(std::vector<std::pair<double, double>> lag_values);

    /// Throws ConfigError on invalid parameters.
    void validate() const;

    /// Built-in kinds are non-increasing in t; tables are checked, not declared.
    bool declared_nonincreasing() const noexcept { return kind != CovarianceKind::table; }

    /// Largest lag at which the model can be evaluated (infinite except for tables).
    double max_lag() const noexcept;

    friend bool operator==(const CovarianceModel&, const CovarianceModel&) = default;
};

/// phi(t). Throws DomainError for t < 0 and RangeError outside a table's range.
double evaluate(const CovarianceModel& model, double t);

struct HypothesisReport {
    bool nonincreasing = true;
    std::optional<double> nonincreasing_witness;  ///< first t where phi increases
    bool phi1_lt_half = true;
    double phi1 = 0.0;
    bool berman_ok = true;
    double berman_witness = 0.0;       ///< max |phi(t) log t| on the upper half of the probe grid
    double berman_witness_t = 0.0;
    double berman_tolerance = 0.1;
    std::vector<double> probe_grid;    ///< points actually evaluated
    std::size_t skipped_points = 0;    ///< probe points beyond a table's range
    std::vector<std::string> details;

    bool sequence_pipeline_ok() const noexcept { return nonincreasing && phi1_lt_half; }
};

/// Geometric grid of `count` points from `lo` to `hi` (the default Berman probe).
std::vector<double> geometric_grid(double lo = 2.0, double hi = 1.0e6, std::size_t count = 200);

/// Evaluates the structural hypotheses by direct evaluation on {0, 1} and
/// `probe_grid`. Failures are report contents, never exceptions.
HypothesisReport check_hypotheses(const CovarianceModel& model,
                                  const std::vector<double>& probe_grid = geometric_grid(),
                                  double berman_tolerance = 0.1);

/// Points in R^d stored row-wise: points(i, k) is coordinate k of point i.
using PointSet = Eigen::MatrixXd;

/// Gram matrix phi(|p_i - p_j|); exactly symmetric with unit diagonal.
Eigen::MatrixXd gram_matrix(const CovarianceModel& model, const PointSet& points);

/// Gram matrix of the index set {0, ..., n-1} scaled by `spacing`.
Eigen::MatrixXd gram_matrix(const CovarianceModel& model, std::size_t n, double spacing = 1.0);

}  // namespace superconc
