#include "superconc/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "superconc/errors.hpp"

namespace superconc {

namespace {

constexpr std::pair<CovarianceKind, std::string_view> kKindNames[] = {
    {CovarianceKind::iid, "iid"},
    {CovarianceKind::ornstein_uhlenbeck, "ornstein_uhlenbeck"},
    {CovarianceKind::gaussian_smooth, "gaussian_smooth"},
    {CovarianceKind::power_decay, "power_decay"},
    {CovarianceKind::log_decay, "log_decay"},
    {CovarianceKind::table, "table"},
};

double evaluate_table(const std::vector<std::pair<double, double>>& table, double t) {
    if (t > table.back().first) {
        std::ostringstream os;
        os << "lag " << t << " outside tabulated range [0, " << table.back().first << "]";
        throw RangeError(os.str());
    }
    const auto it = std::lower_bound(table.begin(), table.end(), t,
                                     [](const auto& entry, double lag) { return entry.first < lag; });
    if (it->first == t) return it->second;
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

}  // namespace

std::string_view to_string(CovarianceKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "unknown";
}

CovarianceKind covariance_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kKindNames)
        if (n == name) return k;
    throw ConfigError("unknown covariance kind '" + std::string(name) + "'");
}

CovarianceModel CovarianceModel::iid() { return {}; }

CovarianceModel CovarianceModel::ornstein_uhlenbeck(double rate, double exponent) {
    CovarianceModel m;
    m.kind = CovarianceKind::ornstein_uhlenbeck;
    m.rate = rate;
    m.exponent = exponent;
    m.validate();
    return m;
}

CovarianceModel CovarianceModel::gaussian_smooth(double lambda2) {
    CovarianceModel m;
    m.kind = CovarianceKind::gaussian_smooth;
    m.lambda2 = lambda2;
    m.validate();
    return m;
}

CovarianceModel CovarianceModel::power_decay(double scale, double power) {
    CovarianceModel m;
    m.kind = CovarianceKind::power_decay;
    m.scale = scale;
    m.power = power;
    m.validate();
    return m;
}

CovarianceModel CovarianceModel::log_decay(double scale, double power) {
    CovarianceModel m;
    m.kind = CovarianceKind::log_decay;
    m.scale = scale;
    m.power = power;
    m.validate();
    return m;
}

CovarianceModel CovarianceModel::tabulated(std::vector<std::pair<double, double>> lag_values) {
    CovarianceModel m;
    m.kind = CovarianceKind::table;
    m.table = std::move(lag_values);
    m.validate();
    return m;
}

void CovarianceModel::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive and finite");
    };
    switch (kind) {
        case CovarianceKind::iid:
            break;
        case CovarianceKind::ornstein_uhlenbeck:
            positive(rate, "ornstein_uhlenbeck rate");
            if (!(exponent > 0.0 && exponent <= 2.0))
                throw ConfigError("ornstein_uhlenbeck exponent must lie in (0, 2]");
            break;
        case CovarianceKind::gaussian_smooth:
            positive(lambda2, "gaussian_smooth lambda2");
            break;
        case CovarianceKind::power_decay:
        case CovarianceKind::log_decay:
            positive(scale, "scale");
            positive(power, "power");
            break;
        case CovarianceKind::table: {
            if (table.size() < 2) throw ConfigError("covariance table needs at least two lags");
            if (table.front().first != 0.0 || table.front().second != 1.0)
                throw ConfigError("covariance table must start with (0, 1)");
            for (std::size_t i = 0; i < table.size(); ++i) {
                const auto& [lag, value] = table[i];
                if (!std::isfinite(lag) || !std::isfinite(value))
                    throw ConfigError("covariance table entries must be finite");
                if (std::abs(value) > 1.0) {
                    std::ostringstream os;
                    os << "covariance table value " << value << " at lag " << lag << " exceeds 1 in magnitude";
                    throw ConfigError(os.str());
                }
                if (i > 0 && !(lag > table[i - 1].first))
                    throw ConfigError("covariance table lags must be strictly increasing");
            }
            break;
        }
    }
}

double CovarianceModel::max_lag() const noexcept {
    return kind == CovarianceKind::table ? table.back().first : HUGE_VAL;
}

double evaluate(const CovarianceModel& model, double t) {
    if (!(t >= 0.0)) throw DomainError("covariance lag must be nonnegative");
    if (t == 0.0) return 1.0;
    switch (model.kind) {
        case CovarianceKind::iid:
            return 0.0;
        case CovarianceKind::ornstein_uhlenbeck:
            return std::exp(-model.rate * (model.exponent == 1.0 ? t : std::pow(t, model.exponent)));
        case CovarianceKind::gaussian_smooth:
            return std::exp(-0.5 * model.lambda2 * t * t);
        case CovarianceKind::power_decay: {
            const double u = t / model.scale;
            return std::pow(1.0 + u * u, -model.power);
        }
        case CovarianceKind::log_decay:
            return std::pow(1.0 + std::log1p(t / model.scale), -model.power);
        case CovarianceKind::table:
            return evaluate_table(model.table, t);
    }
    return 0.0;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi > lo) || count < 2) throw DomainError("geometric grid needs 0 < lo < hi and two points");
    std::vector<double> grid(count);
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo * std::exp(ratio * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

HypothesisReport check_hypotheses(const CovarianceModel& model, const std::vector<double>& probe_grid,
                                  double berman_tolerance) {
    HypothesisReport report;
    report.berman_tolerance = berman_tolerance;
    if (probe_grid.empty()) throw DomainError("probe grid must be non-empty");
    if (!std::is_sorted(probe_grid.begin(), probe_grid.end()))
        throw DomainError("probe grid must be increasing");

    std::vector<double> points{0.0, 1.0};
    points.insert(points.end(), probe_grid.begin(), probe_grid.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    const double reach = model.max_lag();
    for (double t : points) {
        if (t > reach) {
            ++report.skipped_points;
            continue;
        }
        report.probe_grid.push_back(t);
    }
    if (report.skipped_points > 0) {
        std::ostringstream os;
        os << report.skipped_points << " probe points beyond the tabulated range were skipped";
        report.details.push_back(os.str());
    }

    std::vector<double> values(report.probe_grid.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = evaluate(model, report.probe_grid[i]);

    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[i - 1]) {
            report.nonincreasing = false;
            report.nonincreasing_witness = report.probe_grid[i];
            std::ostringstream os;
            os << "phi increases between t=" << report.probe_grid[i - 1] << " and t=" << report.probe_grid[i];
            report.details.push_back(os.str());
            break;
        }
    }

    report.phi1 = evaluate(model, 1.0);
    report.phi1_lt_half = report.phi1 < 0.5;
    if (!report.phi1_lt_half) {
        std::ostringstream os;
        os << "phi(1) < 1/2 violated: phi(1) = " << report.phi1;
        report.details.push_back(os.str());
    }

    // Berman proxy: the tail of the probe grid, taken as the upper half in log scale.
    const double upper = probe_grid.back();
    const double lower = std::sqrt(std::max(probe_grid.front(), 1.0) * upper);
    bool any = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double t = report.probe_grid[i];
        if (t < lower || t <= 1.0) continue;
        any = true;
        const double w = std::abs(values[i] * std::log(t));
        if (w >= report.berman_witness) {
            report.berman_witness = w;
            report.berman_witness_t = t;
        }
    }
    if (!any) {
        report.berman_ok = false;
        report.details.push_back("Berman condition not checkable: no probe points in the upper range");
    } else {
        report.berman_ok = report.berman_witness <= berman_tolerance;
        if (!report.berman_ok) {
            std::ostringstream os;
            os << "max |phi(t) log t| = " << report.berman_witness << " at t=" << report.berman_witness_t
               << " exceeds tolerance " << berman_tolerance;
            report.details.push_back(os.str());
        }
    }
    return report;
}

Eigen::MatrixXd gram_matrix(const CovarianceModel& model, const PointSet& points) {
    const auto n = points.rows();
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = evaluate(model, (points.row(i) - points.row(j)).norm());
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    return gram;
}

Eigen::MatrixXd gram_matrix(const CovarianceModel& model, std::size_t n, double spacing) {
    const auto size = static_cast<Eigen::Index>(n);
    std::vector<double> lag(n);
    for (std::size_t k = 0; k < n; ++k) lag[k] = evaluate(model, spacing * static_cast<double>(k));
    Eigen::MatrixXd gram(size, size);
    for (Eigen::Index i = 0; i < size; ++i)
        for (Eigen::Index j = 0; j < size; ++j) gram(i, j) = lag[static_cast<std::size_t>(std::abs(i - j))];
    return gram;
}

}  // namespace superconc
