#pragma once

// Reference computations used only by the tests. Each is written
// independently of the library code it checks.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Composite Simpson rule on [a, b] with `intervals` (even) pieces.
template <class F>
double simpson(F f, double a, double b, int intervals = 20000) {
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Mean and variance of the maximum of n iid standard normals.
inline std::pair<double, double> iid_max_moments(int n) {
    const auto density = [n](double x) { return n * phi(x) * std::pow(Phi(x), n - 1); };
    const double m1 = simpson([&](double x) { return x * density(x); }, -12.0, 12.0);
    const double m2 = simpson([&](double x) { return x * x * density(x); }, -12.0, 12.0);
    return {m1, m2 - m1 * m1};
}

/// Naive O(m^2) DFT of a real sequence; real parts.
inline std::vector<double> dft_real(const std::vector<double>& row) {
    const std::size_t m = row.size();
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::complex<double> s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            s += row[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k % m) / double(m));
        out[k] = s.real();
    }
    return out;
}

/// P(|2 Bin(n, 1/2) - n| <= thr) by Pascal's triangle in probabilities.
inline double sign_dot_within(int n, double thr) {
    std::vector<double> p{1.0};
    for (int i = 0; i < n; ++i) {
        std::vector<double> q(p.size() + 1, 0.0);
        for (std::size_t k = 0; k < p.size(); ++k) {
            q[k] += 0.5 * p[k];
            q[k + 1] += 0.5 * p[k];
        }
        p = std::move(q);
    }
    double s = 0.0;
    for (int k = 0; k <= n; ++k)
        if (std::abs(2.0 * k - n) <= thr) s += p[static_cast<std::size_t>(k)];
    return s;
}

/// Gauss-Hermite rule for the standard normal law (probabilists' weight),
/// by Golub-Welsch. Weights sum to 1.
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(double(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
    return {x, w};
}

}  // namespace oracle
