#pragma once

// Independent reference implementations for the test suites. Nothing here
// calls into the library's numerics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dormand-Prince 5(4) on d/dt mu = L^T mu, reporting at the requested times.
inline std::vector<Vector> dopri_propagate(const Matrix& L, const Vector& mu0, const std::vector<double>& times,
                                           double rtol = 1e-12, double atol = 1e-14) {
    const Matrix A = L.transpose();
    auto f = [&](const Vector& y) -> Vector { return A * y; };
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    std::vector<Vector> out;
    Vector y = mu0;
    double t = 0.0;
    double h = 1e-6;
    std::size_t next = 0;
    while (next < times.size() && times[next] <= 0.0) {
        out.push_back(y);
        ++next;
    }
    while (next < times.size()) {
        const double target = times[next];
        bool hit = false;
        if (t + h >= target) {
            h = target - t;
            hit = true;
        }
        const Vector k1 = f(y);
        const Vector k2 = f(y + h * a21 * k1);
        const Vector k3 = f(y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vector k7 = f(y5);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double norm = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
            norm = std::max(norm, std::abs(err(i)) / sc);
        }
        if (norm <= 1.0) {
            t = hit ? target : t + h;
            y = y5;
            if (hit) {
                out.push_back(y);
                ++next;
            }
        }
        const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
        h *= factor;
    }
    return out;
}

/// Fisher information in its defining form
///   sum_x [ -(M log l)(x) + (zeta(x)/nu(x)) (M l)(x) ] nu(x),  l = nu/zeta.
inline double fisher_definition(const Vector& nu, const Vector& zeta, const Matrix& M) {
    const Vector l = nu.cwiseQuotient(zeta);
    const Vector log_l = l.array().log().matrix();
    const Vector m_log = M * log_l;
    const Vector m_l = M * l;
    double r = 0.0;
    for (Eigen::Index x = 0; x < nu.size(); ++x) r += (-m_log(x) + zeta(x) / nu(x) * m_l(x)) * nu(x);
    return r;
}

inline Vector random_simplex(std::mt19937_64& rng, Eigen::Index n, double floor = 0.0) {
    std::exponential_distribution<double> e(1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = e(rng) + floor;
    return v / v.sum();
}

/// Dense generator with off-diagonal rates uniform in [lo, hi].
inline Matrix random_generator(std::mt19937_64& rng, Eigen::Index n, double lo = 0.1, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix L = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) L(i, j) = u(rng);
        }
        L(i, i) = -L.row(i).sum();
    }
    return L;
}

/// Irreducibility through positivity of (I + P/nu_max)^n, P the off-diagonal part.
inline bool irreducible_by_matrix_power(const Matrix& L) {
    const auto n = L.rows();
    Matrix P = L;
    P.diagonal().setZero();
    const double nu_max = std::max(P.maxCoeff(), 1e-300);
    Matrix step = Matrix::Identity(n, n) + P / nu_max;
    Matrix power = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) power = power * step;
    return power.minCoeff() > 0.0;
}

/// L^eps assembled entry by entry from index arithmetic, x = y*n + z.
inline Matrix assemble_l_eps(const Matrix& q0, const Matrix& q1, const Matrix& g01, const Matrix& g10, double eps) {
    const auto n = q0.rows();
    Matrix L = Matrix::Zero(2 * n, 2 * n);
    for (Eigen::Index x1 = 0; x1 < 2 * n; ++x1) {
        const auto y1 = x1 / n, z1 = x1 % n;
        for (Eigen::Index x2 = 0; x2 < 2 * n; ++x2) {
            const auto y2 = x2 / n, z2 = x2 % n;
            if (y1 == y2) {
                L(x1, x2) = (y1 == 0 ? q0 : q1)(z1, z2) / eps;
            } else {
                L(x1, x2) = (y1 == 0 ? g01 : g10)(z1, z2);
            }
        }
    }
    for (Eigen::Index x = 0; x < 2 * n; ++x) {
        double off = 0.0;
        for (Eigen::Index x2 = 0; x2 < 2 * n; ++x2) {
            if (x2 != x) off += L(x, x2);
        }
        L(x, x) = -off;
    }
    return L;
}

/// Two-state chain with rates a (0 -> 1) and b (1 -> 0): closed-form law at time t.
inline Vector two_state_law(double a, double b, double p0, double t) {
    const double s = a + b;
    const double first = b / s + (p0 - b / s) * std::exp(-s * t);
    Vector v(2);
    v << first, 1.0 - first;
    return v;
}

inline double entropy(const Vector& nu, const Vector& zeta) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < nu.size(); ++i) {
        if (nu(i) > 0.0) h += nu(i) * std::log(nu(i) / zeta(i));
    }
    return h;
}

}  // namespace oracle
