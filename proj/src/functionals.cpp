#include "ctmc/functionals.hpp"

#include "ctmc/dynamics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ctmc {

namespace {

void require_same_space(const ProbabilityVector& a, const ProbabilityVector& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("measures have {} and {} entries", a.size(), b.size()));
    }
}

// theta - 1 - log(theta), the integrand of the entropy production.
double bregman_log(double theta) { return theta - 1.0 - std::log(theta); }

double entropy_of(const Vector& nu, const Vector& zeta) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < nu.size(); ++i) {
        if (nu(i) <= 0.0) continue;
        if (zeta(i) <= 0.0) return std::numeric_limits<double>::infinity();
        h += nu(i) * std::log(nu(i) / zeta(i));
    }
    return std::max(h, 0.0);
}

double fisher_unchecked(const Vector& nu, const Vector& zeta, const Matrix& m) {
    const auto n = nu.size();
    double r = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
        const double lx = nu(x) / zeta(x);
        for (Eigen::Index y = 0; y < n; ++y) {
            if (y == x || m(x, y) == 0.0) continue;
            const double ly = nu(y) / zeta(y);
            r += m(x, y) * zeta(x) * lx * bregman_log(ly / lx);
        }
    }
    return r;
}

}  // namespace

double relative_entropy(const ProbabilityVector& nu, const ProbabilityVector& zeta) {
    require_same_space(nu, zeta);
    return entropy_of(nu.mass(), zeta.mass());
}

double total_variation(const ProbabilityVector& nu, const ProbabilityVector& zeta) {
    require_same_space(nu, zeta);
    return (nu.mass() - zeta.mass()).cwiseAbs().sum();
}

double total_variation_half(const ProbabilityVector& nu, const ProbabilityVector& zeta) {
    return 0.5 * total_variation(nu, zeta);
}

double ckp_gap(const ProbabilityVector& nu, const ProbabilityVector& zeta) {
    return std::sqrt(2.0 * relative_entropy(nu, zeta)) - total_variation(nu, zeta);
}

double fisher_information(const Vector& nu, const Vector& zeta, const Matrix& m) {
    if (nu.size() != zeta.size() || m.rows() != nu.size() || m.cols() != nu.size()) {
        throw Error(ErrorKind::DimensionMismatch, "Fisher information arguments disagree in size");
    }
    if (nu.minCoeff() <= 0.0 || zeta.minCoeff() <= 0.0) {
        throw Error(ErrorKind::NonPositiveMeasure, "Fisher information needs strictly positive measures");
    }
    return fisher_unchecked(nu, zeta, m);
}

double fisher_information(const ProbabilityVector& nu, const ProbabilityVector& zeta, const Generator& m) {
    require_same_space(nu, zeta);
    return fisher_information(nu.mass(), zeta.mass(), m.rates());
}

ProbabilityVector with_mixing_floor(const ProbabilityVector& nu, double delta) {
    const auto n = static_cast<double>(nu.size());
    Vector mixed = (1.0 - delta) * nu.mass();
    mixed.array() += delta / n;
    return ProbabilityVector::normalized(nu.space(), std::move(mixed));
}

double entropy_dissipation_residual(const Generator& L, const Trajectory& mu, const ProbabilityVector& rho) {
    const auto steps = mu.size();
    if (steps < 3) {
        throw Error(ErrorKind::TrajectoryTooShort, fmt::format("{} time points, need at least 3", steps));
    }
    std::vector<double> entropy(steps);
    for (std::size_t k = 0; k < steps; ++k) entropy[k] = relative_entropy(mu.at(k), rho);
    const auto derivative = grid_derivative(entropy, mu.grid().points());
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < steps; ++k) {
        const Vector nu = mu.values().row(static_cast<Eigen::Index>(k)).transpose();
        const double production = fisher_information(nu, rho.mass(), L.rates());
        worst = std::max(worst, std::abs(derivative[k] + production));
    }
    return worst;
}

std::string to_string(LsiMethod method) {
    return method == LsiMethod::Grid ? "grid" : "multistart_descent";
}

namespace {

struct RatioProblem {
    const Matrix& m;
    const Vector& zeta;
    double exclusion;

    // Value of R/H at softmax(theta); +inf inside the exclusion ball.
    double value(const Vector& theta, Vector* nu_out = nullptr) const {
        Vector nu = softmax(theta);
        const double h = entropy_of(nu, zeta);
        double ratio = std::numeric_limits<double>::infinity();
        if (h >= exclusion && nu.minCoeff() > 0.0) ratio = fisher_unchecked(nu, zeta, m) / h;
        if (nu_out) *nu_out = std::move(nu);
        return ratio;
    }

    // Gradient of R/H with respect to theta.
    Vector gradient(const Vector& theta) const {
        const Vector nu = softmax(theta);
        const auto n = nu.size();
        const double h = entropy_of(nu, zeta);
        const double r = fisher_unchecked(nu, zeta, m);
        Vector dh(n), dr = Vector::Zero(n);
        for (Eigen::Index k = 0; k < n; ++k) dh(k) = std::log(nu(k) / zeta(k)) + 1.0;
        for (Eigen::Index x = 0; x < n; ++x) {
            const double log_lx = std::log(nu(x) / zeta(x));
            for (Eigen::Index y = 0; y < n; ++y) {
                if (y == x || m(x, y) == 0.0) continue;
                const double log_ly = std::log(nu(y) / zeta(y));
                // d/d nu(y) of zeta(x) nu(y)/zeta(y) - nu(x) log l(y)
                dr(y) += m(x, y) * (zeta(x) / zeta(y) - nu(x) / nu(y));
                // d/d nu(x) of -nu(x) + nu(x) log l(x) - nu(x) log l(y)
                dr(x) += m(x, y) * (log_lx - log_ly);
            }
        }
        const Vector d_ratio = (dr * h - dh * r) / (h * h);
        // Chain rule through softmax: d/dtheta_j = nu_j (g_j - <nu, g>).
        const double mean = nu.dot(d_ratio);
        return nu.cwiseProduct(d_ratio.array().matrix() - Vector::Constant(n, mean));
    }

    static Vector softmax(const Vector& theta) {
        Vector e = (theta.array() - theta.maxCoeff()).exp().matrix();
        return e / e.sum();
    }
};

struct Candidate {
    double ratio;
    Vector nu;
};

Candidate descend(const RatioProblem& problem, Vector theta, int max_iterations) {
    Vector nu;
    double value = problem.value(theta, &nu);
    double step = 1.0;
    Vector previous_theta, previous_grad;
    for (int iter = 0; iter < max_iterations; ++iter) {
        const Vector grad = problem.gradient(theta);
        const double gnorm2 = grad.squaredNorm();
        if (!(gnorm2 > 1e-28)) break;
        // Barzilai-Borwein initial step, safeguarded by Armijo backtracking.
        if (iter > 0) {
            const Vector s = theta - previous_theta;
            const Vector yv = grad - previous_grad;
            const double sy = s.dot(yv);
            if (sy > 0.0) step = std::clamp(s.squaredNorm() / sy, 1e-8, 1e8);
        }
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            Vector trial = theta - step * grad;
            Vector trial_nu;
            const double trial_value = problem.value(trial, &trial_nu);
            if (trial_value <= value - 1e-4 * step * gnorm2) {
                previous_theta = theta;
                previous_grad = grad;
                theta = std::move(trial);
                nu = std::move(trial_nu);
                const double improvement = value - trial_value;
                value = trial_value;
                accepted = improvement > 1e-15 * std::abs(value);
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return {value, std::move(nu)};
}

Vector dirichlet_one(std::mt19937_64& rng, Eigen::Index n) {
    std::exponential_distribution<double> expo(1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = expo(rng) + 1e-300;
    return v / v.sum();
}

}  // namespace

LsiEstimate estimate_lsi_constant(const Generator& m, const ProbabilityVector& zeta, const LsiOptions& options) {
    if (m.size() != zeta.size()) {
        throw Error(ErrorKind::DimensionMismatch, "generator and reference measure disagree in size");
    }
    if (!zeta.strictly_positive()) {
        throw Error(ErrorKind::NonPositiveMeasure, "log-Sobolev reference measure must be strictly positive");
    }
    const auto n = static_cast<Eigen::Index>(m.size());
    if (n < 2) throw Error(ErrorKind::InvalidSize, "log-Sobolev constant needs at least two states");

    const LsiMethod method = options.method.value_or(n == 2 ? LsiMethod::Grid : LsiMethod::MultistartDescent);
    if (method == LsiMethod::Grid && n != 2) {
        throw Error(ErrorKind::InvalidArgument, "exhaustive grid is only available on two states");
    }

    double best = std::numeric_limits<double>::infinity();
    Vector best_nu;
    int samples = 0;

    if (method == LsiMethod::Grid) {
        const auto points = static_cast<long>(std::floor(1.0 / options.grid_step));
        Vector nu(2);
        for (long k = 1; k < points; ++k) {
            const double p = static_cast<double>(k) * options.grid_step;
            nu << p, 1.0 - p;
            const double h = entropy_of(nu, zeta.mass());
            ++samples;
            if (h < options.exclusion_entropy) continue;
            const double ratio = fisher_unchecked(nu, zeta.mass(), m.rates()) / h;
            if (ratio < best) {
                best = ratio;
                best_nu = nu;
            }
        }
    } else {
        RatioProblem problem{m.rates(), zeta.mass(), options.exclusion_entropy};
        std::mt19937_64 rng(options.seed);
        // Starts are drawn up front so the result does not depend on evaluation order.
        std::vector<Vector> starts;
        starts.reserve(static_cast<std::size_t>(options.starts));
        for (int s = 0; s < options.starts; ++s) starts.push_back(dirichlet_one(rng, n));
        for (const auto& start : starts) {
            Vector theta = start.array().log().matrix();
            if (problem.value(theta) == std::numeric_limits<double>::infinity()) continue;
            auto candidate = descend(problem, std::move(theta), options.max_iterations);
            ++samples;
            if (candidate.ratio < best) {
                best = candidate.ratio;
                best_nu = std::move(candidate.nu);
            }
        }
    }

    if (!std::isfinite(best) || !(best > 0.0)) {
        throw Error(ErrorKind::DegenerateRatio, fmt::format("log-Sobolev ratio estimate is {}", best));
    }
    return LsiEstimate{best, ProbabilityVector::normalized(zeta.space(), best_nu), method, samples};
}

}  // namespace ctmc
