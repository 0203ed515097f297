#include "ctmc/dynamics.hpp"

#include "ctmc/coarse_graining.hpp"
#include "ctmc/functionals.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace ctmc {

namespace {

constexpr double kRenormalizeLimit = 1e-9;

}  // namespace

TimeGrid::TimeGrid(std::vector<double> points, GridKind kind) : points_(std::move(points)), kind_(kind) {
    if (points_.size() < 2) throw Error(ErrorKind::InvalidArgument, "time grid needs at least two points");
    if (points_.front() != 0.0) throw Error(ErrorKind::InvalidArgument, "time grid must start at 0");
    for (std::size_t k = 1; k < points_.size(); ++k) {
        if (!std::isfinite(points_[k]) || !(points_[k] > points_[k - 1])) {
            throw Error(ErrorKind::InvalidArgument, fmt::format("time grid not strictly increasing at {}", k));
        }
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || steps == 0) throw Error(ErrorKind::InvalidArgument, "uniform grid needs T > 0, steps > 0");
    std::vector<double> points(steps + 1);
    const double h = horizon / static_cast<double>(steps);
    for (std::size_t k = 0; k <= steps; ++k) points[k] = static_cast<double>(k) * h;
    points.back() = horizon;
    return TimeGrid(std::move(points), GridKind::Uniform);
}

TimeGrid TimeGrid::refined_near_zero(double horizon, double first_fraction, double ratio, std::size_t uniform_steps) {
    if (!(horizon > 0.0) || !(first_fraction > 0.0) || !(ratio > 1.0) || uniform_steps == 0) {
        throw Error(ErrorKind::InvalidArgument, "invalid refined grid parameters");
    }
    const double h = horizon / static_cast<double>(uniform_steps);
    std::vector<double> points{0.0};
    double t = first_fraction * horizon;
    while (t < horizon && (points.size() < 2 || t - points.back() < h)) {
        points.push_back(t);
        t *= ratio;
    }
    const double start = points.back();
    const auto remaining = static_cast<std::size_t>(std::ceil((horizon - start) / h - 1e-9));
    for (std::size_t k = 1; k <= remaining; ++k) {
        points.push_back(std::min(horizon, start + static_cast<double>(k) * h));
    }
    points.back() = horizon;
    // A final sliver shorter than a tenth of h is merged into its neighbour.
    if (points.size() > 2 && points[points.size() - 1] - points[points.size() - 2] < 0.1 * h) {
        points.erase(points.end() - 2);
    }
    return TimeGrid(std::move(points), GridKind::RefinedNearZero);
}

TimeGrid TimeGrid::from_points(std::vector<double> points) { return TimeGrid(std::move(points), GridKind::Custom); }

double TimeGrid::max_step() const {
    double h = 0.0;
    for (std::size_t k = 1; k < points_.size(); ++k) h = std::max(h, points_[k] - points_[k - 1]);
    return h;
}

Trajectory::Trajectory(TimeGrid grid, StateSpace space, Matrix values)
    : grid_(std::move(grid)), space_(std::move(space)), values_(std::move(values)) {
    if (values_.rows() != static_cast<Eigen::Index>(grid_.size()) ||
        values_.cols() != static_cast<Eigen::Index>(space_.size())) {
        throw Error(ErrorKind::LengthMismatch, "trajectory values do not match grid and state space");
    }
    for (Eigen::Index k = 0; k < values_.rows(); ++k) {
        if (values_.row(k).minCoeff() < -tol::probability) {
            throw Error(ErrorKind::InvalidProbability, fmt::format("negative mass at time index {}", k));
        }
        values_.row(k) = values_.row(k).cwiseMax(0.0);
        if (std::abs(values_.row(k).sum() - 1.0) > tol::probability) {
            throw Error(ErrorKind::InvalidProbability, fmt::format("mass {} at time index {}", values_.row(k).sum(), k));
        }
    }
}

ProbabilityVector Trajectory::at(std::size_t k) const {
    return ProbabilityVector::from_mass(space_, values_.row(static_cast<Eigen::Index>(k)).transpose());
}

Trajectory project(const Trajectory& full, const CoarseGrainingMap& xi) {
    if (!(full.space() == xi.fine())) throw Error(ErrorKind::SpaceMismatch, "trajectory is not on the fine space");
    const auto m = static_cast<Eigen::Index>(xi.coarse().size());
    Matrix out = Matrix::Zero(full.values().rows(), m);
    for (std::size_t x = 0; x < xi.assignment().size(); ++x) {
        out.col(static_cast<Eigen::Index>(xi.image(x))) += full.values().col(static_cast<Eigen::Index>(x));
    }
    return Trajectory(full.grid(), xi.coarse(), std::move(out));
}

namespace {

// exp(h L^T) for the steps of one solve, reused across equal steps.
class PropagatorCache {
public:
    explicit PropagatorCache(const Matrix& rates) : transposed_(rates.transpose()) {}

    const Matrix& get(double h) {
        // Steps that agree to ~13 digits share a propagator.
        const double key = std::round(std::log(h) * 1e12);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Matrix p = (h * transposed_).exp();
        if (!p.allFinite()) throw Error(ErrorKind::ExpmFailure, fmt::format("matrix exponential failed at h = {}", h));
        return cache_.emplace(key, std::move(p)).first->second;
    }

private:
    Matrix transposed_;
    std::map<double, Matrix> cache_;
};

void renormalize(Vector& v, double t) {
    const double drift = v.sum() - 1.0;
    if (std::abs(drift) > kRenormalizeLimit) {
        throw Error(ErrorKind::MassDrift, fmt::format("mass drifted by {} at t = {}", drift, t));
    }
    v /= v.sum();
}

void require_same(const StateSpace& a, const StateSpace& b, const char* what) {
    if (!(a == b)) throw Error(ErrorKind::SpaceMismatch, what);
}

}  // namespace

Trajectory solve_constant(const Generator& L, const ProbabilityVector& mu0, const TimeGrid& grid) {
    require_same(L.space(), mu0.space(), "initial measure and generator live on different spaces");
    PropagatorCache propagators(L.rates());
    const auto n = static_cast<Eigen::Index>(L.size());
    Matrix values(static_cast<Eigen::Index>(grid.size()), n);
    Vector mu = mu0.mass();
    values.row(0) = mu.transpose();
    for (std::size_t k = 1; k < grid.size(); ++k) {
        mu = propagators.get(grid[k] - grid[k - 1]) * mu;
        renormalize(mu, grid[k]);
        values.row(static_cast<Eigen::Index>(k)) = mu.transpose();
    }
    return Trajectory(grid, L.space(), std::move(values));
}

CoarseGrainedSolution solve_coarse_grained(const Generator& L, const CoarseGrainingMap& xi,
                                           const ProbabilityVector& mu0, const TimeGrid& grid) {
    require_same(L.space(), xi.fine(), "generator is not on the fine space of the map");
    auto full = solve_constant(L, mu0, grid);
    auto cg = project(full, xi);
    return CoarseGrainedSolution{std::move(full), std::move(cg)};
}

Trajectory solve_cg_ode(const Generator& L, const CoarseGrainingMap& xi, const ProbabilityVector& mu0,
                        const TimeGrid& grid) {
    require_same(L.space(), xi.fine(), "generator is not on the fine space of the map");
    require_same(mu0.space(), xi.fine(), "initial measure is not on the fine space of the map");
    PropagatorCache propagators(L.rates());
    const auto m = static_cast<Eigen::Index>(xi.coarse().size());

    auto lumped = [&](const Vector& mu) {
        return cg_generator(L, ProbabilityVector::normalized(xi.fine(), mu), xi).rates().transpose().eval();
    };

    Matrix values(static_cast<Eigen::Index>(grid.size()), m);
    Vector mu = mu0.mass();
    Vector cg = push_forward(mu0, xi).mass();
    values.row(0) = cg.transpose();
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double span = grid[k] - grid[k - 1];
        Matrix a_start = lumped(mu);
        const double limit = 0.1 / std::max(row_sum_norm(a_start.transpose()), 1e-300);
        const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / limit)));
        const double h = span / static_cast<double>(substeps);
        const Matrix& half = propagators.get(0.5 * h);
        for (std::size_t s = 0; s < substeps; ++s) {
            const Vector mu_mid = half * mu;
            const Vector mu_end = half * mu_mid;
            const Matrix a_mid = lumped(mu_mid);
            const Matrix a_end = lumped(mu_end);
            const Vector k1 = a_start * cg;
            const Vector k2 = a_mid * (cg + 0.5 * h * k1);
            const Vector k3 = a_mid * (cg + 0.5 * h * k2);
            const Vector k4 = a_end * (cg + h * k3);
            cg += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            mu = mu_end;
            a_start = a_end;
        }
        renormalize(mu, grid[k]);
        renormalize(cg, grid[k]);
        values.row(static_cast<Eigen::Index>(k)) = cg.transpose();
    }
    return Trajectory(grid, xi.coarse(), std::move(values));
}

DecayFit fit_tv_decay(const Trajectory& traj, const ProbabilityVector& target, double window_low,
                      double window_high) {
    std::vector<double> ts, logs;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double tv = total_variation(traj.at(k), target);
        if (tv >= window_low && tv <= window_high) {
            ts.push_back(traj.time(k));
            logs.push_back(std::log(tv));
        }
    }
    if (ts.size() < 5) {
        throw Error(ErrorKind::InsufficientDecay, fmt::format("only {} points in the decay window", ts.size()));
    }
    const auto count = static_cast<double>(ts.size());
    double mt = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        mt += ts[i];
        ml += logs[i];
    }
    mt /= count;
    ml /= count;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxy += (ts[i] - mt) * (logs[i] - ml);
        sxx += (ts[i] - mt) * (ts[i] - mt);
    }
    const double slope = sxy / sxx;
    return DecayFit{-slope, ml - slope * mt, ts.size()};
}

double tv_decay_rate(const Trajectory& traj, const ProbabilityVector& target) {
    return fit_tv_decay(traj, target).rate;
}

std::vector<double> grid_derivative(std::span<const double> f, std::span<const double> t) {
    const std::size_t n = f.size();
    if (n != t.size()) throw Error(ErrorKind::LengthMismatch, "values and times differ in length");
    if (n < 3) throw Error(ErrorKind::TrajectoryTooShort, "three points needed for a derivative");
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = t[i] - t[i - 1];
        const double h2 = t[i + 1] - t[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1];
    }
    {
        const double h1 = t[1] - t[0];
        const double h2 = t[2] - t[1];
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] -
               h1 / (h2 * (h1 + h2)) * f[2];
    }
    {
        const double h1 = t[n - 2] - t[n - 3];
        const double h2 = t[n - 1] - t[n - 2];
        d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
                   (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
    }
    return d;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, std::span<const double> t) {
    if (f.size() != t.size()) throw Error(ErrorKind::LengthMismatch, "values and times differ in length");
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    return out;
}

}  // namespace ctmc
