#pragma once

// Forward Kolmogorov solvers and trajectory storage.

#include "ctmc/chain.hpp"

#include <span>
#include <vector>

namespace ctmc {

class CoarseGrainingMap;

enum class GridKind { Uniform, RefinedNearZero, Custom };

class TimeGrid {
public:
    /// steps equal intervals on [0, horizon].
    static TimeGrid uniform(double horizon, std::size_t steps);
    /// Geometric points first_fraction*horizon * ratio^k until the geometric
    /// step reaches horizon/uniform_steps, then uniform spacing to the horizon.
    static TimeGrid refined_near_zero(double horizon, double first_fraction = 1e-6, double ratio = 1.2,
                                      std::size_t uniform_steps = 2000);
    /// Arbitrary points; must start at 0 and be strictly increasing.
    static TimeGrid from_points(std::vector<double> points);

    [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double operator[](std::size_t k) const { return points_[k]; }
    [[nodiscard]] double horizon() const noexcept { return points_.back(); }
    [[nodiscard]] GridKind kind() const noexcept { return kind_; }
    /// Largest spacing between consecutive points.
    [[nodiscard]] double max_step() const;

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept { return a.points_ == b.points_; }

private:
    TimeGrid(std::vector<double> points, GridKind kind);

    std::vector<double> points_;
    GridKind kind_;
};

/// Probability vectors on a time grid, stored row-per-time.
class Trajectory {
public:
    /// Validates every row as a probability vector (clamping tiny negatives).
    Trajectory(TimeGrid grid, StateSpace space, Matrix values);

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const StateSpace& space() const noexcept { return space_; }
    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return grid_.size(); }
    [[nodiscard]] ProbabilityVector at(std::size_t k) const;
    [[nodiscard]] double time(std::size_t k) const { return grid_[k]; }

private:
    TimeGrid grid_;
    StateSpace space_;
    Matrix values_;
};

/// Pointwise push-forward of every value.
[[nodiscard]] Trajectory project(const Trajectory& full, const CoarseGrainingMap& xi);

/// exp(t_k L^T) mu0 on every grid point; one propagator per distinct step.
[[nodiscard]] Trajectory solve_constant(const Generator& L, const ProbabilityVector& mu0, const TimeGrid& grid);

struct CoarseGrainedSolution {
    Trajectory full;
    Trajectory cg;
};

/// Full solution plus its projection (exact coarse-grained trajectory).
[[nodiscard]] CoarseGrainedSolution solve_coarse_grained(const Generator& L, const CoarseGrainingMap& xi,
                                                         const ProbabilityVector& mu0, const TimeGrid& grid);

/// Integrates d/dt cg = Lhat_t^T cg with classical RK4, where Lhat_t is built
/// from the exactly propagated full solution at each stage time.
[[nodiscard]] Trajectory solve_cg_ode(const Generator& L, const CoarseGrainingMap& xi, const ProbabilityVector& mu0,
                                      const TimeGrid& grid);

struct DecayFit {
    double rate = 0.0;           ///< -slope of log TV against t
    double log_prefactor = 0.0;  ///< intercept of the fitted line
    std::size_t points = 0;
};

/// Least-squares fit of log TV(value_k, target) over the points with TV in
/// [window_low, window_high]. Throws InsufficientDecay below 5 points.
[[nodiscard]] DecayFit fit_tv_decay(const Trajectory& traj, const ProbabilityVector& target,
                                    double window_low = 1e-9, double window_high = 1e-2);
[[nodiscard]] double tv_decay_rate(const Trajectory& traj, const ProbabilityVector& target);

/// Three-point derivative of samples on a (possibly nonuniform) grid; second
/// order at every point including the ends.
[[nodiscard]] std::vector<double> grid_derivative(std::span<const double> values, std::span<const double> t);
/// Trapezoid cumulative integral, first entry 0.
[[nodiscard]] std::vector<double> cumulative_trapezoid(std::span<const double> values, std::span<const double> t);

}  // namespace ctmc
