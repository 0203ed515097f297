#include "ctmc/error_bounds.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rounding slack for lhs <= rhs comparisons.
bool within(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-12) + 1e-15; }

void require_grid(const Trajectory& a, const Trajectory& b, const char* what) {
    if (!(a.grid() == b.grid())) throw Error(ErrorKind::GridMismatch, what);
}

double g_unchecked(const Generator& L, const CoarseGrainingMap& xi, const Vector& cg, const Vector& eff) {
    const Vector log_ratio = (cg.array() / eff.array()).log().matrix();
    const auto n = static_cast<Eigen::Index>(L.size());
    double g = -std::numeric_limits<double>::infinity();
    for (Eigen::Index x1 = 0; x1 < n; ++x1) {
        const double l1 = log_ratio(static_cast<Eigen::Index>(xi.image(static_cast<std::size_t>(x1))));
        double f = 0.0;
        for (Eigen::Index x2 = 0; x2 < n; ++x2) {
            const double rate = L.rates()(x1, x2);
            if (x2 == x1 || rate == 0.0) continue;
            f += rate * (l1 - log_ratio(static_cast<Eigen::Index>(xi.image(static_cast<std::size_t>(x2)))));
        }
        g = std::max(g, f);
    }
    return g;
}

std::size_t start_index(const TimeGrid& grid, double start_time) {
    if (start_time < 0.0 || start_time > grid.horizon()) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("start time {} outside the grid", start_time));
    }
    const auto& t = grid.points();
    const auto it = std::lower_bound(t.begin(), t.end(), start_time - 1e-12 * std::max(1.0, start_time));
    return static_cast<std::size_t>(it - t.begin());
}

}  // namespace

bool BoundReport::all_true() const {
    return std::all_of(verdict.begin(), verdict.end(), [](bool v) { return v; });
}

double compute_g(const Generator& L, const CoarseGrainingMap& xi, const ProbabilityVector& cg,
                 const ProbabilityVector& eff) {
    if (!(L.space() == xi.fine())) throw Error(ErrorKind::SpaceMismatch, "generator is not on the fine space");
    if (!(cg.space() == xi.coarse()) || !(eff.space() == xi.coarse())) {
        throw Error(ErrorKind::SpaceMismatch, "marginals are not on the coarse space");
    }
    if (!cg.strictly_positive() || !eff.strictly_positive()) {
        throw Error(ErrorKind::NonPositiveMarginal, "g needs strictly positive marginals");
    }
    return g_unchecked(L, xi, cg.mass(), eff.mass());
}

double g_l2_norm(const std::vector<double>& g, const TimeGrid& grid) {
    if (g.size() != grid.size()) {
        throw Error(ErrorKind::LengthMismatch, fmt::format("{} values on a grid of {} points", g.size(), grid.size()));
    }
    std::vector<double> sq(g.size());
    std::transform(g.begin(), g.end(), sq.begin(), [](double v) { return v * v; });
    return std::sqrt(cumulative_trapezoid(sq, grid.points()).back());
}

AlphaEstimate estimate_level_alpha(const Generator& L, const CoarseGrainingMap& xi, const ProbabilityVector& rho,
                                   const LsiOptions& options) {
    const auto parts = disintegrate(rho, xi);
    AlphaEstimate out;
    out.alpha = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < xi.coarse().size(); ++y) {
        if (xi.level_set(y).size() < 2) {
            out.per_level.emplace_back(std::nullopt);
            continue;
        }
        const auto level = restrict_to_level(L, xi, y);
        out.repaired = out.repaired || !level.generator_like;
        if (!parts.conditionals[y]) throw Error(ErrorKind::UndefinedConditional, "stationary conditional missing");
        auto estimate = estimate_lsi_constant(level.closest_generator(), *parts.conditionals[y], options);
        out.alpha = std::min(out.alpha, estimate.alpha);
        out.per_level.emplace_back(std::move(estimate));
    }
    return out;
}

BoundReport general_bound_report(const Generator& L, const CoarseGrainingMap& xi, const Trajectory& mu,
                                 const Trajectory& cg, const Trajectory& eff, const ProbabilityVector& rho,
                                 double alpha, double start_time) {
    require_grid(mu, cg, "full and coarse-grained trajectories use different grids");
    require_grid(cg, eff, "coarse-grained and effective trajectories use different grids");
    if (!(alpha > 0.0)) throw Error(ErrorKind::NonPositiveAlpha, fmt::format("alpha = {}", alpha));
    if (!(mu.space() == xi.fine()) || !(cg.space() == xi.coarse()) || !(eff.space() == xi.coarse())) {
        throw Error(ErrorKind::SpaceMismatch, "trajectories do not match the coarse-graining map");
    }

    const auto& grid = cg.grid();
    const std::size_t count = grid.size();
    const std::size_t s = start_index(grid, start_time);

    BoundReport r{grid, {}, {}, std::nullopt, {}, {}, 0.0, alpha, grid[s], std::nullopt, std::nullopt, {}, 0.0,
                  0.0, {}};
    r.lhs.resize(count);
    r.g_values.assign(count, kNaN);
    for (std::size_t k = 0; k < count; ++k) {
        const auto c = cg.at(k);
        const auto e = eff.at(k);
        r.lhs[k] = relative_entropy(c, e);
        if (c.strictly_positive() && e.strictly_positive()) {
            r.g_values[k] = g_unchecked(L, xi, c.mass(), e.mass());
        } else if (k >= s) {
            throw Error(ErrorKind::NonPositiveMarginal, fmt::format("marginal vanishes at t = {}", grid[k]));
        }
        if (r.lhs[k] > r.sup_lhs) {
            r.sup_lhs = r.lhs[k];
            r.t_argmax = grid[k];
        }
    }

    std::vector<double> sq(count - s), times(grid.points().begin() + static_cast<std::ptrdiff_t>(s),
                                              grid.points().end());
    for (std::size_t k = s; k < count; ++k) sq[k - s] = r.g_values[k] * r.g_values[k];
    const auto integral = cumulative_trapezoid(sq, times);
    r.g_l2_cumulative.assign(count, kNaN);
    for (std::size_t k = s; k < count; ++k) r.g_l2_cumulative[k] = std::sqrt(integral[k - s]);
    r.g_l2 = r.g_l2_cumulative.back();

    const double h_start = r.lhs[s];
    const double mu_entropy_start = relative_entropy(mu.at(s), rho);
    const double factor = std::isinf(alpha) ? 0.0 : 2.0 * std::sqrt(2.0 / alpha);
    r.rhs_general.assign(count, kNaN);
    r.verdict.assign(count, true);
    for (std::size_t k = s; k < count; ++k) {
        const double dissipated = std::max(0.0, mu_entropy_start - relative_entropy(mu.at(k), rho));
        r.rhs_general[k] = h_start + factor * r.g_l2_cumulative[k] * std::sqrt(dissipated);
        r.verdict[k] = within(r.lhs[k], r.rhs_general[k]);
    }
    if (s > 0) r.notes.push_back(fmt::format("certified on [{}, {}]", grid[s], grid.horizon()));
    return r;
}

BoundReport eps_bound_report(const Generator& L_eps, const CoarseGrainingMap& xi, const Trajectory& mu,
                             const Trajectory& cg, const Trajectory& eff, const ProbabilityVector& rho, double epsilon,
                             double alpha_q, double start_time) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, fmt::format("epsilon = {}", epsilon));
    if (!(alpha_q > 0.0)) throw Error(ErrorKind::NonPositiveAlpha, fmt::format("alpha = {}", alpha_q));
    auto r = general_bound_report(L_eps, xi, mu, cg, eff, rho, alpha_q / epsilon, start_time);
    r.epsilon = epsilon;

    const std::size_t s = start_index(r.grid, start_time);
    const double span = r.grid.horizon() - r.grid[s];
    const double c = span > 0.0 ? 2.0 * std::sqrt(2.0) * r.g_l2 / std::sqrt(span) : 0.0;
    const double scale = std::isinf(alpha_q) ? 0.0 : std::sqrt(epsilon * span / alpha_q);
    const double h_start = r.lhs[s];
    const double mu_entropy_start = relative_entropy(mu.at(s), rho);
    std::vector<double> rhs(r.grid.size(), kNaN);
    for (std::size_t k = s; k < r.grid.size(); ++k) {
        const double dissipated = std::max(0.0, mu_entropy_start - relative_entropy(mu.at(k), rho));
        rhs[k] = h_start + c * scale * std::sqrt(dissipated);
        r.verdict[k] = r.verdict[k] && within(r.lhs[k], rhs[k]);
    }
    r.rhs_eps = std::move(rhs);
    r.notes.push_back(fmt::format("constant c = 2 sqrt(2) ||g||_L2 / sqrt(T) = {:.17g}", c));
    r.notes.push_back(fmt::format("alpha of the fast blocks = {:.17g}; level alpha = alpha / eps", alpha_q));
    return r;
}

void attach_long_time_envelope(BoundReport& report, const Trajectory& cg, const Trajectory& eff,
                               const ProbabilityVector& target) {
    require_grid(cg, eff, "coarse-grained and effective trajectories use different grids");
    if (!(cg.grid() == report.grid)) throw Error(ErrorKind::GridMismatch, "report and trajectories differ in grid");
    DecayFit fit_cg, fit_eff;
    try {
        fit_cg = fit_tv_decay(cg, target);
        fit_eff = fit_tv_decay(eff, target);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientDecay) throw;
        throw Error(ErrorKind::MissingFit, e.what());
    }

    Envelope env;
    env.c = std::min(fit_cg.rate, fit_eff.rate);
    const std::size_t count = report.grid.size();
    double pre_cg = 0.0, pre_eff = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double grow = std::exp(env.c * report.grid[k]);
        pre_cg = std::max(pre_cg, total_variation(cg.at(k), target) * grow);
        pre_eff = std::max(pre_eff, total_variation(eff.at(k), target) * grow);
    }
    env.c2 = pre_cg + pre_eff;
    env.c1.assign(count, kNaN);
    env.tv.resize(count);
    env.verdict.assign(count, true);
    for (std::size_t k = 0; k < count; ++k) {
        env.tv[k] = total_variation(cg.at(k), eff.at(k));
        const double exponential = env.c2 * std::exp(-env.c * report.grid[k]);
        double bound = exponential;
        if (!std::isnan(report.rhs_general[k])) {
            env.c1[k] = std::sqrt(2.0 * report.rhs_general[k]);
            bound = std::min(bound, env.c1[k]);
            if (!env.crossover && exponential < env.c1[k]) env.crossover = report.grid[k];
        }
        env.verdict[k] = within(env.tv[k], bound);
    }
    report.envelope = std::move(env);
}

double entropy_identity_residual(const Trajectory& cg, const Trajectory& eff, const Generator& N) {
    require_grid(cg, eff, "coarse-grained and effective trajectories use different grids");
    if (!(cg.space() == eff.space()) || !(N.space() == cg.space())) {
        throw Error(ErrorKind::SpaceMismatch, "trajectories and generator live on different spaces");
    }
    const std::size_t count = cg.size();
    if (count < 3) throw Error(ErrorKind::TrajectoryTooShort, "three points needed");
    const auto m = static_cast<Eigen::Index>(cg.space().size());
    const auto& t = cg.grid().points();

    Matrix derivative(static_cast<Eigen::Index>(count), m);
    std::vector<double> column(count);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < count; ++k) column[k] = cg.values()(static_cast<Eigen::Index>(k), j);
        const auto d = grid_derivative(column, t);
        for (std::size_t k = 0; k < count; ++k) derivative(static_cast<Eigen::Index>(k), j) = d[k];
    }

    std::vector<double> entropy(count), production(count), source(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        const Vector c = cg.values().row(row).transpose();
        const Vector e = eff.values().row(row).transpose();
        entropy[k] = relative_entropy(cg.at(k), eff.at(k));
        production[k] = fisher_information(c, e, N.rates());
        const Vector defect = derivative.row(row).transpose() - N.rates().transpose() * c;
        source[k] = (c.array() / e.array()).log().matrix().dot(defect);
    }
    const auto int_production = cumulative_trapezoid(production, t);
    const auto int_source = cumulative_trapezoid(source, t);
    double worst = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        worst = std::max(worst, std::abs(entropy[k] - entropy[0] + int_production[k] - int_source[k]));
    }
    return worst;
}

}  // namespace ctmc
