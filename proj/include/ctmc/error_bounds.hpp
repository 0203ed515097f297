#pragma once

// Relative-entropy error certificates comparing the coarse-grained and the
// effective dynamics, with the ingredients they are assembled from.

#include "ctmc/chain.hpp"
#include "ctmc/coarse_graining.hpp"
#include "ctmc/dynamics.hpp"
#include "ctmc/functionals.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ctmc {

/// g = max_x1 sum_x2 L(x1,x2) [l(xi x1) - l(xi x2)],  l = log(cg/eff).
/// Throws NonPositiveMarginal unless cg and eff are strictly positive.
[[nodiscard]] double compute_g(const Generator& L, const CoarseGrainingMap& xi, const ProbabilityVector& cg,
                               const ProbabilityVector& eff);

/// sqrt of the trapezoid integral of g^2 over the whole grid.
[[nodiscard]] double g_l2_norm(const std::vector<double>& g, const TimeGrid& grid);

struct Envelope {
    std::vector<double> c1;  ///< sqrt(2 H0 + c_g sqrt(8/alpha) sqrt(dH_t)), c_g = 2 ||g||_{L2(0,t)}
    double c2 = 0.0;         ///< prefactor of the exponential branch
    double c = 0.0;          ///< min of the two fitted decay rates
    std::vector<double> tv;  ///< TV(cg_t, eff_t)
    std::vector<bool> verdict;
    /// First grid time where c2 e^{-ct} < c1(t), if any.
    std::optional<double> crossover;
};

struct BoundReport {
    TimeGrid grid;
    std::vector<double> lhs;          ///< H(cg_t | eff_t)
    std::vector<double> rhs_general;  ///< NaN before start_time
    std::optional<std::vector<double>> rhs_eps;
    std::vector<double> g_values;
    std::vector<double> g_l2_cumulative;  ///< ||g||_{L2(start,t)}
    double g_l2 = 0.0;                    ///< ||g||_{L2(start,T)}
    double alpha_used = 0.0;
    double start_time = 0.0;
    std::optional<double> epsilon;
    std::optional<Envelope> envelope;
    std::vector<bool> verdict;  ///< lhs <= every rhs; true before start_time
    double sup_lhs = 0.0;
    double t_argmax = 0.0;
    std::vector<std::string> notes;

    [[nodiscard]] bool all_true() const;
};

/// Per-level LSI estimates for (L^y as a generator, rho(.|y)); alpha = min over y.
struct AlphaEstimate {
    double alpha = 0.0;
    std::vector<std::optional<LsiEstimate>> per_level;  ///< empty for singleton level sets
    bool repaired = false;                              ///< some L^y was not generator-like
};

[[nodiscard]] AlphaEstimate estimate_level_alpha(const Generator& L, const CoarseGrainingMap& xi,
                                                 const ProbabilityVector& rho, const LsiOptions& options = {});

/// rhs(t) = H(cg_s|eff_s) + 2 ||g||_{L2(s,t)} sqrt(2/alpha) sqrt(H(mu_s|rho) - H(mu_t|rho)),
/// with s = start_time (the first grid point at or after it).
[[nodiscard]] BoundReport general_bound_report(const Generator& L, const CoarseGrainingMap& xi,
                                               const Trajectory& mu, const Trajectory& cg, const Trajectory& eff,
                                               const ProbabilityVector& rho, double alpha, double start_time = 0.0);

/// Multiscale form. alpha_q is the LSI constant of the fast blocks Q_y, so the
/// level dynamics have constant alpha_q/eps. Adds
///   rhs_eps(t) = H_s + c sqrt(eps T / alpha_q) sqrt(dH_t),  c = 2 sqrt(2) ||g||_{L2(s,T)} / sqrt(T),
/// which dominates rhs_general pointwise.
[[nodiscard]] BoundReport eps_bound_report(const Generator& L_eps, const CoarseGrainingMap& xi, const Trajectory& mu,
                                           const Trajectory& cg, const Trajectory& eff, const ProbabilityVector& rho,
                                           double epsilon, double alpha_q, double start_time = 0.0);

/// Fills report.envelope. The exponential branch uses constructive prefactors
/// sup_t TV(., target) e^{ct} for both trajectories, summed.
/// Throws MissingFit if either decay rate cannot be fitted.
void attach_long_time_envelope(BoundReport& report, const Trajectory& cg, const Trajectory& eff,
                               const ProbabilityVector& target);

/// max_t |H(cg_t|eff_t) - H(cg_0|eff_0) + int_0^t R_N(cg|eff) - int_0^t sum log(cg/eff) (d_t cg - N^T cg)|.
[[nodiscard]] double entropy_identity_residual(const Trajectory& cg, const Trajectory& eff, const Generator& N);

}  // namespace ctmc
