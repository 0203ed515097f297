#pragma once

// Information functionals on probability vectors: relative entropy, total
// variation, Fisher information (entropy production) and a numerical
// log-Sobolev constant estimator.

#include "ctmc/chain.hpp"

#include <cstdint>
#include <string>

namespace ctmc {

class Trajectory;

/// sum nu log(nu/zeta), 0 log 0 = 0; +inf when nu charges a zero of zeta.
[[nodiscard]] double relative_entropy(const ProbabilityVector& nu, const ProbabilityVector& zeta);

/// sum |nu - zeta|. This is the convention under which the CKP constant is sqrt(2H).
[[nodiscard]] double total_variation(const ProbabilityVector& nu, const ProbabilityVector& zeta);
/// (1/2) sum |nu - zeta|.
[[nodiscard]] double total_variation_half(const ProbabilityVector& nu, const ProbabilityVector& zeta);

/// sqrt(2 H(nu|zeta)) - TV(nu, zeta); nonnegative up to rounding.
[[nodiscard]] double ckp_gap(const ProbabilityVector& nu, const ProbabilityVector& zeta);

/// M-Fisher information in the form
///   sum_{x,x'} M(x,x') zeta(x) l(x) [l(x')/l(x) - 1 - log(l(x')/l(x))],  l = nu/zeta.
/// Diagonal terms vanish, so any matrix with nonnegative off-diagonal entries
/// is accepted (restrictions of generators to level sets in particular).
/// Throws NonPositiveMeasure unless nu and zeta are strictly positive.
[[nodiscard]] double fisher_information(const Vector& nu, const Vector& zeta, const Matrix& m);
[[nodiscard]] double fisher_information(const ProbabilityVector& nu, const ProbabilityVector& zeta,
                                        const Generator& m);

/// Mixes in a uniform floor, (1 - delta) nu + delta/n, for callers that need
/// Fisher information at boundary measures.
[[nodiscard]] ProbabilityVector with_mixing_floor(const ProbabilityVector& nu, double delta = 1e-12);

/// max over interior grid points of |d/dt H(mu_t|rho) + R_L(mu_t|rho)|, with
/// the time derivative taken by three-point differences on the stored grid.
[[nodiscard]] double entropy_dissipation_residual(const Generator& L, const Trajectory& mu,
                                                  const ProbabilityVector& rho);

enum class LsiMethod { Grid, MultistartDescent };

struct LsiEstimate {
    double alpha = 0.0;
    ProbabilityVector witness;
    LsiMethod method = LsiMethod::MultistartDescent;
    int samples = 0;
};

[[nodiscard]] std::string to_string(LsiMethod method);

struct LsiOptions {
    int starts = 50;
    std::uint64_t seed = 20210607;
    int max_iterations = 400;
    /// Measures with H(nu|zeta) below this are excluded from the infimum.
    double exclusion_entropy = 1e-10;
    /// Resolution of the exhaustive grid used on two-state spaces.
    double grid_step = 1e-5;
    /// Force a method; by default two-state problems use the grid.
    std::optional<LsiMethod> method;
};

/// Estimates inf over positive nu of R_M(nu|zeta) / H(nu|zeta).
/// Throws DegenerateRatio when the estimate is not positive.
[[nodiscard]] LsiEstimate estimate_lsi_constant(const Generator& m, const ProbabilityVector& zeta,
                                                const LsiOptions& options = {});

}  // namespace ctmc
