#pragma once

// Two-macro-state slow-fast family
//   L^eps = eps^-1 blockdiag(Q0, Q1) + [[D0, G01], [G10, D1]]
// on the product space {0,1} x {0..n-1}, its averaged limit, and the
// presets used in the convergence experiments.

#include "ctmc/chain.hpp"
#include "ctmc/coarse_graining.hpp"

#include <array>
#include <string>

namespace ctmc {

struct MultiscaleSpec {
    std::size_t n = 0;
    std::array<Generator, 2> q;  ///< fast blocks Q_0, Q_1 on {0..n-1}
    std::array<Matrix, 2> g;     ///< coupling blocks G_01 (g[0]) and G_10 (g[1])
    double epsilon = 1.0;
};

/// Checks sizes, irreducibility of Q_y, G >= 0 and eps > 0.
void validate_spec(const MultiscaleSpec& spec);
[[nodiscard]] MultiscaleSpec with_epsilon(MultiscaleSpec spec, double epsilon);

/// Labels "(y,z)", index y*n + z.
[[nodiscard]] StateSpace multiscale_space(std::size_t n);
/// (y,z) -> y onto the coarse space {"0","1"}.
[[nodiscard]] CoarseGrainingMap slow_projection(std::size_t n);

[[nodiscard]] Generator build_l_eps(const MultiscaleSpec& spec);

struct AveragedModel {
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    Generator generator;
    std::array<ProbabilityVector, 2> block_stationaries;
};

[[nodiscard]] AveragedModel averaged_model(const MultiscaleSpec& spec);

/// N^eps from effective_generator on L^eps and its stationary measure.
[[nodiscard]] Generator effective_generator_eps(const MultiscaleSpec& spec);
/// N^eps(y, 1-y) = sum rho^eps(z1|y) G_{y,1-y}(z1, z2), evaluated directly.
[[nodiscard]] Generator effective_generator_eps_direct(const MultiscaleSpec& spec);

/// TV(rho^eps(.|y), rho_y) for y = 0, 1.
[[nodiscard]] std::array<double, 2> conditional_stationary_gap(const MultiscaleSpec& spec);

/// Circulant ring: Q(z, z+1) = r_plus, Q(z, z-1) = r_minus (indices mod n).
[[nodiscard]] Generator birth_death_ring(std::size_t n, double r_plus, double r_minus);

enum class ScenarioId { S1, S2, S3 };

[[nodiscard]] std::string to_string(ScenarioId id);
/// Accepts "S1", "S2", "S3" (case-insensitive).
[[nodiscard]] ScenarioId parse_scenario(const std::string& name);

struct Scenario {
    ScenarioId id;
    MultiscaleSpec spec;  ///< epsilon left at 1
    ProbabilityVector mu0;
    std::vector<std::string> notes;
};

[[nodiscard]] Scenario scenario(ScenarioId id, std::size_t n = 10);

/// Ring blocks with r_plus != r_minus and G_01 = e_{n-1} e_0^T, G_10 = e_{n/2} e_0^T.
/// Its effective generator genuinely depends on eps.
[[nodiscard]] MultiscaleSpec nonreversible_variant(std::size_t n, double epsilon, double r_plus = 1.0,
                                                   double r_minus = 0.3);

}  // namespace ctmc
