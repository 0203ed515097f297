#include "ctmc/multiscale.hpp"

#include "ctmc/functionals.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace ctmc {

namespace {

Eigen::Index at(std::size_t y, std::size_t z, std::size_t n) { return static_cast<Eigen::Index>(y * n + z); }

std::array<ProbabilityVector, 2> fine_conditionals(const ProbabilityVector& rho, std::size_t n) {
    const auto parts = disintegrate(rho, slow_projection(n));
    if (!parts.conditionals[0] || !parts.conditionals[1]) {
        throw Error(ErrorKind::UndefinedConditional, "stationary measure misses a macro state");
    }
    // Relabel onto {0..n-1} so they compare with the block stationaries.
    const auto inner = StateSpace::indexed(n);
    return {ProbabilityVector::from_mass(inner, parts.conditionals[0]->mass()),
            ProbabilityVector::from_mass(inner, parts.conditionals[1]->mass())};
}

}  // namespace

void validate_spec(const MultiscaleSpec& spec) {
    if (spec.n < 2) throw Error(ErrorKind::InvalidSize, "fast blocks need at least two states");
    if (!(spec.epsilon > 0.0) || !std::isfinite(spec.epsilon)) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("epsilon must be positive, got {}", spec.epsilon));
    }
    const auto n = static_cast<Eigen::Index>(spec.n);
    for (std::size_t y = 0; y < 2; ++y) {
        if (spec.q[y].rates().rows() != n) {
            throw Error(ErrorKind::DimensionMismatch, fmt::format("Q_{} is not {}x{}", y, n, n));
        }
        if (!is_irreducible(spec.q[y])) throw Error(ErrorKind::NotIrreducible, fmt::format("Q_{} is reducible", y));
        const auto& g = spec.g[y];
        if (g.rows() != n || g.cols() != n) {
            throw Error(ErrorKind::DimensionMismatch, fmt::format("coupling block {} is not {}x{}", y, n, n));
        }
        if (!g.allFinite() || g.minCoeff() < 0.0) {
            throw Error(ErrorKind::NegativeOffDiagonal, fmt::format("coupling block {} has a negative entry", y));
        }
    }
}

MultiscaleSpec with_epsilon(MultiscaleSpec spec, double epsilon) {
    spec.epsilon = epsilon;
    validate_spec(spec);
    return spec;
}

StateSpace multiscale_space(std::size_t n) { return StateSpace::product(StateSpace::indexed(2), StateSpace::indexed(n)); }

CoarseGrainingMap slow_projection(std::size_t n) {
    std::vector<std::size_t> assignment(2 * n);
    for (std::size_t x = 0; x < assignment.size(); ++x) assignment[x] = x / n;
    return CoarseGrainingMap::from_indices(multiscale_space(n), StateSpace::indexed(2), std::move(assignment));
}

Generator build_l_eps(const MultiscaleSpec& spec) {
    validate_spec(spec);
    const std::size_t n = spec.n;
    const auto size = static_cast<Eigen::Index>(2 * n);
    Matrix l = Matrix::Zero(size, size);
    const double inv = 1.0 / spec.epsilon;
    for (std::size_t y = 0; y < 2; ++y) {
        const std::size_t other = 1 - y;
        const Matrix& q = spec.q[y].rates();
        const Matrix& g = spec.g[y];
        for (std::size_t z1 = 0; z1 < n; ++z1) {
            for (std::size_t z2 = 0; z2 < n; ++z2) {
                const auto i1 = static_cast<Eigen::Index>(z1);
                const auto i2 = static_cast<Eigen::Index>(z2);
                l(at(y, z1, n), at(y, z2, n)) += inv * q(i1, i2);
                l(at(y, z1, n), at(other, z2, n)) += g(i1, i2);
            }
            l(at(y, z1, n), at(y, z1, n)) -= g.row(static_cast<Eigen::Index>(z1)).sum();
        }
    }
    return validate_generator(std::move(l), multiscale_space(n));
}

AveragedModel averaged_model(const MultiscaleSpec& spec) {
    validate_spec(spec);
    std::array<ProbabilityVector, 2> rho{stationary_measure(spec.q[0]), stationary_measure(spec.q[1])};
    std::array<double, 2> lambda{};
    for (std::size_t y = 0; y < 2; ++y) lambda[y] = rho[y].mass().dot(spec.g[y].rowwise().sum());
    Matrix av(2, 2);
    av << -lambda[0], lambda[0], lambda[1], -lambda[1];
    return AveragedModel{lambda[0], lambda[1], validate_generator(std::move(av), StateSpace::indexed(2)),
                         std::move(rho)};
}

Generator effective_generator_eps(const MultiscaleSpec& spec) {
    const auto l = build_l_eps(spec);
    return effective_generator(l, stationary_measure(l), slow_projection(spec.n));
}

Generator effective_generator_eps_direct(const MultiscaleSpec& spec) {
    const auto l = build_l_eps(spec);
    const auto cond = fine_conditionals(stationary_measure(l), spec.n);
    std::array<double, 2> rate{};
    for (std::size_t y = 0; y < 2; ++y) rate[y] = cond[y].mass().dot(spec.g[y].rowwise().sum());
    Matrix nm(2, 2);
    nm << -rate[0], rate[0], rate[1], -rate[1];
    return validate_generator(std::move(nm), StateSpace::indexed(2));
}

std::array<double, 2> conditional_stationary_gap(const MultiscaleSpec& spec) {
    const auto l = build_l_eps(spec);
    const auto cond = fine_conditionals(stationary_measure(l), spec.n);
    return {total_variation(cond[0], stationary_measure(spec.q[0])),
            total_variation(cond[1], stationary_measure(spec.q[1]))};
}

Generator birth_death_ring(std::size_t n, double r_plus, double r_minus) {
    if (n < 2) throw Error(ErrorKind::InvalidSize, fmt::format("ring needs n >= 2, got {}", n));
    if (!(r_plus > 0.0) || !(r_minus > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "ring rates must be positive");
    }
    const auto size = static_cast<Eigen::Index>(n);
    Matrix q = Matrix::Zero(size, size);
    for (Eigen::Index z = 0; z < size; ++z) {
        q(z, (z + 1) % size) += r_plus;
        q(z, (z + size - 1) % size) += r_minus;
        q(z, z) = -(r_plus + r_minus);
    }
    return validate_generator(std::move(q), StateSpace::indexed(n));
}

std::string to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::S1: return "S1";
        case ScenarioId::S2: return "S2";
        case ScenarioId::S3: return "S3";
    }
    return "?";
}

ScenarioId parse_scenario(const std::string& name) {
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "S1") return ScenarioId::S1;
    if (upper == "S2") return ScenarioId::S2;
    if (upper == "S3") return ScenarioId::S3;
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown scenario '{}'", name));
}

Scenario scenario(ScenarioId id, std::size_t n) {
    if (n < 2) throw Error(ErrorKind::InvalidSize, fmt::format("scenario needs n >= 2, got {}", n));
    const double r_minus = id == ScenarioId::S2 ? 0.1 : 1.0;
    const auto ring = birth_death_ring(n, 1.0, r_minus);
    const auto size = static_cast<Eigen::Index>(n);
    Matrix g = Matrix::Zero(size, size);
    g(size - 1, 0) = 1.0;
    g(0, size - 1) = 1.0;
    MultiscaleSpec spec{n, {ring, ring}, {g, g}, 1.0};

    const auto space = multiscale_space(n);
    Vector w = Vector::Zero(static_cast<Eigen::Index>(2 * n));
    std::vector<std::string> notes;
    if (id == ScenarioId::S3) {
        w(at(0, 0, n)) = 1.0;
        w(at(1, 0, n)) = 0.3;
        notes.emplace_back("initial datum normalized to mass (10/13, 3/13) on (0,0) and (1,0)");
    } else {
        w.setConstant(0.1);
        w(at(0, 0, n)) += 1.0;
        w(at(1, 0, n)) += 0.3;
        notes.emplace_back("initial datum: 0.1 added to every state before normalization");
    }
    return Scenario{id, std::move(spec), ProbabilityVector::normalized(space, std::move(w)), std::move(notes)};
}

MultiscaleSpec nonreversible_variant(std::size_t n, double epsilon, double r_plus, double r_minus) {
    const auto ring = birth_death_ring(n, r_plus, r_minus);
    const auto size = static_cast<Eigen::Index>(n);
    Matrix g01 = Matrix::Zero(size, size);
    Matrix g10 = Matrix::Zero(size, size);
    g01(size - 1, 0) = 1.0;
    g10(size / 2, 0) = 1.0;
    MultiscaleSpec spec{n, {ring, ring}, {std::move(g01), std::move(g10)}, epsilon};
    validate_spec(spec);
    return spec;
}

}  // namespace ctmc
