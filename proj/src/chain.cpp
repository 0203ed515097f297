#include "ctmc/chain.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace ctmc {

StateSpace::StateSpace(std::vector<std::string> labels) {
    if (labels.empty()) {
        throw Error(ErrorKind::InvalidSize, "state space needs at least one label");
    }
    Data data;
    data.index.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!data.index.emplace(labels[i], i).second) {
            throw Error(ErrorKind::InvalidArgument, fmt::format("duplicate state label '{}'", labels[i]));
        }
    }
    data.labels = std::move(labels);
    data_ = std::make_shared<const Data>(std::move(data));
}

StateSpace StateSpace::indexed(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return StateSpace(std::move(labels));
}

StateSpace StateSpace::product(const StateSpace& outer, const StateSpace& inner) {
    std::vector<std::string> labels;
    labels.reserve(outer.size() * inner.size());
    for (const auto& a : outer.labels()) {
        for (const auto& b : inner.labels()) labels.push_back(fmt::format("({},{})", a, b));
    }
    return StateSpace(std::move(labels));
}

std::optional<std::size_t> StateSpace::index_of(const std::string& label) const {
    auto it = data_->index.find(label);
    if (it == data_->index.end()) return std::nullopt;
    return it->second;
}

bool operator==(const StateSpace& a, const StateSpace& b) noexcept {
    return a.data_ == b.data_ || a.data_->labels == b.data_->labels;
}

Generator validate_generator(Matrix rates, StateSpace space, double tol_row) {
    const auto n = static_cast<Eigen::Index>(space.size());
    if (rates.rows() != rates.cols() || rates.rows() != n) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("rate matrix is {}x{}, state space has {} states", rates.rows(), rates.cols(), n));
    }
    if (!rates.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "rate matrix contains NaN or Inf");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            if (rates(i, j) < 0.0) {
                throw Error(ErrorKind::NegativeOffDiagonal,
                            fmt::format("rate({}, {}) = {} < 0", i, j, rates(i, j)));
            }
            off += rates(i, j);
        }
        const double residual = off + rates(i, i);
        if (std::abs(residual) > tol_row) {
            throw Error(ErrorKind::RowSumViolation, fmt::format("row {} sums to {}", i, residual));
        }
        rates(i, i) = -off;
    }
    return Generator(std::move(space), std::move(rates));
}

Generator validate_generator(Matrix rates) {
    auto space = StateSpace::indexed(static_cast<std::size_t>(rates.rows()));
    return validate_generator(std::move(rates), std::move(space));
}

ProbabilityVector ProbabilityVector::from_mass(StateSpace space, Vector mass, double tol_prob) {
    if (mass.size() != static_cast<Eigen::Index>(space.size())) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("mass has {} entries, state space has {}", mass.size(), space.size()));
    }
    if (!mass.allFinite()) {
        throw Error(ErrorKind::InvalidProbability, "mass contains NaN or Inf");
    }
    for (Eigen::Index i = 0; i < mass.size(); ++i) {
        if (mass(i) < -tol_prob) {
            throw Error(ErrorKind::InvalidProbability, fmt::format("mass[{}] = {} is negative", i, mass(i)));
        }
        if (mass(i) < 0.0) mass(i) = 0.0;
    }
    const double total = mass.sum();
    if (std::abs(total - 1.0) > tol_prob) {
        throw Error(ErrorKind::InvalidProbability, fmt::format("mass sums to {}", total));
    }
    return ProbabilityVector(std::move(space), std::move(mass));
}

ProbabilityVector ProbabilityVector::normalized(StateSpace space, Vector weights, double tol_prob) {
    if (weights.size() != static_cast<Eigen::Index>(space.size())) {
        throw Error(ErrorKind::DimensionMismatch, "weight vector does not match state space");
    }
    if (!weights.allFinite() || weights.minCoeff() < -tol_prob) {
        throw Error(ErrorKind::InvalidProbability, "weights must be finite and nonnegative");
    }
    weights = weights.cwiseMax(0.0);
    const double total = weights.sum();
    if (!(total > 0.0)) {
        throw Error(ErrorKind::InvalidProbability, "weights have zero total mass");
    }
    weights /= total;
    return ProbabilityVector(std::move(space), std::move(weights));
}

ProbabilityVector ProbabilityVector::uniform(StateSpace space) {
    const auto n = static_cast<Eigen::Index>(space.size());
    return ProbabilityVector(std::move(space), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

ProbabilityVector ProbabilityVector::dirac(StateSpace space, std::size_t at) {
    if (at >= space.size()) throw Error(ErrorKind::InvalidArgument, "dirac location out of range");
    Vector mass = Vector::Zero(static_cast<Eigen::Index>(space.size()));
    mass(static_cast<Eigen::Index>(at)) = 1.0;
    return ProbabilityVector(std::move(space), std::move(mass));
}

namespace {

std::vector<bool> reachable_from(const Matrix& rates, Eigen::Index start, bool reverse) {
    const auto n = rates.rows();
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<Eigen::Index> frontier;
    frontier.push(start);
    seen[static_cast<std::size_t>(start)] = true;
    while (!frontier.empty()) {
        const auto x = frontier.front();
        frontier.pop();
        for (Eigen::Index y = 0; y < n; ++y) {
            const double rate = reverse ? rates(y, x) : rates(x, y);
            if (y != x && rate > 0.0 && !seen[static_cast<std::size_t>(y)]) {
                seen[static_cast<std::size_t>(y)] = true;
                frontier.push(y);
            }
        }
    }
    return seen;
}

}  // namespace

bool is_irreducible(const Generator& L) {
    // Strongly connected iff every state is reachable from state 0 in both
    // the edge digraph and its reverse.
    const auto forward = reachable_from(L.rates(), 0, false);
    const auto backward = reachable_from(L.rates(), 0, true);
    return std::all_of(forward.begin(), forward.end(), [](bool b) { return b; }) &&
           std::all_of(backward.begin(), backward.end(), [](bool b) { return b; });
}

double row_sum_norm(const Matrix& a) {
    return a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

double stationarity_residual(const Generator& L, const ProbabilityVector& rho) {
    return (L.rates().transpose() * rho.mass()).cwiseAbs().maxCoeff();
}

ProbabilityVector stationary_measure(const Generator& L) {
    if (!is_irreducible(L)) {
        throw Error(ErrorKind::NotIrreducible, "stationary measure requires an irreducible generator");
    }
    const auto n = static_cast<Eigen::Index>(L.size());
    // Normalisation row scaled to the size of L so the stacked system stays balanced.
    const double scale = std::max(1.0, row_sum_norm(L.rates()));
    Matrix system(n + 1, n);
    system.topRows(n) = L.rates().transpose();
    system.row(n).setConstant(scale);
    Vector rhs = Vector::Zero(n + 1);
    rhs(n) = scale;
    Vector rho = system.colPivHouseholderQr().solve(rhs);
    // One refinement step removes most of the residual left by the factorisation.
    const Vector correction = system.colPivHouseholderQr().solve(rhs - system * rho);
    rho += correction;
    if (!rho.allFinite() || rho.minCoeff() <= 0.0) {
        throw Error(ErrorKind::SolveFailure, "stationary solve produced a non-positive vector");
    }
    rho /= rho.sum();
    return ProbabilityVector::from_mass(L.space(), std::move(rho));
}

bool check_detailed_balance(const Generator& L, const ProbabilityVector& rho, double tol) {
    if (!(rho.space() == L.space())) {
        throw Error(ErrorKind::DimensionMismatch, "measure and generator live on different spaces");
    }
    const auto n = static_cast<Eigen::Index>(L.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double flux = rho.mass()(i) * L.rates()(i, j);
            const double back = rho.mass()(j) * L.rates()(j, i);
            if (std::abs(flux - back) > tol) return false;
        }
    }
    return true;
}

double spectral_gap(const Generator& L) {
    if (L.size() < 2) throw Error(ErrorKind::InvalidSize, "spectral gap needs at least two states");
    Eigen::EigenSolver<Matrix> solver(L.rates(), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenFailure, "eigenvalue computation did not converge");
    }
    const auto& values = solver.eigenvalues();
    Eigen::Index zero = 0;
    for (Eigen::Index k = 1; k < values.size(); ++k) {
        if (std::abs(values(k)) < std::abs(values(zero))) zero = k;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (k != zero) best = std::max(best, values(k).real());
    }
    return -best;
}

}  // namespace ctmc
