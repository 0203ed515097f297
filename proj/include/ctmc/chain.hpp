#pragma once

// Generators, probability vectors and structural checks for finite
// continuous-time Markov chains.

#include "ctmc/error.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
inline constexpr double row_sum = 1e-10;
inline constexpr double probability = 1e-12;
inline constexpr double detailed_balance = 1e-10;
inline constexpr double stationary_residual = 1e-10;
}  // namespace tol

/// Ordered set of distinct state labels. Copies share the label storage.
class StateSpace {
public:
    explicit StateSpace(std::vector<std::string> labels);

    /// Labels "0", "1", ..., "n-1".
    static StateSpace indexed(std::size_t n);
    /// Labels "(a,b)" for a in outer, b in inner, outer index varying slowest.
    static StateSpace product(const StateSpace& outer, const StateSpace& inner);

    [[nodiscard]] std::size_t size() const noexcept { return data_->labels.size(); }
    [[nodiscard]] const std::string& label(std::size_t i) const { return data_->labels.at(i); }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return data_->labels; }
    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& label) const;

    friend bool operator==(const StateSpace& a, const StateSpace& b) noexcept;

private:
    struct Data {
        std::vector<std::string> labels;
        std::unordered_map<std::string, std::size_t> index;
    };
    std::shared_ptr<const Data> data_;
};

/// Rate matrix with nonnegative off-diagonal entries and zero row sums.
/// Only obtainable through validate_generator.
class Generator {
public:
    [[nodiscard]] const StateSpace& space() const noexcept { return space_; }
    [[nodiscard]] const Matrix& rates() const noexcept { return rates_; }
    [[nodiscard]] std::size_t size() const noexcept { return space_.size(); }
    [[nodiscard]] double operator()(std::size_t from, std::size_t to) const { return rates_(from, to); }

private:
    Generator(StateSpace space, Matrix rates) : space_(std::move(space)), rates_(std::move(rates)) {}
    friend Generator validate_generator(Matrix rates, StateSpace space, double tol_row);

    StateSpace space_;
    Matrix rates_;
};

/// Checks sign and row-sum conditions. Rows within tol_row of zero get their
/// diagonal reset to minus the off-diagonal sum, so valid output has exactly
/// zero row sums.
Generator validate_generator(Matrix rates, StateSpace space, double tol_row = tol::row_sum);
/// Convenience overload with indexed labels.
Generator validate_generator(Matrix rates);

/// Nonnegative mass vector summing to one. Entries in [-tol, 0) are clamped.
class ProbabilityVector {
public:
    static ProbabilityVector from_mass(StateSpace space, Vector mass, double tol_prob = tol::probability);
    /// Divides by the total first; fails if any entry is negative beyond tol or the total is not positive.
    static ProbabilityVector normalized(StateSpace space, Vector weights, double tol_prob = tol::probability);
    static ProbabilityVector uniform(StateSpace space);
    static ProbabilityVector dirac(StateSpace space, std::size_t at);

    [[nodiscard]] const StateSpace& space() const noexcept { return space_; }
    [[nodiscard]] const Vector& mass() const noexcept { return mass_; }
    [[nodiscard]] std::size_t size() const noexcept { return space_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return mass_(static_cast<Eigen::Index>(i)); }
    [[nodiscard]] double min() const { return mass_.minCoeff(); }
    [[nodiscard]] bool strictly_positive() const { return mass_.minCoeff() > 0.0; }

private:
    ProbabilityVector(StateSpace space, Vector mass) : space_(std::move(space)), mass_(std::move(mass)) {}

    StateSpace space_;
    Vector mass_;
};

/// Strong connectivity of the digraph with an edge x -> x' whenever L(x, x') > 0.
[[nodiscard]] bool is_irreducible(const Generator& L);

/// Unique positive rho with L^T rho = 0, sum rho = 1.
[[nodiscard]] ProbabilityVector stationary_measure(const Generator& L);

[[nodiscard]] bool check_detailed_balance(const Generator& L, const ProbabilityVector& rho,
                                          double tol = tol::detailed_balance);

/// -max Re(lambda) over the nonzero eigenvalues of L.
[[nodiscard]] double spectral_gap(const Generator& L);

/// max_i sum_j |A_ij|
[[nodiscard]] double row_sum_norm(const Matrix& a);

/// max |L^T rho|
[[nodiscard]] double stationarity_residual(const Generator& L, const ProbabilityVector& rho);

}  // namespace ctmc
