#pragma once

// Coarse-graining maps, disintegration of measures, and the coarse-grained
// and effective generators they induce.

#include "ctmc/chain.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctmc {

/// Surjective map from fine states to coarse states with precomputed level sets.
class CoarseGrainingMap {
public:
    /// assignment[i] is the coarse index of fine state i.
    static CoarseGrainingMap from_indices(StateSpace fine, StateSpace coarse, std::vector<std::size_t> assignment);
    static CoarseGrainingMap from_labels(StateSpace fine, StateSpace coarse,
                                         const std::map<std::string, std::string>& assignment);
    static CoarseGrainingMap identity(const StateSpace& space);

    [[nodiscard]] const StateSpace& fine() const noexcept { return fine_; }
    [[nodiscard]] const StateSpace& coarse() const noexcept { return coarse_; }
    [[nodiscard]] std::size_t image(std::size_t fine_index) const { return assignment_.at(fine_index); }
    [[nodiscard]] const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
    /// Fine indices in fine-label order.
    [[nodiscard]] const std::vector<std::size_t>& level_set(std::size_t coarse_index) const {
        return level_sets_.at(coarse_index);
    }
    /// State space of a level set, labelled with the fine labels.
    [[nodiscard]] const StateSpace& level_space(std::size_t coarse_index) const {
        return level_spaces_.at(coarse_index);
    }

private:
    CoarseGrainingMap(StateSpace fine, StateSpace coarse, std::vector<std::size_t> assignment);

    StateSpace fine_;
    StateSpace coarse_;
    std::vector<std::size_t> assignment_;
    std::vector<std::vector<std::size_t>> level_sets_;
    std::vector<StateSpace> level_spaces_;
};

struct Disintegration {
    ProbabilityVector marginal;
    /// nu(.|y) on the level set of y; empty where the marginal vanishes.
    std::vector<std::optional<ProbabilityVector>> conditionals;
};

[[nodiscard]] ProbabilityVector push_forward(const ProbabilityVector& nu, const CoarseGrainingMap& xi);
[[nodiscard]] Disintegration disintegrate(const ProbabilityVector& nu, const CoarseGrainingMap& xi);

/// Lhat(y1, y2) = sum_{x1 in y1, x2 in y2} L(x1, x2) mu(x1 | y1).
/// Throws UndefinedConditional if some marginal entry is zero.
[[nodiscard]] Generator cg_generator(const Generator& L, const ProbabilityVector& mu,
                                     const CoarseGrainingMap& xi);

/// Same averaging against the stationary conditionals. Throws NotStationary
/// if max |L^T rho| exceeds 1e-8.
[[nodiscard]] Generator effective_generator(const Generator& L, const ProbabilityVector& rho,
                                            const CoarseGrainingMap& xi);

/// Block L[level_set(y), level_set(y)]. Generally not a generator: rows lose
/// the rates that leave the level set.
struct LevelRestriction {
    Matrix block;
    StateSpace space;
    bool generator_like = false;  ///< true when every row sums to zero within tol::row_sum

    /// The block with its diagonal reset so rows sum to zero.
    [[nodiscard]] Generator closest_generator() const;
};

[[nodiscard]] LevelRestriction restrict_to_level(const Generator& L, const CoarseGrainingMap& xi,
                                                 std::size_t coarse_index);
[[nodiscard]] LevelRestriction restrict_to_level(const Generator& L, const CoarseGrainingMap& xi,
                                                 const std::string& coarse_label);

}  // namespace ctmc
