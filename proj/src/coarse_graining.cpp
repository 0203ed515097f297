#include "ctmc/coarse_graining.hpp"

#include <fmt/format.h>

#include <cmath>

namespace ctmc {

CoarseGrainingMap::CoarseGrainingMap(StateSpace fine, StateSpace coarse, std::vector<std::size_t> assignment)
    : fine_(std::move(fine)), coarse_(std::move(coarse)), assignment_(std::move(assignment)) {
    if (assignment_.size() != fine_.size()) {
        throw Error(ErrorKind::DimensionMismatch, "assignment must cover every fine state");
    }
    level_sets_.resize(coarse_.size());
    for (std::size_t x = 0; x < assignment_.size(); ++x) {
        if (assignment_[x] >= coarse_.size()) {
            throw Error(ErrorKind::UnknownLabel, fmt::format("fine state {} maps outside the coarse space", x));
        }
        level_sets_[assignment_[x]].push_back(x);
    }
    level_spaces_.reserve(coarse_.size());
    for (std::size_t y = 0; y < coarse_.size(); ++y) {
        if (level_sets_[y].empty()) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("coarse state '{}' has an empty level set", coarse_.label(y)));
        }
        std::vector<std::string> labels;
        for (auto x : level_sets_[y]) labels.push_back(fine_.label(x));
        level_spaces_.emplace_back(std::move(labels));
    }
}

CoarseGrainingMap CoarseGrainingMap::from_indices(StateSpace fine, StateSpace coarse,
                                                  std::vector<std::size_t> assignment) {
    return CoarseGrainingMap(std::move(fine), std::move(coarse), std::move(assignment));
}

CoarseGrainingMap CoarseGrainingMap::from_labels(StateSpace fine, StateSpace coarse,
                                                 const std::map<std::string, std::string>& assignment) {
    std::vector<std::size_t> indices(fine.size());
    for (std::size_t x = 0; x < fine.size(); ++x) {
        auto it = assignment.find(fine.label(x));
        if (it == assignment.end()) {
            throw Error(ErrorKind::UnknownLabel, fmt::format("fine state '{}' is not assigned", fine.label(x)));
        }
        auto y = coarse.index_of(it->second);
        if (!y) throw Error(ErrorKind::UnknownLabel, fmt::format("unknown coarse state '{}'", it->second));
        indices[x] = *y;
    }
    if (assignment.size() != fine.size()) {
        throw Error(ErrorKind::UnknownLabel, "assignment names states outside the fine space");
    }
    return CoarseGrainingMap(std::move(fine), std::move(coarse), std::move(indices));
}

CoarseGrainingMap CoarseGrainingMap::identity(const StateSpace& space) {
    std::vector<std::size_t> indices(space.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    return CoarseGrainingMap(space, space, std::move(indices));
}

namespace {

void require_fine(const ProbabilityVector& nu, const CoarseGrainingMap& xi) {
    if (!(nu.space() == xi.fine())) {
        throw Error(ErrorKind::SpaceMismatch, "measure does not live on the fine space of the map");
    }
}

void require_fine(const Generator& L, const CoarseGrainingMap& xi) {
    if (!(L.space() == xi.fine())) {
        throw Error(ErrorKind::SpaceMismatch, "generator does not live on the fine space of the map");
    }
}

Vector marginal_mass(const Vector& nu, const CoarseGrainingMap& xi) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(xi.coarse().size()));
    for (std::size_t x = 0; x < xi.assignment().size(); ++x) {
        out(static_cast<Eigen::Index>(xi.image(x))) += nu(static_cast<Eigen::Index>(x));
    }
    return out;
}

// Averages L over level sets with weights w(x1) = conditional of x1 on its level set.
Matrix lumped_rates(const Matrix& L, const Vector& weights, const CoarseGrainingMap& xi) {
    const auto m = static_cast<Eigen::Index>(xi.coarse().size());
    Matrix out = Matrix::Zero(m, m);
    const auto n = L.rows();
    for (Eigen::Index x1 = 0; x1 < n; ++x1) {
        const auto y1 = static_cast<Eigen::Index>(xi.image(static_cast<std::size_t>(x1)));
        const double w = weights(x1);
        if (w == 0.0) continue;
        for (Eigen::Index x2 = 0; x2 < n; ++x2) {
            if (x2 == x1) continue;
            const auto y2 = static_cast<Eigen::Index>(xi.image(static_cast<std::size_t>(x2)));
            if (y2 != y1) out(y1, y2) += L(x1, x2) * w;
        }
    }
    for (Eigen::Index y = 0; y < m; ++y) {
        double off = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (k != y) off += out(y, k);
        }
        out(y, y) = -off;
    }
    return out;
}

Vector conditional_weights(const Vector& nu, const CoarseGrainingMap& xi) {
    const Vector marginal = marginal_mass(nu, xi);
    Vector w(nu.size());
    for (Eigen::Index x = 0; x < nu.size(); ++x) {
        const double m = marginal(static_cast<Eigen::Index>(xi.image(static_cast<std::size_t>(x))));
        if (!(m > 0.0)) {
            throw Error(ErrorKind::UndefinedConditional,
                        fmt::format("coarse state '{}' has zero mass",
                                    xi.coarse().label(xi.image(static_cast<std::size_t>(x)))));
        }
        w(x) = nu(x) / m;
    }
    return w;
}

}  // namespace

ProbabilityVector push_forward(const ProbabilityVector& nu, const CoarseGrainingMap& xi) {
    require_fine(nu, xi);
    return ProbabilityVector::from_mass(xi.coarse(), marginal_mass(nu.mass(), xi));
}

Disintegration disintegrate(const ProbabilityVector& nu, const CoarseGrainingMap& xi) {
    auto marginal = push_forward(nu, xi);
    std::vector<std::optional<ProbabilityVector>> conditionals;
    conditionals.reserve(xi.coarse().size());
    for (std::size_t y = 0; y < xi.coarse().size(); ++y) {
        const double m = marginal[y];
        if (!(m > 0.0)) {
            conditionals.emplace_back(std::nullopt);
            continue;
        }
        const auto& level = xi.level_set(y);
        Vector cond(static_cast<Eigen::Index>(level.size()));
        for (std::size_t k = 0; k < level.size(); ++k) cond(static_cast<Eigen::Index>(k)) = nu[level[k]] / m;
        conditionals.emplace_back(ProbabilityVector::normalized(xi.level_space(y), std::move(cond)));
    }
    return Disintegration{std::move(marginal), std::move(conditionals)};
}

Generator cg_generator(const Generator& L, const ProbabilityVector& mu, const CoarseGrainingMap& xi) {
    require_fine(L, xi);
    require_fine(mu, xi);
    const Vector w = conditional_weights(mu.mass(), xi);
    return validate_generator(lumped_rates(L.rates(), w, xi), xi.coarse());
}

Generator effective_generator(const Generator& L, const ProbabilityVector& rho, const CoarseGrainingMap& xi) {
    require_fine(L, xi);
    require_fine(rho, xi);
    const double residual = stationarity_residual(L, rho);
    if (residual > 1e-8) {
        throw Error(ErrorKind::NotStationary, fmt::format("max |L^T rho| = {}", residual));
    }
    if (!rho.strictly_positive()) {
        throw Error(ErrorKind::NonPositiveMeasure, "stationary measure must be strictly positive");
    }
    const Vector w = conditional_weights(rho.mass(), xi);
    return validate_generator(lumped_rates(L.rates(), w, xi), xi.coarse());
}

Generator LevelRestriction::closest_generator() const {
    Matrix repaired = block;
    for (Eigen::Index i = 0; i < repaired.rows(); ++i) {
        repaired(i, i) = 0.0;
        repaired(i, i) = -repaired.row(i).sum();
    }
    return validate_generator(std::move(repaired), space);
}

LevelRestriction restrict_to_level(const Generator& L, const CoarseGrainingMap& xi, std::size_t coarse_index) {
    require_fine(L, xi);
    if (coarse_index >= xi.coarse().size()) {
        throw Error(ErrorKind::UnknownLabel, fmt::format("coarse index {} out of range", coarse_index));
    }
    const auto& level = xi.level_set(coarse_index);
    const auto k = static_cast<Eigen::Index>(level.size());
    Matrix block(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            block(i, j) = L.rates()(static_cast<Eigen::Index>(level[static_cast<std::size_t>(i)]),
                                    static_cast<Eigen::Index>(level[static_cast<std::size_t>(j)]));
        }
    }
    const bool generator_like = block.rowwise().sum().cwiseAbs().maxCoeff() <= tol::row_sum;
    return LevelRestriction{std::move(block), xi.level_space(coarse_index), generator_like};
}

LevelRestriction restrict_to_level(const Generator& L, const CoarseGrainingMap& xi, const std::string& coarse_label) {
    auto y = xi.coarse().index_of(coarse_label);
    if (!y) throw Error(ErrorKind::UnknownLabel, fmt::format("unknown coarse state '{}'", coarse_label));
    return restrict_to_level(L, xi, *y);
}

}  // namespace ctmc
