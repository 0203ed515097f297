#pragma once

// Epsilon sweeps over the multiscale family: per-eps pipelines, log-log rate
// fits, and the files they produce.

#include "ctmc/dynamics.hpp"
#include "ctmc/error_bounds.hpp"
#include "ctmc/multiscale.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ctmc {

enum class GridPolicy { RefinedNearZero, Uniform };

struct StudyConfig {
    /// Preset name or a spec file.
    std::variant<ScenarioId, std::filesystem::path> scenario = ScenarioId::S1;
    std::size_t n = 10;
    std::vector<double> epsilons{1.0, 1e-1, 1e-2, 1e-3, 1e-4};
    double horizon = 20.0;
    GridPolicy grid = GridPolicy::RefinedNearZero;
    std::size_t uniform_steps = 2000;
    /// Empty means estimate the fast-block LSI constant per eps.
    std::optional<double> fixed_alpha;
    std::uint64_t seed = 20210607;
    std::vector<double> fit_window{1.0, 1e-1, 1e-2, 1e-3};
    /// Start of the certified interval in offset mode. Used for initial data
    /// that are not strictly positive.
    double offset = 0.1;
    /// Initial datum for spec-file studies; defaults to uniform.
    std::optional<ProbabilityVector> mu0;
    /// false replaces the effective initial datum by xi#rho.
    bool matched_initial = true;
    /// 0 means CTMC_LUMPER_THREADS or the hardware concurrency.
    std::size_t threads = 0;
};

/// Throws InvalidArgument unless epsilons are nonempty, positive and sorted descending.
void validate_config(const StudyConfig& config);

struct EpsilonRecord {
    double epsilon = 0.0;
    double sup_h = 0.0;
    double t_argmax = 0.0;
    double h_final = 0.0;
    bool verdict = false;
    double alpha_q = 0.0;
    double cg_ode_tv = 0.0;        ///< max TV between the ODE and projection routes
    double effective_residual = 0.0;  ///< max |N^T xi#rho|
    std::optional<std::string> error;
};

struct RateFit {
    std::optional<double> slope;  ///< empty when fewer than two points are usable
    std::vector<double> window;
    std::string status;
};

struct ConvergenceReport {
    std::string scenario;
    std::size_t n = 0;
    double horizon = 0.0;
    std::vector<EpsilonRecord> records;
    RateFit fit;
    std::vector<std::string> notes;
};

struct EpsilonRun {
    double epsilon = 0.0;
    std::optional<Trajectory> full;
    std::optional<Trajectory> cg;
    std::optional<Trajectory> eff;
    std::optional<BoundReport> bounds;
    std::optional<BoundReport> offset_bounds;
};

struct StudyResult {
    ConvergenceReport report;
    std::vector<EpsilonRun> runs;  ///< same order as the config's epsilons
};

[[nodiscard]] StudyResult run_study(const StudyConfig& config);

/// Least-squares slope of log value against log eps over the points whose eps
/// is in window (matched to 1e-12 relative). Throws InsufficientPoints below
/// two points and NonPositiveValue on a value <= 0.
[[nodiscard]] double fit_rate(const std::vector<std::pair<double, double>>& points, const std::vector<double>& window);

/// Writes trajectories, bounds, report and plot data into dir.
void emit(const StudyResult& result, const std::filesystem::path& dir);

/// File-name tag for eps, e.g. "1e-03".
[[nodiscard]] std::string epsilon_tag(double epsilon);

/// Worker count from CTMC_LUMPER_THREADS, else hardware concurrency, at least 1.
[[nodiscard]] std::size_t default_thread_count();

}  // namespace ctmc
