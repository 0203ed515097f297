// Command-line front end: stationary, effective, solve, study, verify-bounds.

#include "ctmc/coarse_graining.hpp"
#include "ctmc/dynamics.hpp"
#include "ctmc/experiments.hpp"
#include "ctmc/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <regex>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kVerdictFailure = 4;

bool is_config_error(ctmc::ErrorKind kind) {
    using ctmc::ErrorKind;
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::InvalidSize:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::SpaceMismatch:
        case ErrorKind::UnknownLabel:
        case ErrorKind::NegativeOffDiagonal:
        case ErrorKind::RowSumViolation:
        case ErrorKind::InvalidProbability:
        case ErrorKind::ParseError:
        case ErrorKind::IoError:
            return true;
        default:
            return false;
    }
}

int verify_bounds(const std::filesystem::path& dir, bool strict) {
    if (!std::filesystem::is_directory(dir)) {
        throw ctmc::Error(ctmc::ErrorKind::IoError, fmt::format("{} is not a directory", dir.string()));
    }
    std::vector<std::filesystem::path> files;
    const std::regex pattern(R"(bounds_(offset_)?eps_.*\.json)");
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (std::regex_match(entry.path().filename().string(), pattern)) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ctmc::Error(ctmc::ErrorKind::IoError, "no bound reports found");

    // S3-style studies certify through the offset reports only.
    bool has_offset = false;
    for (const auto& f : files) has_offset = has_offset || f.filename().string().rfind("bounds_offset_", 0) == 0;

    bool all_ok = true;
    for (const auto& f : files) {
        const auto j = ctmc::io::read_json_file(f);
        const bool verdict = j.at("verdict").get<bool>();
        const bool counted = !has_offset || f.filename().string().rfind("bounds_offset_", 0) == 0;
        std::size_t failing = 0;
        for (const auto& v : j.at("verdict_points")) failing += v.get<bool>() ? 0 : 1;
        fmt::print("{} {} failing_points={}{}\n", verdict ? "PASS" : "FAIL", f.filename().string(), failing,
                   counted ? "" : " (informational)");
        if (counted) all_ok = all_ok && verdict;
    }
    return (strict && !all_ok) ? kVerdictFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coarse-graining and effective dynamics for finite Markov chains"};
    app.require_subcommand(1);

    std::string generator_path, map_path, mu0_path, grid_kind = "refined", scenario_name = "S1", out_dir, study_dir;
    double horizon = 20.0;
    std::size_t steps = 2000, n = 10;
    std::vector<double> epsilons{1.0, 1e-1, 1e-2, 1e-3, 1e-4};
    std::optional<double> alpha;
    bool strict = false, unmatched = false;
    std::uint64_t seed = 20210607;

    auto* stationary = app.add_subcommand("stationary", "Stationary measure of a generator");
    stationary->add_option("generator", generator_path, "Generator JSON")->required();

    auto* effective = app.add_subcommand("effective", "Effective generator for a coarse-graining map");
    effective->add_option("generator", generator_path, "Generator JSON")->required();
    effective->add_option("map", map_path, "Coarse-graining map JSON")->required();

    auto* solve = app.add_subcommand("solve", "Forward equation on a time grid; CSV to stdout");
    solve->add_option("generator", generator_path, "Generator JSON")->required();
    solve->add_option("mu0", mu0_path, "Initial probability vector JSON")->required();
    solve->add_option("--T", horizon, "Horizon")->check(CLI::PositiveNumber);
    solve->add_option("--grid", grid_kind, "refined or uniform")->check(CLI::IsMember({"refined", "uniform"}));
    solve->add_option("--steps", steps, "Uniform steps")->check(CLI::PositiveNumber);

    auto* study = app.add_subcommand("study", "Epsilon sweep with bounds and rate fit");
    study->add_option("--scenario", scenario_name, "S1, S2, S3 or a MultiscaleSpec JSON path");
    study->add_option("--n", n, "Fast block size")->check(CLI::Range(2, 100000));
    study->add_option("--eps", epsilons, "Epsilon values, descending")->expected(1, -1);
    study->add_option("--T", horizon, "Horizon")->check(CLI::PositiveNumber);
    study->add_option("--grid", grid_kind, "refined or uniform")->check(CLI::IsMember({"refined", "uniform"}));
    study->add_option("--steps", steps, "Uniform steps")->check(CLI::PositiveNumber);
    study->add_option("--alpha", alpha, "Fixed fast-block LSI constant instead of the estimate");
    study->add_option("--seed", seed, "Seed for the LSI estimator");
    study->add_option("--mu0", mu0_path, "Initial datum JSON for spec-file scenarios");
    study->add_flag("--unmatched", unmatched, "Start the effective dynamics at equilibrium");
    study->add_option("--out", out_dir, "Output directory")->required();
    study->add_flag("--strict", strict, "Exit 4 when a bound verdict fails");

    auto* verify = app.add_subcommand("verify-bounds", "Check verdicts in a study directory");
    verify->add_option("dir", study_dir, "Study output directory")->required();
    verify->add_flag("--strict", strict, "Exit 4 when a bound verdict fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*stationary) {
            const auto L = ctmc::io::generator_from_json(ctmc::io::read_json_file(generator_path));
            std::cout << ctmc::io::to_json(ctmc::stationary_measure(L)).dump(2) << '\n';
        } else if (*effective) {
            const auto L = ctmc::io::generator_from_json(ctmc::io::read_json_file(generator_path));
            const auto xi = ctmc::io::map_from_json(ctmc::io::read_json_file(map_path));
            const auto N = ctmc::effective_generator(L, ctmc::stationary_measure(L), xi);
            std::cout << ctmc::io::to_json(N).dump(2) << '\n';
        } else if (*solve) {
            const auto L = ctmc::io::generator_from_json(ctmc::io::read_json_file(generator_path));
            const auto mu0 = ctmc::io::probability_from_json(ctmc::io::read_json_file(mu0_path));
            const auto grid = grid_kind == "uniform" ? ctmc::TimeGrid::uniform(horizon, steps)
                                                     : ctmc::TimeGrid::refined_near_zero(horizon, 1e-6, 1.2, steps);
            std::cout << ctmc::io::trajectory_csv(ctmc::solve_constant(L, mu0, grid));
        } else if (*study) {
            ctmc::StudyConfig config;
            try {
                config.scenario = ctmc::parse_scenario(scenario_name);
            } catch (const ctmc::Error&) {
                config.scenario = std::filesystem::path(scenario_name);
            }
            config.n = n;
            config.epsilons = epsilons;
            config.horizon = horizon;
            config.grid = grid_kind == "uniform" ? ctmc::GridPolicy::Uniform : ctmc::GridPolicy::RefinedNearZero;
            config.uniform_steps = steps;
            config.fixed_alpha = alpha;
            config.seed = seed;
            config.matched_initial = !unmatched;
            if (!mu0_path.empty()) config.mu0 = ctmc::io::probability_from_json(ctmc::io::read_json_file(mu0_path));

            const auto result = ctmc::run_study(config);
            ctmc::emit(result, out_dir);
            bool verdicts = true, numerical_failure = false;
            for (const auto& r : result.report.records) {
                if (r.error) {
                    numerical_failure = true;
                    fmt::print("eps={} error: {}\n", ctmc::epsilon_tag(r.epsilon), *r.error);
                    continue;
                }
                verdicts = verdicts && r.verdict;
                fmt::print("eps={} sup_H={:.6g} t_argmax={:.6g} verdict={}\n", ctmc::epsilon_tag(r.epsilon), r.sup_h,
                           r.t_argmax, r.verdict);
            }
            const auto& fit = result.report.fit;
            fmt::print("slope={}\n", fit.slope ? fmt::format("{:.6g}", *fit.slope) : fit.status);
            if (numerical_failure) return kNumericalError;
            if (strict && !verdicts) return kVerdictFailure;
        } else if (*verify) {
            return verify_bounds(study_dir, strict);
        }
    } catch (const ctmc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_config_error(e.kind()) ? kConfigError : kNumericalError;
    }
    return 0;
}
