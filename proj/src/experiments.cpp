#include "ctmc/experiments.hpp"

#include "ctmc/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace ctmc {

namespace {

struct Setup {
    std::string name;
    MultiscaleSpec spec;
    ProbabilityVector mu0;
    std::vector<std::string> notes;
};

Setup load_setup(const StudyConfig& config) {
    if (const auto* id = std::get_if<ScenarioId>(&config.scenario)) {
        auto s = scenario(*id, config.n);
        return Setup{to_string(*id), std::move(s.spec), std::move(s.mu0), std::move(s.notes)};
    }
    const auto& path = std::get<std::filesystem::path>(config.scenario);
    auto spec = io::multiscale_spec_from_json(io::read_json_file(path));
    auto space = multiscale_space(spec.n);
    std::vector<std::string> notes;
    ProbabilityVector mu0 = ProbabilityVector::uniform(space);
    if (config.mu0) {
        if (!(config.mu0->space() == space)) {
            throw Error(ErrorKind::SpaceMismatch, "initial datum does not live on the multiscale space");
        }
        mu0 = *config.mu0;
    } else {
        notes.emplace_back("uniform initial datum");
    }
    return Setup{path.filename().string(), std::move(spec), std::move(mu0), std::move(notes)};
}

TimeGrid make_grid(const StudyConfig& config) {
    if (config.grid == GridPolicy::Uniform) return TimeGrid::uniform(config.horizon, config.uniform_steps);
    return TimeGrid::refined_near_zero(config.horizon, 1e-6, 1.2, config.uniform_steps);
}

double fast_block_alpha(const MultiscaleSpec& spec, const ProbabilityVector& rho, const StudyConfig& config) {
    if (config.fixed_alpha) return *config.fixed_alpha;
    const auto parts = disintegrate(rho, slow_projection(spec.n));
    LsiOptions options;
    options.seed = config.seed;
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < 2; ++y) {
        const auto conditional =
            ProbabilityVector::from_mass(StateSpace::indexed(spec.n), parts.conditionals[y]->mass());
        alpha = std::min(alpha, estimate_lsi_constant(spec.q[y], conditional, options).alpha);
    }
    return alpha;
}

void run_one(const Setup& setup, const StudyConfig& config, const TimeGrid& grid, EpsilonRun& run,
             EpsilonRecord& record) {
    const double eps = run.epsilon;
    const auto spec = with_epsilon(setup.spec, eps);
    const auto L = build_l_eps(spec);
    const auto xi = slow_projection(spec.n);

    auto solution = solve_coarse_grained(L, xi, setup.mu0, grid);
    const auto rho = stationary_measure(L);
    const auto N = effective_generator(L, rho, xi);
    const auto pi = push_forward(rho, xi);
    const auto eff0 = config.matched_initial ? push_forward(setup.mu0, xi) : pi;
    auto eff = solve_constant(N, eff0, grid);

    record.alpha_q = fast_block_alpha(spec, rho, config);
    auto bounds = eps_bound_report(L, xi, solution.full, solution.cg, eff, rho, eps, record.alpha_q);
    try {
        attach_long_time_envelope(bounds, solution.cg, eff, pi);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::MissingFit) throw;
        bounds.notes.push_back(fmt::format("no long-time envelope: {}", e.what()));
    }
    record.sup_h = bounds.sup_lhs;
    record.t_argmax = bounds.t_argmax;
    record.h_final = bounds.lhs.back();
    record.verdict = bounds.all_true();

    if (!setup.mu0.strictly_positive()) {
        auto offset = eps_bound_report(L, xi, solution.full, solution.cg, eff, rho, eps, record.alpha_q,
                                       config.offset);
        offset.notes.emplace_back("initial datum not strictly positive; offset certification");
        record.verdict = offset.all_true();
        run.offset_bounds = std::move(offset);
    }

    const auto ode = solve_cg_ode(L, xi, setup.mu0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        record.cg_ode_tv = std::max(record.cg_ode_tv, total_variation(ode.at(k), solution.cg.at(k)));
    }
    record.effective_residual = stationarity_residual(N, pi);

    run.full = std::move(solution.full);
    run.cg = std::move(solution.cg);
    run.eff = std::move(eff);
    run.bounds = std::move(bounds);
}

bool in_window(double eps, const std::vector<double>& window) {
    return std::any_of(window.begin(), window.end(),
                       [eps](double w) { return std::abs(eps - w) <= 1e-12 * std::max(std::abs(w), 1e-300); });
}

}  // namespace

std::size_t default_thread_count() {
    if (const char* env = std::getenv("CTMC_LUMPER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void validate_config(const StudyConfig& config) {
    if (config.epsilons.empty()) throw Error(ErrorKind::InvalidArgument, "no epsilon values");
    for (std::size_t i = 0; i < config.epsilons.size(); ++i) {
        const double e = config.epsilons[i];
        if (!(e > 0.0) || !std::isfinite(e)) throw Error(ErrorKind::InvalidArgument, fmt::format("epsilon {}", e));
        if (i > 0 && !(e < config.epsilons[i - 1])) {
            throw Error(ErrorKind::InvalidArgument, "epsilons must be strictly descending");
        }
    }
    if (!(config.horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
    if (config.fixed_alpha && !(*config.fixed_alpha > 0.0)) {
        throw Error(ErrorKind::NonPositiveAlpha, "fixed alpha must be positive");
    }
    if (!(config.offset > 0.0) || config.offset >= config.horizon) {
        throw Error(ErrorKind::InvalidArgument, "offset must lie in (0, T)");
    }
}

double fit_rate(const std::vector<std::pair<double, double>>& points, const std::vector<double>& window) {
    std::vector<double> xs, ys;
    for (const auto& [eps, value] : points) {
        if (!in_window(eps, window)) continue;
        if (!(value > 0.0)) throw Error(ErrorKind::NonPositiveValue, fmt::format("value {} at eps {}", value, eps));
        xs.push_back(std::log(eps));
        ys.push_back(std::log(value));
    }
    if (xs.size() < 2) throw Error(ErrorKind::InsufficientPoints, fmt::format("{} points in the fit window", xs.size()));
    const auto count = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientPoints, "fit window has a single distinct epsilon");
    return sxy / sxx;
}

StudyResult run_study(const StudyConfig& config) {
    validate_config(config);
    const auto setup = load_setup(config);
    const auto grid = make_grid(config);

    StudyResult result;
    auto& report = result.report;
    report.scenario = setup.name;
    report.n = setup.spec.n;
    report.horizon = config.horizon;
    report.notes = setup.notes;
    if (!setup.mu0.strictly_positive()) {
        report.notes.push_back(fmt::format("verdict taken on [{}, T]", config.offset));
    }

    const std::size_t count = config.epsilons.size();
    result.runs.resize(count);
    report.records.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        result.runs[i].epsilon = config.epsilons[i];
        report.records[i].epsilon = config.epsilons[i];
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                run_one(setup, config, grid, result.runs[i], report.records[i]);
            } catch (const Error& e) {
                report.records[i].error = e.what();
                report.records[i].verdict = false;
            }
        }
    };
    const std::size_t threads = std::min(count, config.threads > 0 ? config.threads : default_thread_count());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<std::pair<double, double>> points;
    for (const auto& r : report.records) {
        if (!r.error) points.emplace_back(r.epsilon, r.sup_h);
    }
    report.fit.window = config.fit_window;
    try {
        report.fit.slope = fit_rate(points, config.fit_window);
        report.fit.status = "ok";
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientPoints && e.kind() != ErrorKind::NonPositiveValue) throw;
        report.fit.status = fmt::format("undefined: {}", e.what());
    }
    return result;
}

std::string epsilon_tag(double epsilon) { return fmt::format("{:.12g}", epsilon); }

void emit(const StudyResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

    const auto& report = result.report;
    io::Json records = io::Json::array();
    std::string convergence = "eps,sup_H\n";
    for (const auto& r : report.records) {
        io::Json j{{"eps", r.epsilon}};
        if (r.error) {
            j["error"] = *r.error;
        } else {
            j["sup_H"] = r.sup_h;
            j["t_argmax"] = r.t_argmax;
            j["H_final"] = r.h_final;
            j["verdict"] = r.verdict;
            j["alpha_fast"] = r.alpha_q;
            j["cg_ode_tv"] = r.cg_ode_tv;
            j["effective_residual"] = r.effective_residual;
            convergence += fmt::format("{},{}\n", io::format_double(r.epsilon), io::format_double(r.sup_h));
        }
        records.push_back(std::move(j));
    }
    io::Json j{{"scenario", report.scenario},
               {"n", report.n},
               {"T", report.horizon},
               {"records", std::move(records)},
               {"slope", report.fit.slope ? io::Json(*report.fit.slope) : io::Json(nullptr)},
               {"slope_status", report.fit.status},
               {"fit_window", report.fit.window},
               {"notes", report.notes}};
    io::write_json_file(dir / "report.json", j);
    io::write_text_file(dir / "convergence.csv", convergence);

    for (const auto& run : result.runs) {
        if (!run.bounds) continue;
        const auto tag = epsilon_tag(run.epsilon);
        std::string profile = "t,H\n";
        for (std::size_t k = 0; k < run.bounds->grid.size(); ++k) {
            profile += fmt::format("{},{}\n", io::format_double(run.bounds->grid[k]),
                                   io::format_double(run.bounds->lhs[k]));
        }
        io::write_text_file(dir / fmt::format("profile_eps_{}.csv", tag), profile);
        io::write_json_file(dir / fmt::format("bounds_eps_{}.json", tag), io::to_json(*run.bounds));
        if (run.offset_bounds) {
            io::write_json_file(dir / fmt::format("bounds_offset_eps_{}.json", tag), io::to_json(*run.offset_bounds));
        }
        io::write_text_file(dir / fmt::format("trajectory_full_eps_{}.csv", tag), io::trajectory_csv(*run.full));
        io::write_text_file(dir / fmt::format("trajectory_cg_eps_{}.csv", tag), io::trajectory_csv(*run.cg));
        io::write_text_file(dir / fmt::format("trajectory_eff_eps_{}.csv", tag), io::trajectory_csv(*run.eff));
    }
}

}  // namespace ctmc
