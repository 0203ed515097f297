// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include "ctmc/coarse_graining.hpp"
#include "ctmc/dynamics.hpp"
#include "ctmc/error_bounds.hpp"
#include "ctmc/experiments.hpp"
#include "ctmc/functionals.hpp"
#include "ctmc/io.hpp"
#include "ctmc/multiscale.hpp"
#include "oracles.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ctmc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, std::string line) {
        pass = pass && ok;
        details.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", line));
    }
    void note(std::string line) { details.push_back("     " + std::move(line)); }
};

const std::array<ScenarioId, 3> kScenarios{ScenarioId::S1, ScenarioId::S2, ScenarioId::S3};
const std::vector<double> kEps{1.0, 1e-1, 1e-2, 1e-3, 1e-4};

// Plotted series of the published log-log figure, eps = 1 ... 1e-4.
const std::map<ScenarioId, std::vector<double>> kPublished{
    {ScenarioId::S1, {3.2427e-3, 4.4979e-4, 1.4144e-5, 8.1362e-7, 3.92483265793044e-07}},
    {ScenarioId::S2, {1.8268e-2, 1.3611e-3, 2.1706e-5, 2.3456e-6, 2.41969979541761e-06}},
    {ScenarioId::S3, {3.0333e-2, 4.3865e-3, 1.2146e-4, 5.8575e-6, 3.38788413936707e-06}},
};

std::map<ScenarioId, StudyResult> g_studies;

const StudyResult& study(ScenarioId id) {
    auto it = g_studies.find(id);
    if (it == g_studies.end()) {
        StudyConfig c;
        c.scenario = id;
        it = g_studies.emplace(id, run_study(c)).first;
    }
    return it->second;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome figure3_values() {
    Outcome o;
    for (auto id : kScenarios) {
        const auto& records = study(id).report.records;
        const auto& paper = kPublished.at(id);
        for (std::size_t i = 0; i < kEps.size(); ++i) {
            const auto& r = records[i];
            if (r.error) {
                o.check(false, fmt::format("{} eps={:g}: {}", to_string(id), kEps[i], *r.error));
                continue;
            }
            const double ratio = r.sup_h / paper[i];
            if (i < 4) {
                o.check(std::abs(ratio - 1.0) <= 0.2,
                        fmt::format("{} eps={:g}: sup_H={:.4e} published={:.4e} ratio={:.3f} (tol 20%)", to_string(id),
                                    kEps[i], r.sup_h, paper[i], ratio));
            } else {
                o.check(std::abs(std::log10(ratio)) <= 1.0,
                        fmt::format("{} eps={:g}: sup_H={:.4e} published={:.4e} ratio={:.3g} (order of magnitude)",
                                    to_string(id), kEps[i], r.sup_h, paper[i], ratio));
            }
        }
    }
    return o;
}

Outcome rate_slopes() {
    Outcome o;
    for (auto id : kScenarios) {
        const auto& fit = study(id).report.fit;
        if (!fit.slope) {
            o.check(false, fmt::format("{}: slope undefined ({})", to_string(id), fit.status));
            continue;
        }
        o.check(*fit.slope >= 0.9 && *fit.slope <= 1.5,
                fmt::format("{}: slope={:.4f} over eps in {{1,...,1e-3}} (want [0.9, 1.5])", to_string(id), *fit.slope));
    }
    return o;
}

Outcome figure2_shape() {
    Outcome o;
    const auto& records = study(ScenarioId::S1).report.records;
    for (std::size_t i = 1; i < 3; ++i) {
        o.check(records[i].sup_h < records[i - 1].sup_h,
                fmt::format("max H: eps={:g} {:.4e} < eps={:g} {:.4e}", kEps[i], records[i].sup_h, kEps[i - 1],
                            records[i - 1].sup_h));
        o.check(records[i].t_argmax < records[i - 1].t_argmax,
                fmt::format("argmax: eps={:g} {:.4f} < eps={:g} {:.4f}", kEps[i], records[i].t_argmax, kEps[i - 1],
                            records[i - 1].t_argmax));
    }
    return o;
}

Outcome reversible_collapse() {
    Outcome o;
    for (auto id : kScenarios) {
        const auto base = scenario(id).spec;
        const auto av = averaged_model(base);
        const double lambda = 2.0 / static_cast<double>(base.n);
        o.check(std::abs(av.lambda0 - lambda) <= 1e-12 && std::abs(av.lambda1 - lambda) <= 1e-12,
                fmt::format("{}: lambda = ({:.15g}, {:.15g}) vs 2/n = {:g}", to_string(id), av.lambda0, av.lambda1, lambda));
        double worst = 0.0;
        for (double eps : kEps) {
            const auto N = effective_generator_eps(with_epsilon(base, eps));
            worst = std::max(worst, (N.rates() - av.generator.rates()).cwiseAbs().rowwise().sum().maxCoeff());
        }
        o.check(worst <= 1e-12, fmt::format("{}: max_eps ||N^eps - L^av||_inf = {:.3e} (tol 1e-12)", to_string(id), worst));
    }
    return o;
}

Outcome stationary_structure() {
    Outcome o;
    for (auto id : kScenarios) {
        const auto base = scenario(id).spec;
        double uniform_dev = 0.0, cond = 0.0;
        for (double eps : kEps) {
            const auto spec = with_epsilon(base, eps);
            const auto rho = stationary_measure(build_l_eps(spec));
            const double target = 1.0 / (2.0 * static_cast<double>(base.n));
            uniform_dev = std::max(uniform_dev, (rho.mass().array() - target).abs().maxCoeff());
            const auto gap = conditional_stationary_gap(spec);
            cond = std::max({cond, gap[0], gap[1]});
        }
        o.check(uniform_dev <= 1e-10, fmt::format("{}: max |rho - 1/(2n)| = {:.3e} (tol 1e-10)", to_string(id), uniform_dev));
        o.check(cond <= 1e-10, fmt::format("{}: max TV(rho^eps(.|y), rho_y) = {:.3e} (tol 1e-10)", to_string(id), cond));
    }
    return o;
}

Outcome nonreversible_rate() {
    Outcome o;
    const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
    const auto av = averaged_model(nonreversible_variant(10, 1.0)).generator;
    std::vector<double> err;
    for (double e : eps) {
        err.push_back((effective_generator_eps(nonreversible_variant(10, e)).rates() - av.rates())
                          .cwiseAbs()
                          .rowwise()
                          .sum()
                          .maxCoeff());
    }
    o.note(fmt::format("||N^eps - L^av||_inf = {:.3e} {:.3e} {:.3e} {:.3e}", err[0], err[1], err[2], err[3]));
    const double slope = loglog_slope(eps, err);
    o.check(slope >= 0.9, fmt::format("slope = {:.4f} (want >= 0.9)", slope));
    return o;
}

Outcome bound_soundness() {
    Outcome o;
    for (auto id : kScenarios) {
        const auto& runs = study(id).runs;
        for (const auto& run : runs) {
            if (!run.bounds) {
                o.check(false, fmt::format("{} eps={:g}: no bound report", to_string(id), run.epsilon));
                continue;
            }
            const bool offset = id == ScenarioId::S3;
            const auto& report = offset ? *run.offset_bounds : *run.bounds;
            std::size_t failing = 0;
            for (bool v : report.verdict) failing += v ? 0 : 1;
            o.check(failing == 0, fmt::format("{} eps={:g}{}: {} of {} grid points violate lhs <= rhs", to_string(id),
                                              run.epsilon, offset ? " (offset 0.1)" : "", failing, report.verdict.size()));
        }
    }
    return o;
}

Trajectory two_state_trajectory(double p0, double h, double horizon) {
    const auto grid = TimeGrid::uniform(horizon, static_cast<std::size_t>(std::llround(horizon / h)));
    Matrix v(static_cast<Eigen::Index>(grid.size()), 2);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        v.row(static_cast<Eigen::Index>(k)) = oracle::two_state_law(1.0, 1.0, p0, grid[k]).transpose();
    }
    return Trajectory(grid, StateSpace({"0", "1"}), v);
}

Outcome functional_identities() {
    Outcome o;
    Matrix m(2, 2);
    m << -1, 1, 1, -1;
    const auto L = validate_generator(m, StateSpace({"0", "1"}));
    const auto rho = ProbabilityVector::uniform(L.space());

    const double d2 = entropy_dissipation_residual(L, two_state_trajectory(0.9, 2e-2, 2.0), rho);
    const double d1 = entropy_dissipation_residual(L, two_state_trajectory(0.9, 1e-2, 2.0), rho);
    o.check(d2 / d1 >= 3.0 && d2 / d1 <= 5.0, fmt::format("dissipation residual order: ratio {:.3f} under halving h", d2 / d1));
    o.check(d1 < 1e-4, fmt::format("dissipation residual at h = 1e-2: {:.4e} (tol 1e-4)", d1));

    auto identity = [&](double h) {
        return entropy_identity_residual(two_state_trajectory(0.9, h, 2.0), two_state_trajectory(0.5, h, 2.0), L);
    };
    const double i2 = identity(2e-2), i1 = identity(1e-2);
    o.check(i2 / i1 >= 3.0 && i2 / i1 <= 5.0, fmt::format("identity residual order: ratio {:.3f} under halving h", i2 / i1));
    o.check(i1 < 1e-4, fmt::format("identity residual at h = 1e-2: {:.4e} (tol 1e-4)", i1));

    std::mt19937_64 rng(8);
    double worst_fi = 0.0, min_fi = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
        const Matrix g = oracle::random_generator(rng, 4);
        const Vector nu = oracle::random_simplex(rng, 4, 1e-3);
        const Vector zeta = oracle::random_simplex(rng, 4, 1e-3);
        const double alt = fisher_information(nu, zeta, g);
        worst_fi = std::max(worst_fi, std::abs(alt - oracle::fisher_definition(nu, zeta, g)) / std::max(1.0, std::abs(alt)));
        min_fi = std::min(min_fi, alt);
    }
    o.check(worst_fi <= 1e-10, fmt::format("definition vs alternate Fisher form, 1000 triples: {:.3e} (tol 1e-10)", worst_fi));
    o.check(min_fi >= 0.0, fmt::format("min Fisher information over samples: {:.3e}", min_fi));

    double min_ckp = std::numeric_limits<double>::infinity();
    const auto space = StateSpace::indexed(5);
    for (int trial = 0; trial < 10000; ++trial) {
        const auto nu = ProbabilityVector::from_mass(space, oracle::random_simplex(rng, 5));
        const auto zeta = ProbabilityVector::from_mass(space, oracle::random_simplex(rng, 5));
        min_ckp = std::min(min_ckp, ckp_gap(nu, zeta));
    }
    o.check(min_ckp >= -1e-12, fmt::format("min CKP gap over 10000 pairs: {:.3e} (tol -1e-12)", min_ckp));
    return o;
}

Outcome appendix_properties() {
    Outcome o;
    std::mt19937_64 rng(2021);
    int within = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = oracle::random_generator(rng, 5);
        const auto L = validate_generator(m);
        Eigen::EigenSolver<Matrix> es(m);
        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < 5; ++i) {
            const double re = -es.eigenvalues()(i).real();
            if (re > 1e-9) gap = std::min(gap, re);
        }
        const auto traj = solve_constant(L, ProbabilityVector::dirac(L.space(), static_cast<std::size_t>(trial % 5)),
                                         TimeGrid::uniform(40.0 / gap, 2000));
        const double rel = std::abs(tv_decay_rate(traj, stationary_measure(L)) - gap) / gap;
        worst = std::max(worst, rel);
        within += rel <= 0.05 ? 1 : 0;
    }
    o.check(within == 20, fmt::format("TV decay rate vs spectral gap: {}/20 within 5%, worst {:.2f}%", within, 100.0 * worst));

    int validated = 0;
    std::vector<int> exponents;
    for (int trial = 0; trial < 10; ++trial) {
        const auto L = validate_generator(oracle::random_generator(rng, 5));
        const auto grid = TimeGrid::refined_near_zero(1.0, 1e-4, 1.2, 100);
        const auto traj = solve_constant(L, ProbabilityVector::dirac(L.space(), static_cast<std::size_t>(trial % 5)), grid);
        std::vector<double> lt, lm;
        bool positive = true;
        for (std::size_t k = 1; k < grid.size() && grid[k] <= 0.1; ++k) {
            const double mn = traj.values().row(static_cast<Eigen::Index>(k)).minCoeff();
            positive = positive && mn > 0.0;
            lt.push_back(std::log(grid[k]));
            lm.push_back(std::log(mn));
        }
        if (!positive) continue;
        double st = 0, sm = 0, stt = 0, stm = 0, cnt = 0;
        for (std::size_t i = 0; i < lt.size(); i += 2) st += lt[i], sm += lm[i], stt += lt[i] * lt[i], stm += lt[i] * lm[i], cnt += 1;
        // N is a path length, so the fitted exponent is rounded to an integer.
        const double slope = std::round((cnt * stm - st * sm) / (cnt * stt - st * st));
        double intercept = (sm - slope * st) / cnt, shift = 0.0;
        for (std::size_t i = 0; i < lt.size(); i += 2) shift = std::min(shift, lm[i] - (slope * lt[i] + intercept));
        intercept += shift;
        bool ok = true;
        for (std::size_t i = 1; i + 1 < lt.size(); i += 2) ok = ok && lm[i] >= slope * lt[i] + intercept - 1e-9;
        validated += ok ? 1 : 0;
        exponents.push_back(static_cast<int>(slope));
    }
    o.check(validated == 10, fmt::format("short-time bound C t^N validated out of sample: {}/10, N = {}", validated,
                                         fmt::join(exponents, ",")));
    return o;
}

Outcome consistency() {
    Outcome o;
    for (auto id : kScenarios) {
        double ode = 0.0, stat = 0.0;
        for (const auto& r : study(id).report.records) {
            ode = std::max(ode, r.cg_ode_tv);
            stat = std::max(stat, r.effective_residual);
        }
        o.check(ode <= 1e-6, fmt::format("{}: max TV(ODE route, projection) = {:.3e} (tol 1e-6)", to_string(id), ode));
        o.check(stat <= 1e-10, fmt::format("{}: max |N^T xi#rho| = {:.3e} (tol 1e-10)", to_string(id), stat));
    }

    const auto base = fs::temp_directory_path() / "ctmc_lumper_acceptance";
    fs::remove_all(base);
    StudyConfig c;
    emit(run_study(c), base / "a");
    emit(run_study(c), base / "b");
    std::size_t files = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
        ++files;
        differing += slurp(entry.path()) == slurp(base / "b" / entry.path().filename()) ? 0 : 1;
    }
    o.check(files > 0 && differing == 0, fmt::format("determinism: {} of {} files differ between two runs", differing, files));
    fs::remove_all(base);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
        {"Figure 3 sup values within 20%", figure3_values},
        {"rate slopes in [0.9, 1.5]", rate_slopes},
        {"Figure 2 shape for S1", figure2_shape},
        {"reversible collapse N^eps = L^av, lambda = 2/n", reversible_collapse},
        {"stationary structure", stationary_structure},
        {"effective -> averaged slope on non-reversible variant", nonreversible_rate},
        {"bound soundness", bound_soundness},
        {"functional identities", functional_identities},
        {"appendix properties", appendix_properties},
        {"consistency and determinism", consistency},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, fmt::format("exception: {}", e.what()));
        }
        fmt::print("{} {:2} {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first);
        for (const auto& d : o.details) fmt::print("        {}\n", d);
        failed += o.pass ? 0 : 1;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
