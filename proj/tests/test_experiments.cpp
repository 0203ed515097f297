#include "ctmc/experiments.hpp"
#include "ctmc/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace ctmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("ctmc_lumper_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

StudyConfig small_config() {
    StudyConfig c;
    c.epsilons = {1.0, 1e-1, 1e-2};
    c.horizon = 5.0;
    c.uniform_steps = 200;
    c.threads = 2;
    return c;
}

}  // namespace

TEST(FitRate, ExactPowerLaws) {
    std::vector<std::pair<double, double>> linear, quadratic;
    for (double e : {1.0, 1e-1, 1e-2, 1e-3, 1e-4}) {
        linear.emplace_back(e, 3.0 * e);
        quadratic.emplace_back(e, 0.5 * e * e);
    }
    const std::vector<double> window{1.0, 1e-1, 1e-2, 1e-3};
    EXPECT_NEAR(fit_rate(linear, window), 1.0, 1e-12);
    EXPECT_NEAR(fit_rate(quadratic, window), 2.0, 1e-12);
}

TEST(FitRate, PublishedFirstScenarioSeries) {
    // Plotted values of the first scenario; slope from numpy.polyfit on the logs.
    const std::vector<std::pair<double, double>> pts{{1.0, 0.00324269554887448},
                                                     {1e-1, 0.00044978582997003},
                                                     {1e-2, 1.41436745705946e-05},
                                                     {1e-3, 8.13623820180849e-07},
                                                     {1e-4, 3.92483265793044e-07}};
    const double slope = fit_rate(pts, {1.0, 1e-1, 1e-2, 1e-3});
    EXPECT_NEAR(slope, 1.2303891076049163, 1e-10);
    EXPECT_NEAR(slope, 1.20, 0.05);
}

TEST(FitRate, Errors) {
    const std::vector<double> window{1.0, 1e-1};
    try {
        (void)fit_rate({{1.0, 1.0}}, window);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientPoints);
    }
    try {
        (void)fit_rate({{1.0, 1.0}, {1e-1, 0.0}}, window);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveValue);
    }
    // Points outside the window are ignored.
    EXPECT_NEAR(fit_rate({{1.0, 1.0}, {1e-1, 0.1}, {1e-2, 5.0}}, window), 1.0, 1e-12);
}

TEST(Config, Validation) {
    auto c = small_config();
    EXPECT_NO_THROW(validate_config(c));
    c.epsilons = {};
    EXPECT_THROW(validate_config(c), Error);
    c.epsilons = {1e-1, 1.0};
    EXPECT_THROW(validate_config(c), Error);
    c.epsilons = {1.0, -1.0};
    EXPECT_THROW(validate_config(c), Error);
    c = small_config();
    c.horizon = 0.0;
    EXPECT_THROW(validate_config(c), Error);
}

TEST(Config, ThreadCountFromEnvironment) {
    ::setenv("CTMC_LUMPER_THREADS", "3", 1);
    EXPECT_EQ(default_thread_count(), 3u);
    ::unsetenv("CTMC_LUMPER_THREADS");
    EXPECT_GE(default_thread_count(), 1u);
}

TEST(Study, SingleEpsilonLeavesSlopeUndefined) {
    auto c = small_config();
    c.epsilons = {1e-1};
    const auto r = run_study(c);
    ASSERT_EQ(r.report.records.size(), 1u);
    EXPECT_FALSE(r.report.fit.slope.has_value());
    EXPECT_NE(r.report.fit.status.find("undefined"), std::string::npos);
    EXPECT_GT(r.report.records[0].sup_h, 0.0);
}

TEST(Study, RecordsAndProfileShape) {
    auto c = small_config();
    c.horizon = 20.0;
    c.uniform_steps = 2000;
    const auto r = run_study(c);
    ASSERT_EQ(r.runs.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& rec = r.report.records[i];
        EXPECT_FALSE(rec.error.has_value());
        EXPECT_TRUE(rec.verdict);
        EXPECT_LE(rec.cg_ode_tv, 1e-6);
        EXPECT_LE(rec.effective_residual, 1e-10);
        const auto& lhs = r.runs[i].bounds->lhs;
        EXPECT_EQ(lhs.front(), 0.0);
        EXPECT_LT(lhs.back(), rec.sup_h);
        if (i > 0) {
            EXPECT_LT(rec.sup_h, r.report.records[i - 1].sup_h);
            EXPECT_LT(rec.t_argmax, r.report.records[i - 1].t_argmax);
        }
    }
    ASSERT_TRUE(r.report.fit.slope.has_value());
}

TEST(Study, ConcentratedStartUsesOffsetReports) {
    auto c = small_config();
    c.scenario = ScenarioId::S3;
    c.epsilons = {1e-1};
    const auto r = run_study(c);
    ASSERT_TRUE(r.runs[0].offset_bounds.has_value());
    EXPECT_TRUE(r.runs[0].offset_bounds->all_true());
    EXPECT_TRUE(r.report.records[0].verdict);
}

TEST(Study, PerEpsilonErrorDoesNotAbort) {
    // A spec file whose fast blocks are fine but whose coupling disconnects the two levels.
    const auto dir = scratch("disconnected");
    fs::create_directories(dir);
    auto spec = scenario(ScenarioId::S1, 4).spec;
    spec.g[0].setZero();
    spec.g[1].setZero();
    io::write_json_file(dir / "spec.json", io::to_json(spec));
    auto c = small_config();
    c.scenario = dir / "spec.json";
    c.n = 4;
    const auto r = run_study(c);
    ASSERT_EQ(r.report.records.size(), 3u);
    for (const auto& rec : r.report.records) EXPECT_TRUE(rec.error.has_value());
    fs::remove_all(dir);
}

TEST(Emit, EmptyStudy) {
    const auto dir = scratch("empty");
    emit(StudyResult{}, dir);
    EXPECT_EQ(slurp(dir / "convergence.csv"), "eps,sup_H\n");
    const auto j = io::read_json_file(dir / "report.json");
    EXPECT_TRUE(j.at("records").empty());
    fs::remove_all(dir);
}

TEST(Emit, FileCountAndDeterminism) {
    auto c = small_config();
    const auto a = scratch("det_a"), b = scratch("det_b");
    emit(run_study(c), a);
    c.threads = 1;
    emit(run_study(c), b);

    std::size_t profiles = 0, files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        ++files;
        const auto name = entry.path().filename().string();
        if (name.rfind("profile_eps_", 0) == 0) ++profiles;
        EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
    }
    EXPECT_EQ(profiles, c.epsilons.size());
    // report, convergence, and per eps: profile, bounds, three trajectories.
    EXPECT_EQ(files, 2 + 5 * c.epsilons.size());
    EXPECT_TRUE(fs::exists(a / "profile_eps_0.01.csv"));
    EXPECT_EQ(slurp(a / "convergence.csv").substr(0, 10), "eps,sup_H\n");

    const auto report = io::read_json_file(a / "report.json");
    EXPECT_EQ(report.at("records").size(), 3u);
    EXPECT_EQ(report.at("fit_window").size(), 4u);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Emit, EpsilonTags) {
    EXPECT_EQ(epsilon_tag(1.0), "1");
    EXPECT_EQ(epsilon_tag(1e-3), "0.001");
    EXPECT_EQ(epsilon_tag(1e-4), "0.0001");
}
