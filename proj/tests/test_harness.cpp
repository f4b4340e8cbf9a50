#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <unistd.h>

#include "pfobs/pfobs.hpp"

using namespace pfobs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("pfobs_harness_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunConfig small() {
    RunConfig c;
    c.geometry.obstacles_plus = {Disk{{0.5, 0.5}, 0.1}};
    c.enforce_boundary_collar = false;
    c.solver.eps = 0.08;
    c.solver.t_end = 0.005;
    c.solver.checkpoints = 4;
    return c;
}

}  // namespace

TEST(Harness, Trapezoid) {
    EXPECT_DOUBLE_EQ(trapezoid({0, 1, 3}, {0, 2, 6}), 1.0 + 8.0);
    EXPECT_EQ(trapezoid({0.5}, {1.0}), 0.0);
}

TEST(Harness, LogLogSlope) {
    std::vector<double> x{0.08, 0.04, 0.02}, y;
    for (double e : x) y.push_back(3.0 * std::pow(e, 0.7));
    EXPECT_NEAR(loglog_slope(x, y), 0.7, 1e-12);
    EXPECT_TRUE(std::isnan(loglog_slope({0.1}, {1.0})));
    EXPECT_TRUE(std::isnan(loglog_slope({0.1, 0.1}, {1.0, 2.0})));
}

TEST(Harness, SemidecreasingConstant) {
    std::vector<DiagnosticsRecord> rs(4);
    const double t[] = {0.0, 0.1, 0.2, 0.3}, mu[] = {1.0, 0.9, 0.95, 0.9};
    for (int n = 0; n < 4; ++n) {
        rs[n].t = t[n];
        rs[n].mu_total = mu[n];
    }
    EXPECT_NEAR(semidecreasing_constant(rs), 0.5, 1e-12);
    rs[2].mu_total = 0.8;
    rs[3].mu_total = 0.7;
    EXPECT_EQ(semidecreasing_constant(rs), 0.0);
}

TEST(Harness, RunSingleWritesArtifacts) {
    const RunConfig c = small();
    const fs::path d = scratch("run");
    const RunOutput out = run_single(c, c.solver.eps, d.string());
    EXPECT_FALSE(out.warnings.empty());
    EXPECT_EQ(out.records.size(), 5u);
    EXPECT_NEAR(out.records.back().t, 0.005, 1e-15);
    EXPECT_EQ(out.steps * out.dt, out.records.back().t);
    ASSERT_TRUE(fs::exists(d / "manifest.json"));
    ASSERT_TRUE(fs::exists(d / "diagnostics.csv"));
    const std::string csv = slurp(d / "diagnostics.csv");
    EXPECT_EQ(csv.rfind(std::string(kCsvHeader) + "\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
    const Snapshot s = read_snapshot((d / snapshot_name(out.steps)).string());
    EXPECT_EQ(s.t, out.records.back().t);
    EXPECT_EQ(s.nx, 63u);
    const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
    EXPECT_DOUBLE_EQ(m["derived"]["c1"].get<double>(), 880.0);
    EXPECT_EQ(m["run"]["checkpoint_every"].get<long>(), (out.steps + 3) / 4);
    // energy is non-increasing and gaps are not yet defined before eps^beta*
    for (std::size_t n = 1; n < out.records.size(); ++n)
        EXPECT_LE(out.records[n].energy, out.records[n - 1].energy + 1e-10);
    EXPECT_TRUE(std::isnan(out.records.back().min_gap_sub));
    EXPECT_TRUE(std::isnan(out.records.back().min_gap_super));
    EXPECT_FALSE(std::isnan(out.records.back().obstacle_dev));
}

TEST(Harness, RunsAreByteIdentical) {
    const RunConfig c = small();
    run_single(c, c.solver.eps, scratch("a").string());
    run_single(c, c.solver.eps, scratch("b").string());
    EXPECT_EQ(slurp(scratch("a").parent_path() / "a" / "diagnostics.csv"),
              slurp(scratch("b").parent_path() / "b" / "diagnostics.csv"));
}

TEST(Harness, ZeroEndTimeGivesOneRecord) {
    RunConfig c = small();
    c.solver.t_end = 0.0;
    const RunOutput out = run_single(c, c.solver.eps, "");
    ASSERT_EQ(out.records.size(), 1u);
    EXPECT_EQ(out.records[0].t, 0.0);
    EXPECT_EQ(out.records[0].mass_balance_residual, 0.0);
    EXPECT_EQ(out.steps, 0);
}

TEST(Harness, CheckpointEveryOverride) {
    RunConfig c = small();
    c.solver.checkpoint_every = 100;
    Runner rn(c, c.solver.eps);
    EXPECT_EQ(rn.checkpoint_every(), 100);
    long n = 0;
    while (rn.advance_to_next_checkpoint()) ++n;
    EXPECT_EQ(n, (rn.total_steps() + 99) / 100);
    EXPECT_EQ(rn.simulation().steps_taken(), rn.total_steps());
}

TEST(Harness, SweepWritesSummary) {
    RunConfig c = small();
    c.solver.t_end = 0.002;
    c.eps_list = {0.08, 0.06, 0.05};
    const fs::path d = scratch("sweep");
    const SweepSummary s = run_sweep(c, d.string(), 2);
    ASSERT_EQ(s.rows.size(), 3u);
    EXPECT_FALSE(s.any_failed);
    for (const auto& r : s.rows) {
        EXPECT_FALSE(r.failed) << r.error;
        EXPECT_TRUE(fs::exists(d / eps_dir_name(r.eps) / "diagnostics.csv"));
        EXPECT_GT(r.int_xi_abs, 0.0);
    }
    EXPECT_TRUE(std::isfinite(s.slope));
    EXPECT_TRUE(fs::exists(d / "sweep.csv"));
    EXPECT_TRUE(fs::exists(d / "sweep_summary.json"));
    EXPECT_EQ(eps_dir_name(0.04), "eps_0.04");

    c.eps_list = {0.08, 0.06};
    EXPECT_THROW(run_sweep(c, "", 1), ConfigError);
}

TEST(Harness, SweepRejectsInvalidEntriesUpFront) {
    RunConfig c = small();
    c.solver.t_end = 0.001;
    c.eps_list = {0.3, 0.08, 0.06};  // the grid at eps = 0.3 is too coarse for the density radii
    const fs::path d = scratch("sweep_bad");
    EXPECT_THROW(run_sweep(c, d.string(), 1), ConfigError);
    EXPECT_FALSE(fs::exists(d / eps_dir_name(0.08)));
}

TEST(Harness, ShrinkingCircleQuick) {
    RunConfig c;
    c.solver.eps = 0.04;
    c.solver.t_end = 0.01;
    c.m0 = CircleM0{{0.5, 0.5}, 0.3};
    const CircleBenchmark b = run_circle_benchmark(c);
    EXPECT_TRUE(b.closed);
    EXPECT_NEAR(b.expected_radius, std::sqrt(0.09 - 0.02), 1e-12);
    EXPECT_LT(std::fabs(b.area_radius / b.expected_radius - 1.0), 0.03);
    EXPECT_TRUE(verify_circle(c).passed());
    c.solver.t_end = 0.05;
    EXPECT_THROW(run_circle_benchmark(c), ConfigError);
}
