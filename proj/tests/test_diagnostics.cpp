#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pfobs/barriers.hpp"
#include "pfobs/diagnostics.hpp"
#include "pfobs/initial_data.hpp"
#include "pfobs/solver.hpp"

using namespace pfobs;

namespace {

// q(r/eps) stored by distance to the well, so the tails keep their precision
template <class F>
PhaseState profile(const Grid& g, double eps, F r) {
    const QuarticPotential pot;
    PhaseState s(g, eps);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double z = r(g.center(i, j)) / eps;
            s.set(g.index(i, j), z >= 0.0 ? 1 : -1, XReal::from_double(pot.well_distance_on_profile(z)));
        }
    return s;
}

PhaseState straight_profile(const Grid& g, double eps, double x0) {
    return profile(g, eps, [&](Point p) { return p.x - x0; });
}

PhaseState circle_profile(const Grid& g, double eps, Point c, double r0) {
    return profile(g, eps, [&](Point p) { return r0 - distance(p, c); });
}

}  // namespace

TEST(Diagnostics, StraightProfileHasUnitLength) {
    const QuarticPotential pot;
    const double eps = 0.02;
    const Grid g = Grid::for_domain(Rect{}, eps / 10);
    const PhaseState s = straight_profile(g, eps, 0.5);
    EXPECT_NEAR(measure_mu(s, pot), 1.0, 5e-3);
    const XiSummary xi = measure_xi(s, pot);
    EXPECT_LT(xi.abs_total, 5e-3);
    EXPECT_NEAR(extract_interface(s).length, 1.0, 1e-12);
    // region restricted to a ball of radius 0.2 across the line
    EXPECT_NEAR(measure_mu(s, pot, Ball{{0.5, 0.5}, 0.2}), 0.4, 5e-3);
    EXPECT_NEAR(measure_mu_x(s, pot, Ball{{0.5, 0.5}, 0.2}).to_double(), measure_mu(s, pot, Ball{{0.5, 0.5}, 0.2}),
                1e-12);
}

TEST(Diagnostics, EnergyWithoutForcingIsSigmaMu) {
    const QuarticPotential pot;
    const Grid g = Grid::for_domain(Rect{}, 0.01);
    const PhaseState s = straight_profile(g, 0.05, 0.3);
    GeometryConfig empty;
    const ForcingField f(empty, g, 0.05);
    EXPECT_DOUBLE_EQ(energy(s, f, pot), sigma(pot) * measure_mu(s, pot));
    EXPECT_EQ(forcing_work(s, f, pot), 0.0);
}

TEST(Diagnostics, SaturatedStateHasNoMass) {
    const QuarticPotential pot;
    const Grid g = Grid::for_domain(Rect{}, 0.05);
    PhaseState s(g, 0.1);
    for (std::size_t k = 0; k < s.size(); ++k) s.set(k, 1, XReal{1.0, -5000});
    EXPECT_EQ(measure_mu(s, pot), 0.0);
    const XReal m = measure_mu_x(s, pot, Ball{{0.5, 0.5}, 0.3});
    EXPECT_GT(m.log10(), -3020.0);
    EXPECT_LT(m.log10(), -2990.0);
    EXPECT_EQ(grad_sup(s), 0.0);
    const XReal w{1.0, -5000};
    EXPECT_EQ(obstacle_deviation_x(s, {0.5, 0.5}, 0.2, BarrierKind::Sub).log10(), w.log10());
}

TEST(Diagnostics, GradSupOfRamp) {
    const Grid g = Grid::for_domain(Rect{}, 0.01);
    std::vector<double> u(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u[g.index(i, j)] = 0.5 * (g.center(i, j).x - 0.5);
    const PhaseState s = PhaseState::from_u(g, 0.1, u);
    EXPECT_NEAR(grad_sup(s), 0.1 * 0.5, 1e-12);
}

TEST(Diagnostics, CircleExtraction) {
    const double eps = 0.02, r0 = 0.3;
    const Grid g = Grid::for_domain(Rect{}, eps / 5);
    const PhaseState s = circle_profile(g, eps, {0.5, 0.5}, r0);
    const Interface itf = extract_interface(s);
    ASSERT_EQ(itf.lines.size(), 1u);
    EXPECT_TRUE(itf.lines[0].closed);
    EXPECT_NEAR(itf.length / (2 * std::numbers::pi * r0), 1.0, 1e-3);
    EXPECT_NEAR(std::sqrt(std::fabs(itf.lines[0].area()) / std::numbers::pi), r0, 1e-4);
    for (const Point& p : itf.lines[0].points) EXPECT_NEAR(distance(p, {0.5, 0.5}), r0, 1e-3);
}

TEST(Diagnostics, OpenCurvesEndOnTheBoundary) {
    const Grid g = Grid::for_domain(Rect{}, 0.01);
    const PhaseState s = circle_profile(g, 0.03, {0.0, 0.0}, 0.5);
    const Interface itf = extract_interface(s);
    ASSERT_EQ(itf.lines.size(), 1u);
    EXPECT_FALSE(itf.lines[0].closed);
    EXPECT_NEAR(itf.length, std::numbers::pi / 4.0, 2e-3);
    EXPECT_NEAR(min_distance_to_point(itf, {0.0, 0.0}), 0.5, 1e-3);
}

TEST(Diagnostics, BallMassMatchesBruteForce) {
    const Grid g = Grid::for_domain(Rect{}, 0.02);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> m(g.size());
    for (double& x : m) x = U(rng);
    const BallMass bm(g, m);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<Point> cs = mirrored_centres({U(rng), U(rng)}, g.domain, 0.15);
        const double r = 0.01 + 0.13 * U(rng);
        double brute = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                bool in = false;
                for (const Point& c : cs) in = in || distance(g.center(i, j), c) < r;
                if (in) brute += m[g.index(i, j)];
            }
        EXPECT_NEAR(bm.union_mass(cs, r), brute, 1e-9) << "trial " << trial;
    }
}

TEST(Diagnostics, MirroredCentres) {
    EXPECT_EQ(mirrored_centres({0.5, 0.5}, Rect{}, 0.1).size(), 1u);
    EXPECT_EQ(mirrored_centres({0.05, 0.5}, Rect{}, 0.1).size(), 2u);
    EXPECT_EQ(mirrored_centres({0.05, 0.95}, Rect{}, 0.1).size(), 4u);
    const auto r = default_radii(0.004, 0.1);
    ASSERT_EQ(r.size(), 8u);
    for (std::size_t n = 0; n < r.size(); ++n) {
        EXPECT_GT(r[n], 0.008);
        EXPECT_LT(r[n], 0.1);
        if (n) {
            EXPECT_GT(r[n], r[n - 1]);
        }
    }
    EXPECT_THROW(default_radii(0.06, 0.1), DomainError);
}

TEST(Diagnostics, DensityRatioOfStraightLine) {
    const QuarticPotential pot;
    const double eps = 0.01;
    const Grid g = Grid::for_domain(Rect{}, eps / 5);
    const PhaseState s = straight_profile(g, eps, 0.5);
    // a ball centred on the line carries mass ~ 2r
    const double D = density_ratio(s, pot, {Point{0.5, 0.5}}, {0.05, 0.08}, 0.1);
    EXPECT_NEAR(D, 1.0, 0.05);
    // near the edge the union with the mirrored ball covers the line for y in [0, 0.07]
    const double Db = density_ratio(s, pot, {Point{0.5, 0.02}}, {0.05}, 0.1);
    EXPECT_NEAR(Db, 0.07 / 0.1, 0.03);
}

TEST(Diagnostics, HeatKernel) {
    // the one-dimensional kernel integrates to one along a line
    const double tau = 1e-3;
    double acc = 0.0;
    const double ds = 1e-4;
    for (int n = -20000; n <= 20000; ++n) acc += backward_heat_kernel({n * ds, 0.0}, {0.0, 0.0}, tau) * ds;
    EXPECT_NEAR(acc, 1.0, 1e-10);
    EXPECT_EQ(kernel_cutoff(0.0, 0.1), 1.0);
    EXPECT_EQ(kernel_cutoff(0.025, 0.1), 1.0);
    EXPECT_EQ(kernel_cutoff(0.05, 0.1), 0.0);
    EXPECT_NEAR(kernel_cutoff(0.0375, 0.1), 0.5, 1e-15);
}

TEST(Diagnostics, HeatKernelFunctionalOnLine) {
    const QuarticPotential pot;
    const double eps = 0.005;
    const Grid g = Grid::for_domain(Rect{}, eps / 5);
    const PhaseState s = straight_profile(g, eps, 0.5);
    KernelProbe p{{0.5, 0.5}, 1e-4, false, 0.2};
    EXPECT_NEAR(heat_kernel_functional(s, pot, p), 1.0, 0.05);
    p.s = 0.0;
    EXPECT_THROW(heat_kernel_functional(s, pot, p), DomainError);
    p = KernelProbe{{0.5, 0.05}, 1e-4, false, 0.2};
    EXPECT_THROW(heat_kernel_functional(s, pot, p), DomainError);
    p = KernelProbe{{0.05, 0.05}, 1e-4, true, 0.2};
    EXPECT_THROW(heat_kernel_functional(s, pot, p), ReflectionUndefined);
    // boundary probe on the line: the mirrored half-line restores the full mass
    p = KernelProbe{{0.5, 0.01}, 1e-4, true, 0.2};
    EXPECT_NEAR(heat_kernel_functional(s, pot, p), 1.0, 0.05);
}

TEST(Diagnostics, MassBalanceWithoutForcing) {
    const QuarticPotential pot;
    const double eps = 0.04;
    const Grid g = Grid::for_domain(Rect{}, eps / 5);
    GeometryConfig empty;
    const ForcingField f(empty, g, eps);
    const PhaseState s0 = circle_profile(g, eps, {0.5, 0.5}, 0.3);
    Simulation<QuarticPotential> sim(pot, f, s0, run_dt(0.02, stable_dt(eps, g.h, pot, 0.4)));
    sim.advance(std::lround(0.02 / sim.dt()));
    const double res = mass_balance_residual(sim.state(), s0, sim.ut2_integral(), f, pot);
    EXPECT_LT(std::fabs(res) / measure_mu(s0, pot), 2e-3);
    EXPECT_LT(measure_mu(sim.state(), pot), measure_mu(s0, pot));
}

TEST(Diagnostics, RecordColumns) {
    const QuarticPotential pot;
    const double eps = 0.04;
    const Grid g = Grid::for_domain(Rect{}, eps / 5);
    GeometryConfig empty;
    const ForcingField f(empty, g, eps);
    const PhaseState s = circle_profile(g, eps, {0.5, 0.5}, 0.3);
    DiagnosticsOptions opt;
    opt.obstacle_ball = Ball{{0.5, 0.5}, 0.08};
    const DiagnosticsRecord r = compute_record(s, s, 0.0, f, pot, opt);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.mass_balance_residual, 0.0);
    EXPECT_DOUBLE_EQ(r.energy, sigma(pot) * r.mu_total);
    EXPECT_NEAR(r.interface_length / (2 * std::numbers::pi * 0.3), 1.0, 2e-3);
    EXPECT_GT(r.density_ratio_max, 0.0);
    // the ball sits at distance >= 0.22 from the circle, where eps|grad u|^2/2 = W/eps
    const double v = pot.well_distance_on_profile(0.22 / eps);
    const double cap = std::numbers::pi * 0.08 * 0.08 * 2.0 * pot.W_well(1, v) / eps / sigma(pot);
    EXPECT_GT(r.obstacle_mass, 0.0);
    EXPECT_LT(r.obstacle_mass, cap);
    EXPECT_TRUE(std::isnan(r.min_gap_sub));
}
