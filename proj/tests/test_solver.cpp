#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "pfobs/initial_data.hpp"
#include "pfobs/solver.hpp"

using namespace pfobs;

namespace {

GeometryConfig reference() {
    GeometryConfig g;
    g.obstacles_plus = {Disk{{0.5, 0.5}, 0.1}};
    return g;
}

// Straight u-space forward Euler with mirrored ghosts.
std::vector<double> naive_step(const std::vector<double>& u, const Grid& g, const std::vector<double>& gf, double eps,
                               double dt) {
    std::vector<double> out(u.size());
    auto at = [&](int i, int j) {
        i = std::clamp(i, 0, g.nx - 1);
        j = std::clamp(j, 0, g.ny - 1);
        return u[g.index(i, j)];
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double c = at(i, j);
            const double lap = (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4 * c) / (g.h * g.h);
            const double W = 0.5 * (1 - c * c) * (1 - c * c);
            const double dW = -2 * c * (1 - c * c);
            out[g.index(i, j)] = c + dt * (lap - dW / (eps * eps) + gf[g.index(i, j)] * std::sqrt(2 * W) / eps);
        }
    return out;
}

}  // namespace

TEST(Solver, StableDtExample) {
    const QuarticPotential pot;
    EXPECT_NEAR(stable_dt(0.04, 0.008, pot, 0.4), 6.4e-6, 1e-20);
    EXPECT_DOUBLE_EQ(stable_dt(0.04, 0.008, pot, 1.0), 2.0 * stable_dt(0.04, 0.008, pot, 0.5));
    EXPECT_DOUBLE_EQ(stable_dt(1.0, 0.004, pot, 0.4), stable_dt(1.0, 0.008, pot, 0.4) / 4.0);
    EXPECT_THROW(stable_dt(0.0, 0.01, pot, 0.4), DomainError);
}

TEST(Solver, RunDtLandsOnTheEnd) {
    const double dt = run_dt(0.1, 6.4e-6);
    EXPECT_LE(dt, 6.4e-6 * (1.0 + 1e-13));
    const double n = 0.1 / dt;
    EXPECT_NEAR(n, std::round(n), 1e-9);
}

TEST(Solver, MatchesNaiveUpdate) {
    const QuarticPotential pot;
    const GeometryConfig geo = reference();
    const double eps = 0.02;
    const Grid g = Grid::for_domain(geo.domain, eps / 5);
    const ForcingField f(geo, g, eps);
    InitialDataSpec spec;
    spec.eps = eps;
    const double dt = run_dt(0.1, stable_dt(eps, g.h, pot, 0.4));
    PhaseState s = build_u0(g, spec, pot);
    std::vector<double> u = s.u_values();
    for (int n = 0; n < 5; ++n) {
        s = step(s, f, dt, pot);
        u = naive_step(u, g, f.values(), eps, dt);
        double m = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) m = std::max(m, std::fabs(u[k] - s.u(k)));
        EXPECT_LE(m, 1e-14) << "step " << n;
    }
}

TEST(Solver, ZeroIsAFixedPoint) {
    const QuarticPotential pot;
    const Grid g = Grid::for_domain(Rect{}, 0.02);
    GeometryConfig empty;
    const ForcingField f(empty, g, 0.1);
    PhaseState s = PhaseState::from_u(g, 0.1, std::vector<double>(g.size(), 0.0));
    for (int n = 0; n < 50; ++n) s = step(s, f, 1e-5, pot);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(s.u(k), 0.0);
}

TEST(Solver, ConstantStateFollowsTheReactionOde) {
    const QuarticPotential pot;
    const Grid g = Grid::for_domain(Rect{}, 0.05);
    GeometryConfig empty;
    const ForcingField f(empty, g, 0.1);
    const double eps = 0.1, dt = 1e-4, c = 1.0 - 1e-9;
    PhaseState s(g, eps);
    for (std::size_t k = 0; k < s.size(); ++k) s.set(k, 1, XReal::from_double(1e-9));
    // independent scalar Euler on v = 1 - u: v' = v - dt 2 v (1-v)(2-v) / eps^2
    double v = 1e-9;
    for (int n = 0; n < 200; ++n) {
        s = step(s, f, dt, pot);
        v = v - dt * 2.0 * v * (1 - v) * (2 - v) / (eps * eps);
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(s.v(k) / v, 1.0, 1e-12);
        EXPECT_GT(s.u(k), c);
        EXPECT_LT(s.u(k), 1.0);
    }
}

TEST(Solver, PositivityIndexGuard) {
    const QuarticPotential pot;
    const GeometryConfig geo = reference();
    const double eps = 0.02;
    const Grid g = Grid::for_domain(geo.domain, eps / 5);
    InitialDataSpec spec;
    spec.eps = eps;
    const double big = stable_dt(eps, g.h, pot, 1.0) * 1.2;
    EXPECT_THROW(Simulation<QuarticPotential>(pot, ForcingField(geo, g, eps), build_u0(g, spec, pot), big), ConfigError);
}

TEST(Solver, DihedralSymmetry) {
    const QuarticPotential pot;
    const GeometryConfig geo = reference();
    const double eps = 0.02;
    const Grid g = Grid::for_domain(geo.domain, eps / 5);
    InitialDataSpec spec;
    spec.eps = eps;
    Simulation<QuarticPotential> sim(pot, ForcingField(geo, g, eps), build_u0(g, spec, pot),
                                     run_dt(0.1, stable_dt(eps, g.h, pot, 0.4)));
    sim.advance(1000);
    const PhaseState& s = sim.state();
    const int n = g.nx;
    double m = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double u = s.u(i, j);
            for (double w : {s.u(n - 1 - i, j), s.u(i, n - 1 - j), s.u(j, i), s.u(n - 1 - j, n - 1 - i)})
                m = std::max(m, std::fabs(u - w));
        }
    EXPECT_LE(m, 1e-12);
}

TEST(Solver, DeterministicAndStrictlyInside) {
    const QuarticPotential pot;
    const GeometryConfig geo = reference();
    const double eps = 0.02;
    const Grid g = Grid::for_domain(geo.domain, eps / 5);
    InitialDataSpec spec;
    spec.eps = eps;
    const double dt = run_dt(0.1, stable_dt(eps, g.h, pot, 0.4));
    auto run = [&] {
        Simulation<QuarticPotential> sim(pot, ForcingField(geo, g, eps), build_u0(g, spec, pot), dt);
        sim.advance(300);
        return std::make_pair(sim.state().u_values(), sim.ut2_integral());
    };
    const auto a = run(), b = run();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    Simulation<QuarticPotential> sim(pot, ForcingField(geo, g, eps), build_u0(g, spec, pot), dt);
    for (int n = 0; n < 300; ++n) {
        sim.step();
        ASSERT_TRUE(sim.state().strictly_inside());
    }
    EXPECT_NEAR(sim.state().t, 300 * dt, 1e-15);
}

TEST(Solver, ViolationIsReported) {
    const QuarticPotential pot;
    const Grid g = Grid::for_domain(Rect{}, 0.1);
    GeometryConfig empty;
    const ForcingField f(empty, g, 0.1);
    PhaseState s = PhaseState::from_u(g, 0.1, std::vector<double>(g.size(), 0.5));
    // far beyond the positivity limit the reaction overshoots the well
    try {
        step(s, f, 1.0, pot);
        FAIL() << "no violation";
    } catch (const MaxPrincipleViolation& e) {
        EXPECT_EQ(e.step(), 1);
    }
}
