#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pfobs/potential.hpp"

using namespace pfobs;

namespace {

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

double sigma_gauss(const QuarticPotential& p) {
    std::vector<double> x, w;
    gauss_legendre(24, x, w);
    double s = 0.0;
    for (int i = 0; i < 24; ++i) s += w[i] * std::sqrt(2.0 * p.W(x[i]));
    return s;
}

// tanh(1) from the exponential series, independent of std::tanh.
double tanh1_series() {
    double e2 = 0.0, term = 1.0;
    for (int k = 0; k < 40; ++k) {
        e2 += term;
        term *= 2.0 / (k + 1);
    }
    return (e2 - 1.0) / (e2 + 1.0);
}

}  // namespace

TEST(Potential, QuarticValues) {
    const QuarticPotential p;
    EXPECT_EQ(eval_W(p, 1.0), 0.0);
    EXPECT_EQ(eval_W(p, -1.0), 0.0);
    EXPECT_DOUBLE_EQ(eval_W(p, 0.0), 0.5);
    EXPECT_EQ(p.alpha(), 1.0 / std::sqrt(2.0));
    EXPECT_EQ(p.beta(), 1.0);
    EXPECT_EQ(p.gamma(), 0.0);
    EXPECT_EQ(p.max_abs_d2W(), 4.0);
}

TEST(Potential, ProfileValues) {
    const QuarticPotential p;
    EXPECT_EQ(eval_q(p, 0.0), 0.0);
    EXPECT_NEAR(eval_q(p, 20.0), 1.0, 1e-12);
    EXPECT_NEAR(eval_q(p, 1.0), tanh1_series(), 1e-15);
    EXPECT_NEAR(eval_q(p, 1.0), 0.7615941559557649, 1e-15);
}

TEST(Potential, SigmaClosedFormAndQuadrature) {
    const QuarticPotential p, p4(4.0);
    EXPECT_DOUBLE_EQ(sigma(p), 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(sigma(p4), 8.0 / 3.0);
    EXPECT_NEAR(sigma_gauss(p), 4.0 / 3.0, 1e-13);
    EXPECT_NEAR(sigma_by_quadrature(p), sigma_gauss(p), 1e-10);
    EXPECT_NEAR(sigma_by_quadrature(p4), sigma_gauss(p4), 1e-10);
}

TEST(Potential, QuadratureReportsFailure) {
    EXPECT_THROW(integrate_adaptive([](double x) { return std::sin(1.0 / x) / x; }, 1e-9, 1.0, 1e-15, 6),
                 QuadratureError);
}

TEST(Potential, GValuesAndDomain) {
    const QuarticPotential p;
    EXPECT_DOUBLE_EQ(eval_G(p, 0.0), 0.0);
    EXPECT_NEAR(eval_G(p, 1.0 / std::sqrt(2.0)), -std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(eval_G(p, -0.9), 1.8, 1e-14);
    EXPECT_THROW(eval_G(p, 1.0), DomainError);
    EXPECT_THROW(eval_G(p, -1.5), DomainError);
    EXPECT_THROW(p.G(1.0), DomainError);
}

TEST(Potential, GSignNearWells) {
    const QuarticPotential p;
    const double a = p.alpha(), rb = std::sqrt(p.beta());
    for (int n = 0; n < 1000; ++n) {
        const double s = a + (1.0 - 1e-6 - a) * n / 999.0;
        EXPECT_LE(eval_G(p, s), -rb);
        EXPECT_GE(eval_G(p, -s), rb);
    }
}

TEST(Potential, KValuesAndOddness) {
    const QuarticPotential p;
    EXPECT_EQ(eval_k(p, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(eval_k(p, 1.0), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(eval_k(p, -1.0), -2.0 / 3.0);
    for (int n = 0; n <= 100; ++n) {
        const double s = -1.5 + 3.0 * n / 100.0;
        EXPECT_NEAR(eval_k(p, s) + eval_k(p, -s), 0.0, 1e-12);
    }
    // k' = sqrt(2W) on [-1, 1]
    for (double s : {-0.7, 0.0, 0.3, 0.95}) {
        const double hh = 1e-6;
        EXPECT_NEAR((eval_k(p, s + hh) - eval_k(p, s - hh)) / (2 * hh), p.root2W(s), 1e-8);
    }
}

TEST(Potential, SGammaEps) {
    const QuarticPotential p;
    for (double e : {0.1, 0.04, 0.02}) EXPECT_NEAR(s_gamma_eps(p, e), 0.0, 1e-14);
    EXPECT_NEAR(s_gamma_eps(p, 0.1, 0.5), 0.1 * std::atanh(0.5), 1e-14);
    double prev = -1.0;
    for (double g : {-0.6, 0.1, 0.8}) {
        const double s = s_gamma_eps(p, 0.05, g);
        EXPECT_NEAR(s, 0.05 * std::atanh(g), 1e-14);
        EXPECT_GT(s, prev);
        prev = s;
    }
}

TEST(Potential, EquipartitionOnTheProfile) {
    const QuarticPotential p;
    const double eps = 0.02;
    for (int n = 0; n < 1000; ++n) {
        const double s = -10 * eps + 20 * eps * n / 999.0;
        const double dqe = p.dq(s / eps) / eps;
        EXPECT_LE(std::fabs(eps * dqe * dqe / 2 - p.W(q_eps(p, s, eps)) / eps), 1e-10);
    }
}

TEST(Potential, StructuralChecks) {
    const Report r = validate_potential(QuarticPotential{});
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.measured;
}

TEST(Potential, TailConstant) {
    const QuarticPotential p;
    const double c = fit_tail_constant(p);
    EXPECT_LE(c, 2.0 + 1e-12);  // 1 - tanh s = 2/(e^{2s}+1) < 2 e^{-2s} <= 2 e^{-s}
    for (int n = 0; n < 500; ++n) {
        const double s = p.q_inverse(p.alpha()) + 25.0 * n / 499.0;
        EXPECT_LE(p.well_distance_on_profile(s), c * std::exp(-s) * (1 + 1e-12));
    }
}

TEST(Potential, WellDistanceAvoidsCancellation) {
    const QuarticPotential p;
    for (double z : {0.5, 3.0, 15.0, 200.0}) {
        const double exact = 2.0 / (std::exp(2.0 * z) + 1.0);
        EXPECT_NEAR(p.well_distance_on_profile(z) / exact, 1.0, 1e-13);
        EXPECT_EQ(p.well_distance_on_profile(-z), p.well_distance_on_profile(z));
    }
}
