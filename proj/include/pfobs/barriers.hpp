#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pfobs/diagnostics.hpp"
#include "pfobs/errors.hpp"
#include "pfobs/geometry.hpp"
#include "pfobs/phase_state.hpp"
#include "pfobs/potential.hpp"

namespace pfobs {

enum class BarrierKind { Sub, Super };

/// Radial barrier around y: sub for a ball inside O+, super for a ball inside O-.
struct BarrierSpec {
    Point y;
    BarrierKind kind = BarrierKind::Sub;
    double R0 = 0.1;
    double delta = 0.05;
    double eps = 0.02;
    double beta_star = 0.25;
    double c_star_star = 0.2;
    double s_gamma = 0.0;

    double outer() const { return R0 + delta; }
    double A() const { return outer() * outer(); }
    double D() const { return A() - R0 * R0; }
    double c14() const { return D() * D() / (2.0 * R0); }
    double c15() const { return D() / (2.0 * R0) + s_gamma; }
    double t_start() const { return std::pow(eps, beta_star); }
};

template <DoubleWell P>
BarrierSpec make_barrier(Point y, BarrierKind kind, double R0, double delta, double eps, double beta_star,
                         double c_star_star, const P& pot) {
    BarrierSpec b{y, kind, R0, delta, eps, beta_star, c_star_star, 0.0};
    b.s_gamma = s_gamma_eps(pot, eps);
    return b;
}

/// r(x) = -c14 / ((R0+delta)^2 - |x-y|^2) + c15
inline double barrier_r_minus(Point x, const BarrierSpec& b) {
    const double rho2 = (x.x - b.y.x) * (x.x - b.y.x) + (x.y - b.y.y) * (x.y - b.y.y);
    if (!(rho2 < b.A())) throw DomainError("barrier: point outside B_{R0+delta}(y)");
    return -b.c14() / (b.A() - rho2) + b.c15();
}

/// d r / d rho (negative for rho > 0); |grad r| is its absolute value.
inline double barrier_r_radial_deriv(double rho, const BarrierSpec& b) {
    const double w = b.A() - rho * rho;
    return -2.0 * b.c14() * rho / (w * w);
}

/// -Lap r = 2 c14 (n A + (4 - n) rho^2) / (A - rho^2)^3
inline double barrier_neg_laplacian(double rho, const BarrierSpec& b, int n = 2) {
    const double w = b.A() - rho * rho;
    return 2.0 * b.c14() * (n * b.A() + (4 - n) * rho * rho) / (w * w * w);
}

template <DoubleWell P>
double barrier_u(Point x, const BarrierSpec& b, const P& pot) {
    const double r = barrier_r_minus(x, b);
    if (b.kind == BarrierKind::Sub) return q_eps(pot, r, b.eps);
    return q_eps(pot, -r + 2.0 * b.s_gamma, b.eps);
}

/// Pointwise residual -Lap r - G(q^eps(r))/eps (|grad r|^2 - 1) - g, with g
/// mirrored for the super case so that <= 0 is the required sign in both.
template <DoubleWell P>
double barrier_residual_at(Point x, const BarrierSpec& b, double g, const P& pot) {
    const double rho = distance(x, b.y);
    const double r = barrier_r_minus(x, b);
    const double dr = barrier_r_radial_deriv(rho, b);
    const double gq = pot.G_on_profile(r / b.eps);
    const double gg = b.kind == BarrierKind::Sub ? g : -g;
    return barrier_neg_laplacian(rho, b) - gq / b.eps * (dr * dr - 1.0) - gg;
}

struct ResidualSample {
    double max_residual = -std::numeric_limits<double>::infinity();
    Point argmax;
    long samples = 0;
};

/// Max residual over a lattice of spacing h on B_{R0+delta}(y) minus the two-cell rim annulus.
template <DoubleWell P>
ResidualSample barrier_residual_unchecked(const BarrierSpec& b, const GeometryConfig& geo, double h, const P& pot) {
    ResidualSample out;
    const double c1 = compute_c1(2, geo.R0, geo.delta);
    const double rmax = b.outer() - 2.0 * h;
    const int n = static_cast<int>(std::ceil(b.outer() / h));
    for (int j = -n; j <= n; ++j)
        for (int i = -n; i <= n; ++i) {
            const Point x{b.y.x + i * h, b.y.y + j * h};
            if (distance(x, b.y) > rmax) continue;
            const double res = barrier_residual_at(x, b, forcing_g(x, b.eps, geo, c1), pot);
            ++out.samples;
            if (res > out.max_residual) {
                out.max_residual = res;
                out.argmax = x;
            }
        }
    return out;
}

/// Largest eps in the list whose sampled residual is <= 0 (0 when none passes).
template <DoubleWell P>
double eps1_gate(BarrierSpec b, const GeometryConfig& geo, const std::vector<double>& eps_list, double cells_per_eps,
                 const P& pot) {
    double best = 0.0;
    for (double e : eps_list) {
        b.eps = e;
        b.s_gamma = s_gamma_eps(pot, e);
        if (barrier_residual_unchecked(b, geo, e / cells_per_eps, pot).max_residual <= 0.0) best = std::max(best, e);
    }
    return best;
}

template <DoubleWell P>
ResidualSample barrier_residual(const BarrierSpec& b, const GeometryConfig& geo, double h, double eps1, const P& pot) {
    if (!(b.eps <= eps1))
        throw DomainError("barrier residual: eps = " + std::to_string(b.eps) + " is above the gate eps1 = " +
                          std::to_string(eps1));
    return barrier_residual_unchecked(b, geo, h, pot);
}

/// phi0(r) = r for r <= a, a (1 + tanh((r - a)/a)) above, a = c** eps^beta* / 3.
inline double barrier_clamp_phi0(double r, const BarrierSpec& b) {
    const double a = b.c_star_star * std::pow(b.eps, b.beta_star) / 3.0;
    return r <= a ? r : a * (1.0 + std::tanh((r - a) / a));
}

/// phi0(r) + (t / eps^beta*) (r - phi0(r)) evaluated at r = r_{y,-}(x), for 0 <= t <= eps^beta*.
inline double time_interpolated_barrier(Point x, double t, const BarrierSpec& b) {
    const double ts = b.t_start();
    if (!(t >= 0.0 && t <= ts)) throw DomainError("time-interpolated barrier: t outside [0, eps^beta*]");
    const double r = barrier_r_minus(x, b);
    const double p0 = barrier_clamp_phi0(r, b);
    if (t == ts) return r;
    return p0 + (t / ts) * (r - p0);
}

/// Minimum of u - u_sub (or u_super - u) over the cells of B_{R0+delta}(y).
template <DoubleWell P>
double comparison_gap(const PhaseState& s, const BarrierSpec& b, const P& pot) {
    double gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            const Point x = s.grid.center(i, j);
            if (!(distance(x, b.y) < b.outer())) continue;
            const double ub = barrier_u(x, b, pot);
            const double u = s.u(i, j);
            gap = std::min(gap, b.kind == BarrierKind::Sub ? u - ub : ub - u);
        }
    return gap;
}

template <DoubleWell P>
double comparison_check(const PhaseState& s, const BarrierSpec& b, const P& pot, double cells_per_eps = 5.0) {
    if (s.t < b.t_start() * (1.0 - 1e-12))
        throw DomainError("comparison: state time " + std::to_string(s.t) + " is before eps^beta* = " +
                          std::to_string(b.t_start()));
    if (s.grid.h > s.eps / cells_per_eps * (1.0 + 1e-12)) throw DomainError("comparison: grid does not resolve the barrier");
    return comparison_gap(s, b, pot);
}

/// sup over B_r(y) of |u - 1| (sub) or |u + 1| (super), kept in extended range.
inline XReal obstacle_deviation_x(const PhaseState& s, Point y, double r, BarrierKind kind) {
    const int target = kind == BarrierKind::Sub ? 1 : -1;
    XReal best{0.0, 0};
    bool any = false;
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            if (!(distance(s.grid.center(i, j), y) < r)) continue;
            const std::size_t k = s.grid.index(i, j);
            const XReal dev = s.sign[k] == target ? s.vx(k) : XReal::from_double(2.0 - s.v(k));
            if (!any || best < dev) best = dev;
            any = true;
        }
    return best;
}

inline double obstacle_deviation(const PhaseState& s, Point y, double r, BarrierKind kind) {
    return obstacle_deviation_x(s, y, r, kind).to_double();
}

inline double obstacle_convergence_check(const PhaseState& s, const BarrierSpec& b, double r) {
    if (!(r < b.R0)) throw DomainError("obstacle convergence: r must be below R0");
    if (s.t < b.t_start() * (1.0 - 1e-12)) throw DomainError("obstacle convergence: state time is before eps^beta*");
    return obstacle_deviation(s, b.y, r, b.kind);
}

}  // namespace pfobs
