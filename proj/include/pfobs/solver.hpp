#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "pfobs/errors.hpp"
#include "pfobs/geometry.hpp"
#include "pfobs/phase_state.hpp"
#include "pfobs/potential.hpp"

namespace pfobs {

/// s_cfl * min(h^2 / 4, eps^2 / M_W)
template <DoubleWell P>
double stable_dt(double eps, double h, const P& pot, double s_cfl) {
    if (!(eps > 0.0) || !(h > 0.0)) throw DomainError("stable_dt: eps and h must be positive");
    return s_cfl * std::min(h * h / 4.0, eps * eps / pot.max_abs_d2W());
}

/// Coefficient sum that must stay below 1 for the update to keep 0 < v.
template <DoubleWell P>
double positivity_index(double eps, double h, double dt, const P& pot, double c1) {
    return 4.0 * dt / (h * h) + dt * (pot.relax_rate_max() / (eps * eps) + pot.root2w_over_v_max() * std::fabs(c1) / eps);
}

/// Largest dt <= dt_max that divides t_end into whole steps.
inline double run_dt(double t_end, double dt_max) {
    if (!(t_end > 0.0)) return dt_max;
    const double n = std::ceil(t_end / dt_max * (1.0 - 1e-14));
    return t_end / n;
}

/// Neumann neighbours (ghost = the cell itself) in the order W, E, S, N.
inline void neighbours(const Grid& g, int i, int j, std::size_t nb[4]) {
    const std::size_t k = g.index(i, j);
    nb[0] = i > 0 ? k - 1 : k;
    nb[1] = i + 1 < g.nx ? k + 1 : k;
    nb[2] = j > 0 ? k - g.nx : k;
    nb[3] = j + 1 < g.ny ? k + g.nx : k;
}

/// One forward-Euler step of u_t = Lap u - W'(u)/eps^2 + g sqrt(2W(u))/eps.
///
/// Written for v = 1 - |u| per cell:
///   v' = v (1 - 4a - dt (relax/eps^2 + sign g r2w/eps)) + a sum w_nb,
/// a = dt/h^2, w_nb = v_nb for a same-sign neighbour and 2 - v_nb otherwise.
/// Adds sum eps ((u'-u)/dt)^2 h^2 dt into *ut2 when given.
template <DoubleWell P>
void step_into(const PhaseState& in, PhaseState& out, const ForcingField& forcing, double dt, const P& pot,
               double* ut2 = nullptr) {
    const Grid& g = in.grid;
    const double eps = in.eps;
    const double a = dt / (g.h * g.h);
    const double ie2 = dt / (eps * eps), ie1 = dt / eps;
    const double diag0 = 1.0 - 4.0 * a;
    double acc = 0.0, comp = 0.0;
    if (out.size() != in.size()) out = PhaseState(g, eps);
    for (int j = 0; j < g.ny; ++j) {
        double row = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            std::size_t nb[4];
            neighbours(g, i, j, nb);
            const int s = in.sign[k];
            const long e0 = in.expo[k];
            const double vd = XReal::scale(in.mant[k], e0);
            const double gk = forcing[k];
            const double coeff = diag0 - ie2 * pot.relax_rate(s, vd) - ie1 * s * gk * pot.root2w_over_v(s, vd);

            long E = 0;
            double m_new;
            if (e0 == 0 && in.expo[nb[0]] == 0 && in.expo[nb[1]] == 0 && in.expo[nb[2]] == 0 && in.expo[nb[3]] == 0) {
                // all five mantissas are plain doubles
                double sum = 0.0;
                for (int n = 0; n < 4; ++n) {
                    const std::size_t q = nb[n];
                    sum += in.sign[q] == s ? in.mant[q] : 2.0 - in.mant[q];
                }
                m_new = in.mant[k] * coeff + a * sum;
            } else {
                E = e0;
                bool opposite = false;
                for (int n = 0; n < 4; ++n) {
                    if (in.sign[nb[n]] == s)
                        E = std::max(E, in.expo[nb[n]]);
                    else
                        opposite = true;
                }
                if (opposite) E = std::max(E, 0L);

                double sum = 0.0;
                for (int n = 0; n < 4; ++n) {
                    const std::size_t q = nb[n];
                    if (in.sign[q] == s)
                        sum += in.expo[q] == E ? in.mant[q] : XReal::scale(in.mant[q], in.expo[q] - E);
                    else
                        sum += XReal::scale(2.0 - XReal::scale(in.mant[q], in.expo[q]), -E);
                }
                const double self = e0 == E ? in.mant[k] : XReal::scale(in.mant[k], e0 - E);
                m_new = self * coeff + a * sum;
            }

            if (!(m_new > 0.0))
                throw MaxPrincipleViolation("maximum principle violated: |u| reached 1 at cell (" + std::to_string(i) +
                                                ", " + std::to_string(j) + ") in step " + std::to_string(in.step_index + 1),
                                            i, j, static_cast<double>(s), in.step_index + 1);
            XReal vn = XReal::normalized(m_new, E);
            int sn = s;
            const double vdn = XReal::scale(m_new, E);
            if (vdn > 1.0) {
                const double flipped = 2.0 - vdn;
                if (!(flipped > 0.0))
                    throw MaxPrincipleViolation("maximum principle violated: |u| reached 1 after a sign change at cell (" +
                                                    std::to_string(i) + ", " + std::to_string(j) + ") in step " +
                                                    std::to_string(in.step_index + 1),
                                                i, j, static_cast<double>(-s), in.step_index + 1);
                vn = XReal::from_double(flipped);
                sn = -s;
            }
            out.sign[k] = static_cast<std::int8_t>(sn);
            out.mant[k] = vn.m;
            out.expo[k] = vn.e;

            if (ut2) {
                const double du = E == 0 && e0 == 0 ? std::fabs(in.mant[k] - m_new)
                                                    : absdiff(XReal{in.mant[k], e0}, XReal{m_new, E}).to_double();
                row += du * du;
            }
        }
        // Kahan over rows; plain sums within a row
        const double y = row * (eps * g.h * g.h / dt) - comp;
        const double tsum = acc + y;
        comp = (tsum - acc) - y;
        acc = tsum;
    }
    out.grid = g;
    out.eps = eps;
    out.step_index = in.step_index + 1;
    out.t = in.t + dt;
    if (ut2) *ut2 += acc;
}

template <DoubleWell P>
PhaseState step(const PhaseState& in, const ForcingField& forcing, double dt, const P& pot) {
    PhaseState out(in.grid, in.eps);
    step_into(in, out, forcing, dt, pot);
    return out;
}

/// Fixed-dt time integrator with the u_t^2 accumulator used by the mass balance.
template <DoubleWell P>
class Simulation {
public:
    Simulation(const P& pot, ForcingField forcing, PhaseState initial, double dt)
        : pot_(pot), forcing_(std::move(forcing)), cur_(std::move(initial)), next_(cur_), dt_(dt), t0_(cur_.t) {
        if (!(dt > 0.0)) throw ConfigError("solver: dt must be positive");
        const double pi = positivity_index(cur_.eps, cur_.grid.h, dt, pot_, forcing_.c1());
        if (!(pi < 1.0))
            throw ConfigError("solver: dt = " + std::to_string(dt) + " breaks discrete positivity (index " +
                              std::to_string(pi) + " >= 1)");
        start_step_ = cur_.step_index;
    }

    void step() {
        double inc = 0.0;
        step_into(cur_, next_, forcing_, dt_, pot_, &inc);
        next_.t = t0_ + static_cast<double>(next_.step_index - start_step_) * dt_;
        std::swap(cur_, next_);
        // Neumaier summation across steps
        const double t = ut2_ + inc;
        if (std::fabs(ut2_) >= std::fabs(inc))
            ut2_c_ += (ut2_ - t) + inc;
        else
            ut2_c_ += (inc - t) + ut2_;
        ut2_ = t;
    }

    void advance(long steps) {
        for (long n = 0; n < steps; ++n) step();
    }

    const PhaseState& state() const { return cur_; }
    const ForcingField& forcing() const { return forcing_; }
    const P& potential() const { return pot_; }
    double dt() const { return dt_; }
    long steps_taken() const { return cur_.step_index - start_step_; }

    /// int_0^t int eps u_t^2 dx dt (not divided by sigma).
    double ut2_integral() const { return ut2_ + ut2_c_; }

private:
    P pot_;
    ForcingField forcing_;
    PhaseState cur_, next_;
    double dt_;
    double t0_;
    long start_step_ = 0;
    double ut2_ = 0.0, ut2_c_ = 0.0;
};

}  // namespace pfobs
