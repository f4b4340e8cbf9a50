#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pfobs/harness.hpp"
#include "pfobs/report.hpp"

namespace pfobs {

/// Length of M0 inside the domain.
inline double interface_length_m0(const InterfaceM0& m0, const Rect& dom) {
    if (const auto* c = std::get_if<CircleM0>(&m0)) return 2.0 * std::numbers::pi * c->radius;
    return std::get<SegmentM0>(m0).vertical ? dom.height() : dom.width();
}

/// Properties of the initial datum at the configured eps.
inline Report verify_initial(const RunConfig& cfg) {
    const double eps = cfg.solver.eps;
    validate_for_eps(cfg, eps);
    const auto pot = cfg.potential();
    const InitialDataSpec spec = cfg.initial_spec(eps);
    const Grid g = cfg.grid(eps);
    const PhaseState u0 = build_u0(g, spec, pot, cfg.solver.cells_per_eps);
    const InitialField f = sample_r(g, spec);
    const double sc = spec.clamp_scale();
    Report rep;

    double grad_max = 0.0, disc_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double gn2 = f.grad_r[k].x * f.grad_r[k].x + f.grad_r[k].y * f.grad_r[k].y;
        grad_max = std::max(grad_max, std::sqrt(gn2));
        // eps|grad u|^2/2 - W/eps = (W/eps)(|grad r|^2 - 1) along the profile
        disc_max = std::max(disc_max, W_cell(u0, k, pot) / eps * (gn2 - 1.0));
    }
    rep.add("grad_r_analytic", grad_max <= 1.0, grad_max, 1.0);

    double fd_max = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            const double gx = (f.r[g.index(i + 1, j)] - f.r[g.index(i - 1, j)]) / (2.0 * g.h);
            const double gy = (f.r[g.index(i, j + 1)] - f.r[g.index(i, j - 1)]) / (2.0 * g.h);
            fd_max = std::max(fd_max, std::hypot(gx, gy));
        }
    rep.add("grad_r_finite_difference", fd_max <= 1.0, fd_max, 1.0);
    rep.add("sup_abs_u0_below_one", u0.strictly_inside(), u0.min_log10_v(), 0.0, "min log10(1-|u|)");
    rep.add("discrepancy_analytic", disc_max <= 0.0, disc_max, 0.0);

    double disc_fd = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            disc_fd = std::max(disc_fd, 0.5 * eps * grad2_cell(u0, i, j) - W_cell(u0, g.index(i, j), pot) / eps);
    const double disc_slack = g.h * g.h / (eps * eps * eps);
    rep.add("discrepancy_discrete", disc_fd <= disc_slack, disc_fd, disc_slack, "slack h^2/eps^3");

    // Mirrored ghosts copy the boundary cell, so the discrete normal difference is identically zero.
    double neu = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j : {0, g.ny - 1}) {
            std::size_t nb[4];
            neighbours(g, i, j, nb);
            neu = std::max(neu, std::fabs(u0.u(nb[j == 0 ? 2 : 3]) - u0.u(i, j)));
        }
    for (int j = 0; j < g.ny; ++j)
        for (int i : {0, g.nx - 1}) {
            std::size_t nb[4];
            neighbours(g, i, j, nb);
            neu = std::max(neu, std::fabs(u0.u(nb[i == 0 ? 0 : 1]) - u0.u(i, j)));
        }
    rep.add("neumann_residual", neu == 0.0, neu, 0.0);

    double off_band = 0.0, range = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        range = std::max(range, std::fabs(f.r[k]));
        if (std::fabs(f.r_tilde[k]) >= sc)
            off_band = std::max(off_band, std::fabs(std::fabs(f.r[k]) - 2.0 * sc / 3.0));
    }
    rep.add("r_constant_outside_band", off_band == 0.0, off_band, 0.0);
    rep.add("r_range", range <= 2.0 * sc / 3.0, range, 2.0 * sc / 3.0);

    const double mu0 = measure_mu(u0, pot);
    const double len = interface_length_m0(cfg.m0, cfg.geometry.domain);
    const double rel = std::fabs(mu0 / len - 1.0);
    rep.add("mu0_vs_interface_length", rel <= 0.10, rel, 0.10, "relative error");

    const double D = density_ratio(u0, pot, cfg.c4(), cfg.diagnostics.density_stride);
    const double Dmax = 2.0 * cfg.diagnostics.initial_density_bound;
    rep.add("density_ratio", D <= Dmax, D, Dmax);

    if (eps <= 0.04) {
        const double band = 10.0 * eps * std::fabs(std::log(eps));
        const auto cm = mu_cell_masses(u0, pot);
        double out = 0.0, tot = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double m = cm[g.index(i, j)];
                tot += m;
                if (std::fabs(signed_distance(cfg.m0, g.center(i, j)).value) > band) out += m;
            }
        const double frac = tot > 0.0 ? out / tot : 0.0;
        rep.add("mass_concentration", frac <= 1e-6, frac, 1e-6);
    }
    return rep;
}

/// Analytic barrier properties, the eps1 gate, and the comparison at t = eps^beta*.
inline Report verify_barriers(const RunConfig& cfg, bool run_comparison = true) {
    const double eps = cfg.solver.eps;
    validate_for_eps(cfg, eps);
    const auto pot = cfg.potential();
    const Grid g = cfg.grid(eps);
    Report rep;
    std::vector<BarrierSpec> bs;
    for (const auto& k : cfg.geometry.obstacles_plus)
        bs.push_back(make_barrier(k.center, BarrierKind::Sub, cfg.geometry.R0, cfg.geometry.delta, eps, cfg.beta_star,
                                  cfg.c_star_star, pot));
    for (const auto& k : cfg.geometry.obstacles_minus)
        bs.push_back(make_barrier(k.center, BarrierKind::Super, cfg.geometry.R0, cfg.geometry.delta, eps,
                                  cfg.beta_star, cfg.c_star_star, pot));
    if (bs.empty()) throw ConfigError("verify-barriers: the configuration has no obstacles");

    std::vector<double> gate_list = cfg.eps_list;
    if (std::find(gate_list.begin(), gate_list.end(), eps) == gate_list.end()) gate_list.push_back(eps);

    for (std::size_t n = 0; n < bs.size(); ++n) {
        const BarrierSpec& b = bs[n];
        const std::string tag = (b.kind == BarrierKind::Sub ? "sub" : "super") + std::string("[") + std::to_string(n) + "]";
        const double alg = std::fabs(barrier_r_minus({b.y.x + b.R0, b.y.y}, b) - b.s_gamma);
        rep.add(tag + ".value_at_R0", alg <= 1e-12, alg, 1e-12);

        long bad = 0;
        constexpr int kRadii = 10000;
        for (int m = 0; m < kRadii; ++m) {
            const double rho = b.outer() * (m + 0.5) / kRadii;
            const double dr = std::fabs(barrier_r_radial_deriv(rho, b));
            if (rho < b.R0 ? !(dr < 1.0) : !(dr >= 1.0)) ++bad;
        }
        rep.add(tag + ".gradient_threshold", bad == 0, double(bad), 0.0, "misplaced radii of 1e4");

        const double eps1 = eps1_gate(b, cfg.geometry, gate_list, cfg.solver.cells_per_eps, pot);
        if (eps <= eps1) {
            const ResidualSample rs = barrier_residual(b, cfg.geometry, g.h, eps1, pot);
            rep.add(tag + ".residual_sign", rs.max_residual <= 0.0, rs.max_residual, 0.0);
        } else {
            rep.add(tag + ".residual_sign", false, eps, eps1, "eps above the eps1 gate");
        }

        long ti_bad = 0;
        for (int m = 0; m < 200; ++m) {
            const Point x{b.y.x + (b.outer() - 2.0 * g.h) * m / 200.0, b.y.y};
            const double r = barrier_r_minus(x, b);
            const double lo = time_interpolated_barrier(x, 0.0, b), hi = time_interpolated_barrier(x, b.t_start(), b);
            if (!(lo <= r) || hi != r) ++ti_bad;
        }
        rep.add(tag + ".time_interpolation", ti_bad == 0, double(ti_bad), 0.0);
    }

    if (run_comparison) {
        RunConfig c = cfg;
        c.solver.t_end = std::pow(eps, cfg.beta_star);
        c.solver.checkpoint_every = 0;
        Runner rn(c, eps);
        rn.advance(rn.total_steps());
        const double tol = cfg.barriers.comparison_tol_abs + cfg.barriers.comparison_C_disc * g.h * g.h;
        const double rb = cfg.diagnostics.obstacle_ball_fraction * cfg.geometry.R0;
        for (std::size_t n = 0; n < rn.barriers().size(); ++n) {
            const BarrierSpec& b = rn.barriers()[n];
            const double gap = comparison_check(rn.state(), b, pot, cfg.solver.cells_per_eps);
            rep.add("comparison[" + std::to_string(n) + "]", gap >= -tol, gap, -tol, "gap at t = eps^beta*");
            const double dev = obstacle_convergence_check(rn.state(), b, rb);
            rep.add("obstacle_deviation[" + std::to_string(n) + "]", true, dev, 0.0, "informational");
        }
    }
    return rep;
}

struct CircleBenchmark {
    double t = 0.0;
    double expected_radius = 0.0;
    double area_radius = 0.0;
    double mean_radius = 0.0;
    bool closed = false;
};

/// Curve-shortening circle with g = 0: the extracted radius against sqrt(r0^2 - 2t).
inline CircleBenchmark run_circle_benchmark(RunConfig cfg) {
    const auto* cm = std::get_if<CircleM0>(&cfg.m0);
    if (!cm) throw ConfigError("benchmark-circle: initial_data.m0 must be a circle");
    cfg.geometry.obstacles_plus.clear();
    cfg.geometry.obstacles_minus.clear();
    const double r0 = cm->radius;
    const double T = cfg.solver.t_end;
    if (!(r0 * r0 - 2.0 * T > 0.0)) throw ConfigError("benchmark-circle: the circle vanishes before t_end");
    Runner rn(cfg, cfg.solver.eps);
    rn.advance(rn.total_steps());
    const Interface itf = extract_interface(rn.state());
    CircleBenchmark out;
    out.t = rn.state().t;
    out.expected_radius = std::sqrt(r0 * r0 - 2.0 * out.t);
    double area = 0.0, sum = 0.0;
    long pts = 0;
    out.closed = itf.lines.size() == 1 && itf.lines.front().closed;
    for (const auto& l : itf.lines) {
        area += std::fabs(l.area());
        for (const auto& p : l.points) {
            sum += distance(p, cm->center);
            ++pts;
        }
    }
    out.area_radius = std::sqrt(area / std::numbers::pi);
    out.mean_radius = pts ? sum / pts : 0.0;
    return out;
}

inline Report verify_circle(const RunConfig& cfg, double rel_tol = 0.03) {
    const CircleBenchmark b = run_circle_benchmark(cfg);
    Report rep;
    rep.add("interface_closed", b.closed, b.closed ? 1.0 : 0.0, 1.0);
    const double rel = std::fabs(b.area_radius / b.expected_radius - 1.0);
    rep.add("radius_vs_circle_law", rel <= rel_tol, rel, rel_tol,
            "area radius " + fmt17(b.area_radius) + " expected " + fmt17(b.expected_radius));
    return rep;
}

}  // namespace pfobs
