#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pfobs/errors.hpp"
#include "pfobs/geometry.hpp"
#include "pfobs/phase_state.hpp"
#include "pfobs/potential.hpp"

namespace pfobs {

struct InitialDataSpec {
    InterfaceM0 m0 = CircleM0{};
    double beta_star = 0.25;
    double c_star_star = 0.2;
    double eps = 0.04;

    /// c** eps^beta*
    double clamp_scale() const { return c_star_star * std::pow(eps, beta_star); }
    /// 1 - eps^(beta*/3)
    double shrink() const { return 1.0 - std::pow(eps, beta_star / 3.0); }
    /// Width of the boundary blend, eps^(beta*/2).
    double blend_width() const { return std::pow(eps, beta_star / 2.0); }
};

struct ValueGrad {
    double value = 0.0;
    Point grad;
};

/// Signed distance to M0, positive in U0, with its gradient (0 at a circle centre).
inline ValueGrad signed_distance(const InterfaceM0& m0, Point x) {
    if (const auto* c = std::get_if<CircleM0>(&m0)) {
        const double dx = x.x - c->center.x, dy = x.y - c->center.y;
        const double rho = std::hypot(dx, dy);
        if (rho == 0.0) return {c->radius, {0.0, 0.0}};
        return {c->radius - rho, {-dx / rho, -dy / rho}};
    }
    const auto& s = std::get<SegmentM0>(m0);
    const double d = s.inside_sign * ((s.vertical ? x.x : x.y) - s.position);
    return {d, s.vertical ? Point{double(s.inside_sign), 0.0} : Point{0.0, double(s.inside_sign)}};
}

/// Range of the signed distance over a disk.
inline std::pair<double, double> distance_range_over_disk(const InterfaceM0& m0, const Disk& k) {
    if (const auto* c = std::get_if<CircleM0>(&m0)) {
        const double D = distance(k.center, c->center);
        return {c->radius - (D + k.radius), c->radius - std::max(D - k.radius, 0.0)};
    }
    const double mid = interface_side(m0, k.center);
    return {mid - k.radius, mid + k.radius};
}

/// Monotone clamp: identity on [-1/2,1/2], +-2/3 beyond +-1, cubic Hermite between.
inline double clamp_eta(double r) {
    const double a = std::fabs(r);
    if (a <= 0.5) return r;
    const double s = r < 0.0 ? -1.0 : 1.0;
    if (a >= 1.0) return s * (2.0 / 3.0);
    const double t = 2.0 * a - 1.0;
    const double t2 = t * t, t3 = t2 * t;
    const double val = (2 * t3 - 3 * t2 + 1) * 0.5 + (t3 - 2 * t2 + t) * 0.5 + (-2 * t3 + 3 * t2) * (2.0 / 3.0);
    return s * val;
}

inline double clamp_eta_deriv(double r) {
    const double a = std::fabs(r);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    const double t = 2.0 * a - 1.0;
    return (1.0 - t) * (1.0 - t);
}

/// Validates the band conditions of the initial datum against the obstacles.
inline void validate_initial_spec(const InitialDataSpec& spec, const GeometryConfig& cfg) {
    if (!(spec.beta_star > 0.0 && spec.beta_star < 0.5)) throw ConfigError("initial data: beta* must lie in (0, 1/2)");
    if (!(spec.c_star_star > 0.0)) throw ConfigError("initial data: c** must be positive");
    if (!(spec.eps > 0.0)) throw ConfigError("initial data: eps must be positive");
    const double band = spec.clamp_scale();
    if (const auto* c = std::get_if<CircleM0>(&spec.m0)) {
        if (!(c->radius > band))
            throw ConfigError("initial data: clamp band c** eps^beta* = " + std::to_string(band) +
                              " reaches the circle centre (radius " + std::to_string(c->radius) + ")");
    }
    for (const auto& k : cfg.obstacles_plus)
        if (!(distance_range_over_disk(spec.m0, k).first > band))
            throw ConfigError("initial data: O+ is not contained in {d > c** eps^beta*}");
    for (const auto& k : cfg.obstacles_minus)
        if (!(distance_range_over_disk(spec.m0, k).second < -band))
            throw ConfigError("initial data: O- is not contained in {d < -c** eps^beta*}");
}

/// Pre-clamp function r~ and its gradient.
///
/// Circle: (1 - eps^(beta*/3)) d. Segment: blended toward 0.9 d within
/// eps^(beta*/2) of the two edges the chord meets.
inline ValueGrad build_r_tilde(Point x, const InitialDataSpec& spec, const Rect& dom) {
    const ValueGrad sd = signed_distance(spec.m0, x);
    const double lam = spec.shrink();
    const auto* seg = std::get_if<SegmentM0>(&spec.m0);
    if (!seg) return {lam * sd.value, {lam * sd.grad.x, lam * sd.grad.y}};

    constexpr double cb = 0.9;
    const double rho = spec.blend_width();
    double b;
    Point db;
    if (seg->vertical) {
        const double lo = x.y - dom.y_min, hi = dom.y_max - x.y;
        b = std::min(lo, hi);
        db = lo <= hi ? Point{0.0, 1.0} : Point{0.0, -1.0};
    } else {
        const double lo = x.x - dom.x_min, hi = dom.x_max - x.x;
        b = std::min(lo, hi);
        db = lo <= hi ? Point{1.0, 0.0} : Point{-1.0, 0.0};
    }
    const double tt = (b - 0.5 * rho) / (0.5 * rho);
    const double phi = 1.0 - smoothstep5(tt);
    const double dphi = -smoothstep5_deriv(tt) / (0.5 * rho);
    const double a = lam * (1.0 - phi) + cb * phi;
    const double c = (cb - lam) * sd.value * dphi;
    return {a * sd.value, {a * sd.grad.x + c * db.x, a * sd.grad.y + c * db.y}};
}

/// r^i = c** eps^beta* eta(r~ / (c** eps^beta*)) and its gradient.
inline ValueGrad build_r(Point x, const InitialDataSpec& spec, const Rect& dom) {
    const double sc = spec.clamp_scale();
    const ValueGrad rt = build_r_tilde(x, spec, dom);
    const double e = clamp_eta_deriv(rt.value / sc);
    return {sc * clamp_eta(rt.value / sc), {e * rt.grad.x, e * rt.grad.y}};
}

struct InitialField {
    std::vector<double> r;
    std::vector<Point> grad_r;
    std::vector<double> r_tilde;
};

inline InitialField sample_r(const Grid& grid, const InitialDataSpec& spec) {
    InitialField f;
    f.r.resize(grid.size());
    f.grad_r.resize(grid.size());
    f.r_tilde.resize(grid.size());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = grid.index(i, j);
            const Point p = grid.center(i, j);
            const ValueGrad v = build_r(p, spec, grid.domain);
            f.r[k] = v.value;
            f.grad_r[k] = v.grad;
            f.r_tilde[k] = build_r_tilde(p, spec, grid.domain).value;
        }
    return f;
}

/// u0 = q^eps(r^i). Requires h <= eps / 5.
template <DoubleWell P>
PhaseState build_u0(const Grid& grid, const InitialDataSpec& spec, const P& pot, double cells_per_eps = 5.0) {
    if (grid.h > spec.eps / cells_per_eps * (1.0 + 1e-12))
        throw ConfigError("initial data: grid does not resolve the profile (h = " + std::to_string(grid.h) +
                          " > eps/" + std::to_string(cells_per_eps) + ")");
    PhaseState s(grid, spec.eps);
    const InitialField f = sample_r(grid, spec);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double z = f.r[k] / spec.eps;
        s.set(k, z >= 0.0 ? 1 : -1, XReal::from_double(pot.well_distance_on_profile(z)));
    }
    return s;
}

}  // namespace pfobs
