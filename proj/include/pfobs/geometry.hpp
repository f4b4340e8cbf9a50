#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "pfobs/errors.hpp"
#include "pfobs/grid.hpp"
#include "pfobs/report.hpp"

namespace pfobs {

struct Disk {
    Point center;
    double radius = 0.0;
};

/// Interior circle M0; U0 is the enclosed disk.
struct CircleM0 {
    Point center{0.5, 0.5};
    double radius = 0.3;
};

/// Straight chord meeting two opposite edges at right angles.
/// vertical: the line x = position (else y = position).
/// inside_sign = +1 puts U0 on the side of larger coordinate.
struct SegmentM0 {
    bool vertical = true;
    double position = 0.5;
    int inside_sign = 1;
};

using InterfaceM0 = std::variant<CircleM0, SegmentM0>;

struct GeometryConfig {
    Rect domain;
    std::vector<Disk> obstacles_plus;
    std::vector<Disk> obstacles_minus;
    double R0 = 0.1;
    double R1 = 0.0;
    double delta = 0.05;
    double c4 = 0.0;  // 0 selects the default collar width
};

/// n (2R0 + 3 delta/2)^4 / (delta R0 (R0 + 3 delta/4)^3)
inline double compute_c1(int n, double R0, double delta) {
    if (n < 2 || !(R0 > 0.0) || !(delta > 0.0)) throw DomainError("compute_c1: need n >= 2, R0 > 0, delta > 0");
    const double num = n * std::pow(2.0 * R0 + 1.5 * delta, 4);
    const double den = delta * R0 * std::pow(R0 + 0.75 * delta, 3);
    return num / den;
}

/// Distance from x to a union of disks (0 inside).
inline double dist_to_set(Point x, const std::vector<Disk>& disks) {
    if (disks.empty()) throw DomainError("dist_to_set: empty disk list");
    double d = std::numeric_limits<double>::infinity();
    for (const auto& k : disks) d = std::min(d, distance(x, k.center) - k.radius);
    return std::max(d, 0.0);
}

inline double dist_to_set_or_inf(Point x, const std::vector<Disk>& disks) {
    return disks.empty() ? std::numeric_limits<double>::infinity() : dist_to_set(x, disks);
}

/// 6t^5 - 15t^4 + 10t^3 clamped to [0,1].
inline double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

inline double smoothstep5_deriv(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = t * (1.0 - t);
    return 30.0 * a * a;
}

/// Transition profile of the forcing: 1 for s <= 1, 0 for s >= 2.
inline double chi(double s) { return 1.0 - smoothstep5(s - 1.0); }

inline constexpr double kChiLipschitz = 15.0 / 8.0;

/// Smallest clearance between any obstacle disk and the domain boundary.
inline double obstacle_clearance(const GeometryConfig& g) {
    double c = std::numeric_limits<double>::infinity();
    for (const auto* list : {&g.obstacles_plus, &g.obstacles_minus})
        for (const auto& k : *list) c = std::min(c, g.domain.dist_to_boundary(k.center) - k.radius);
    return c;
}

/// Gap between O+ and O- (infinite when either is empty).
inline double obstacle_gap(const GeometryConfig& g) {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& a : g.obstacles_plus)
        for (const auto& b : g.obstacles_minus) gap = std::min(gap, distance(a.center, b.center) - a.radius - b.radius);
    return gap;
}

/// 0.1 * shorter side, capped at 0.45 * obstacle clearance.
inline double default_c4(const GeometryConfig& g) {
    double c4 = 0.1 * std::min(g.domain.width(), g.domain.height());
    const double cl = obstacle_clearance(g);
    if (std::isfinite(cl)) c4 = std::min(c4, 0.45 * cl);
    return c4;
}

inline double effective_c4(const GeometryConfig& g) { return g.c4 > 0.0 ? g.c4 : default_c4(g); }

/// c1 chi(d+/sqrt eps) - c1 chi(d-/sqrt eps)
inline double forcing_g(Point x, double eps, const GeometryConfig& cfg, double c1) {
    const double se = std::sqrt(eps);
    double g = 0.0;
    if (!cfg.obstacles_plus.empty()) g += c1 * chi(dist_to_set(x, cfg.obstacles_plus) / se);
    if (!cfg.obstacles_minus.empty()) g -= c1 * chi(dist_to_set(x, cfg.obstacles_minus) / se);
    return g;
}

inline double forcing_g(Point x, double eps, const GeometryConfig& cfg) {
    return forcing_g(x, eps, cfg, compute_c1(2, cfg.R0, cfg.delta));
}

/// Separation problems of the forcing bands at this eps. With hard = true:
/// O+ and O- bands that meet; otherwise: bands reaching the c4 boundary collar.
inline std::vector<std::string> forcing_band_violations(const GeometryConfig& cfg, double eps, bool hard) {
    std::vector<std::string> out;
    const double se = std::sqrt(eps);
    if (hard) {
        const double gap = obstacle_gap(cfg);
        if (gap < 3.0 * se)
            out.push_back("forcing: O+ and O- bands overlap (gap " + std::to_string(gap) + " < 3 sqrt(eps) = " +
                          std::to_string(3.0 * se) + ")");
        return out;
    }
    const double c4 = effective_c4(cfg);
    const double cl = obstacle_clearance(cfg);
    if (std::isfinite(cl) && cl - 2.0 * se < c4)
        out.push_back("forcing band 2 sqrt(eps) = " + std::to_string(2.0 * se) + " reaches the boundary collar c4 = " +
                      std::to_string(c4) + " (obstacle clearance " + std::to_string(cl) + ") at eps = " +
                      std::to_string(eps));
    return out;
}

/// Grid samples of g^eps together with its constants.
class ForcingField {
public:
    ForcingField() = default;

    /// With enforce_collar = false, a forcing band reaching into the c4
    /// boundary collar is recorded in warnings() instead of rejected.
    ForcingField(const GeometryConfig& cfg, const Grid& grid, double eps, bool enforce_collar = true)
        : grid_(grid), eps_(eps), sqrt_eps_(std::sqrt(eps)) {
        if (!(eps > 0.0)) throw ConfigError("forcing: eps must be positive");
        const bool any = !cfg.obstacles_plus.empty() || !cfg.obstacles_minus.empty();
        c1_ = any ? compute_c1(2, cfg.R0, cfg.delta) : 0.0;
        c2_ = kChiLipschitz * c1_;

        for (auto& msg : forcing_band_violations(cfg, eps, true)) throw ConfigError(msg);
        for (auto& msg : forcing_band_violations(cfg, eps, false)) {
            if (enforce_collar) throw ConfigError(msg);
            warnings_.push_back(msg);
        }

        values_.resize(grid.size());
        long bad = 0;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const Point p = grid.center(i, j);
                const double g = any ? forcing_g(p, eps, cfg, c1_) : 0.0;
                values_[grid.index(i, j)] = g;
                const double dp = dist_to_set_or_inf(p, cfg.obstacles_plus);
                const double dm = dist_to_set_or_inf(p, cfg.obstacles_minus);
                if (dp <= sqrt_eps_ && g != c1_) ++bad;
                if (dm <= sqrt_eps_ && g != -c1_) ++bad;
                if (dp >= 2.0 * sqrt_eps_ && dm >= 2.0 * sqrt_eps_ && g != 0.0) ++bad;
            }
        if (bad != 0) throw std::logic_error("forcing field does not match its plateau values on " + std::to_string(bad) + " nodes");
    }

    double operator[](std::size_t k) const { return values_[k]; }
    double at(int i, int j) const { return values_[grid_.index(i, j)]; }
    const std::vector<double>& values() const { return values_; }
    const Grid& grid() const { return grid_; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double eps() const { return eps_; }
    double sqrt_eps() const { return sqrt_eps_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Max of the centered-difference gradient magnitude (one-sided at the edges).
    double gradient_sup() const {
        double m = 0.0;
        const double h = grid_.h;
        for (int j = 0; j < grid_.ny; ++j)
            for (int i = 0; i < grid_.nx; ++i) {
                const int il = std::max(i - 1, 0), ir = std::min(i + 1, grid_.nx - 1);
                const int jd = std::max(j - 1, 0), ju = std::min(j + 1, grid_.ny - 1);
                const double gx = (at(ir, j) - at(il, j)) / ((ir - il) * h);
                const double gy = (at(i, ju) - at(i, jd)) / ((ju - jd) * h);
                m = std::max(m, std::hypot(gx, gy));
            }
        return m;
    }

private:
    Grid grid_;
    double eps_ = 0.0, sqrt_eps_ = 0.0, c1_ = 0.0, c2_ = 0.0;
    std::vector<double> values_;
    std::vector<std::string> warnings_;
};

/// Mirror of x across the unique nearest edge of the rectangle.
///
/// Accepts points on either side of that edge within c4 of it. Points within
/// c4 of two edges (corner zone) or farther than c4 from every edge throw.
inline Point reflection_point(Point x, const Rect& dom, double c4) {
    const double d[4] = {x.x - dom.x_min, dom.x_max - x.x, x.y - dom.y_min, dom.y_max - x.y};
    int hit = -1, count = 0;
    for (int k = 0; k < 4; ++k)
        if (std::fabs(d[k]) < c4) {
            hit = k;
            ++count;
        }
    if (count == 0) throw ReflectionUndefined("reflection: point is outside the boundary collar");
    if (count > 1) throw ReflectionUndefined("reflection: point lies in a corner zone");
    for (int k = 0; k < 4; ++k)
        if (k != hit && !(d[k] > 0.0)) throw ReflectionUndefined("reflection: point is beyond an adjacent edge");
    switch (hit) {
        case 0: return {2.0 * dom.x_min - x.x, x.y};
        case 1: return {2.0 * dom.x_max - x.x, x.y};
        case 2: return {x.x, 2.0 * dom.y_min - x.y};
        default: return {x.x, 2.0 * dom.y_max - x.y};
    }
}

inline Point reflection_point(Point x, const GeometryConfig& cfg) {
    return reflection_point(x, cfg.domain, effective_c4(cfg));
}

/// Distance from the curve M0 to the disk k (0 when they meet).
inline double interface_to_disk(const InterfaceM0& m0, const Disk& k) {
    if (const auto* c = std::get_if<CircleM0>(&m0))
        return std::max(0.0, std::fabs(distance(c->center, k.center) - c->radius) - k.radius);
    const auto& s = std::get<SegmentM0>(m0);
    const double coord = s.vertical ? k.center.x : k.center.y;
    return std::max(0.0, std::fabs(coord - s.position) - k.radius);
}

/// Signed side of a point relative to M0: positive in U0.
inline double interface_side(const InterfaceM0& m0, Point p) {
    if (const auto* c = std::get_if<CircleM0>(&m0)) return c->radius - distance(p, c->center);
    const auto& s = std::get<SegmentM0>(m0);
    return s.inside_sign * ((s.vertical ? p.x : p.y) - s.position);
}

/// Structural assumptions on obstacles and the initial interface.
inline Report validate_assumptions(const GeometryConfig& cfg, const InterfaceM0& m0) {
    Report rep;
    bool equal = true;
    for (const auto* list : {&cfg.obstacles_plus, &cfg.obstacles_minus})
        for (const auto& k : *list) equal = equal && std::fabs(k.radius - cfg.R0) <= 1e-12 * cfg.R0;
    rep.add("A1 interior ball condition (disks of radius R0)", equal && cfg.R0 > 0.0, cfg.R0, 0.0);

    const double gap = obstacle_gap(cfg);
    rep.add("A2 dist(O+,O-) >= R1 > 0", !std::isfinite(gap) || (gap >= cfg.R1 && gap > 0.0),
            std::isfinite(gap) ? gap : 0.0, cfg.R1, std::isfinite(gap) ? "" : "vacuous: one side empty");

    const double c4 = effective_c4(cfg);
    const double cl = obstacle_clearance(cfg);
    if (std::isfinite(cl)) {
        rep.add("obstacle clearance > delta", cl > cfg.delta, cl, cfg.delta);
        rep.add("obstacle clearance > 2 c4", cl > 2.0 * c4, cl, 2.0 * c4);
    }

    if (const auto* c = std::get_if<CircleM0>(&m0)) {
        const double margin = cfg.domain.dist_to_boundary(c->center) - c->radius;
        rep.add("A3 M0 away from the boundary (circle)", margin > 0.0 && c->radius > 0.0, margin, 0.0);
        rep.add("A5 right-angle contact", true, 0.0, 0.0, "vacuous: no boundary contact");
    } else {
        const auto& s = std::get<SegmentM0>(m0);
        const double lo = s.vertical ? cfg.domain.x_min : cfg.domain.y_min;
        const double hi = s.vertical ? cfg.domain.x_max : cfg.domain.y_max;
        const double margin = std::min(s.position - lo, hi - s.position);
        rep.add("A3 M0 meets the boundary inside an edge", margin > 0.0, margin, 0.0);
        rep.add("A5 right-angle contact", std::abs(s.inside_sign) == 1, 90.0, 90.0, "chord perpendicular to both edges");
    }

    double m_plus = std::numeric_limits<double>::infinity(), m_minus = m_plus;
    bool sides = true;
    for (const auto& k : cfg.obstacles_plus) {
        m_plus = std::min(m_plus, interface_to_disk(m0, k));
        sides = sides && interface_side(m0, k.center) > 0.0;
    }
    for (const auto& k : cfg.obstacles_minus) {
        m_minus = std::min(m_minus, interface_to_disk(m0, k));
        sides = sides && interface_side(m0, k.center) < 0.0;
    }
    const double m = std::min(m_plus, m_minus);
    rep.add("A4 dist(M0, O+-) > 0", !std::isfinite(m) || m > 0.0, std::isfinite(m) ? m : 0.0, 0.0);
    rep.add("A4 O+ in U0, O- outside", sides, 0.0, 0.0);
    return rep;
}

}  // namespace pfobs
