#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "pfobs/errors.hpp"
#include "pfobs/geometry.hpp"
#include "pfobs/phase_state.hpp"
#include "pfobs/potential.hpp"
#include "pfobs/solver.hpp"
#include "pfobs/xreal.hpp"

namespace pfobs {

struct Ball {
    Point center;
    double radius = 0.0;
};

/// |u_b - u_a| kept accurate when both cells sit in the same well.
inline XReal u_absdiff(const PhaseState& s, std::size_t a, std::size_t b) {
    if (s.sign[a] == s.sign[b]) return absdiff(s.vx(a), s.vx(b));
    return XReal::from_double(std::fabs(s.u(b) - s.u(a)));
}

/// u_b - u_a as a double.
inline double u_diff(const PhaseState& s, std::size_t a, std::size_t b) {
    if (s.sign[a] == s.sign[b]) {
        const long ref = std::max(s.expo[a], s.expo[b]);
        const double d = XReal::scale(s.mant[a], s.expo[a] - ref) - XReal::scale(s.mant[b], s.expo[b] - ref);
        return s.sign[a] * XReal::scale(d, ref);
    }
    return s.u(b) - s.u(a);
}

/// Per-cell |grad u|^2 as (1/2h^2) sum over the four Neumann neighbours of (u_nb - u)^2.
inline double grad2_cell(const PhaseState& s, int i, int j) {
    std::size_t nb[4];
    neighbours(s.grid, i, j, nb);
    const std::size_t k = s.grid.index(i, j);
    double acc = 0.0;
    for (std::size_t q : nb) {
        const double d = u_diff(s, k, q);
        acc += d * d;
    }
    return acc / (2.0 * s.grid.h * s.grid.h);
}

inline XReal grad2_cell_x(const PhaseState& s, int i, int j) {
    std::size_t nb[4];
    neighbours(s.grid, i, j, nb);
    const std::size_t k = s.grid.index(i, j);
    XReal acc{0.0, 0};
    for (std::size_t q : nb) {
        const XReal d = u_absdiff(s, k, q);
        acc = acc + d * d;
    }
    return acc * XReal::from_double(1.0 / (2.0 * s.grid.h * s.grid.h));
}

template <DoubleWell P>
double W_cell(const PhaseState& s, std::size_t k, const P& pot) {
    return pot.W_well(s.sign[k], s.v(k));
}

/// W at a cell as an extended number; exact factorisation for the quartic family.
template <DoubleWell P>
XReal W_cell_x(const PhaseState& s, std::size_t k, const P& pot) {
    const XReal v = s.vx(k);
    const double vd = s.v(k);
    if (vd > 1e-3) return XReal::from_double(pot.W_well(s.sign[k], vd));
    // W(u) = (W(u)/v^2) v^2 with the bracket evaluated at a representable v
    const double probe = std::max(vd, 1e-100);
    const double ratio = pot.W_well(s.sign[k], probe) / (probe * probe);
    return v * v * XReal::from_double(ratio);
}

inline bool in_ball(Point p, const std::optional<Ball>& b) {
    return !b || distance(p, b->center) < b->radius;
}

/// mu(region) = (1/sigma) sum [eps |grad u|^2 / 2 + W(u) / eps] h^2
template <DoubleWell P>
double measure_mu(const PhaseState& s, const P& pot, const std::optional<Ball>& region = std::nullopt) {
    const double eps = s.eps, a = s.grid.cell_area();
    double acc = 0.0;
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            if (!in_ball(s.grid.center(i, j), region)) continue;
            const std::size_t k = s.grid.index(i, j);
            acc += (0.5 * eps * grad2_cell(s, i, j) + W_cell(s, k, pot) / eps) * a;
        }
    return acc / sigma(pot);
}

/// measure_mu in extended range, for regions where u is saturated.
template <DoubleWell P>
XReal measure_mu_x(const PhaseState& s, const P& pot, const Ball& region) {
    const double eps = s.eps, a = s.grid.cell_area();
    XReal acc{0.0, 0};
    const XReal ge = XReal::from_double(0.5 * eps * a), we = XReal::from_double(a / eps);
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            if (!in_ball(s.grid.center(i, j), region)) continue;
            const std::size_t k = s.grid.index(i, j);
            acc = acc + grad2_cell_x(s, i, j) * ge + W_cell_x(s, k, pot) * we;
        }
    return acc * XReal::from_double(1.0 / sigma(pot));
}

struct XiSummary {
    double signed_total = 0.0;
    double abs_total = 0.0;
    double sup_pointwise = -std::numeric_limits<double>::infinity();
};

/// Discrepancy measure totals and sup of eps |grad u|^2 / 2 - W(u) / eps.
template <DoubleWell P>
XiSummary measure_xi(const PhaseState& s, const P& pot) {
    XiSummary out;
    const double eps = s.eps, a = s.grid.cell_area();
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            const std::size_t k = s.grid.index(i, j);
            const double x = 0.5 * eps * grad2_cell(s, i, j) - W_cell(s, k, pot) / eps;
            out.signed_total += x * a;
            out.abs_total += std::fabs(x) * a;
            out.sup_pointwise = std::max(out.sup_pointwise, x);
        }
    const double sg = sigma(pot);
    out.signed_total /= sg;
    out.abs_total /= sg;
    return out;
}

/// sum g k(u) h^2
template <DoubleWell P>
double forcing_work(const PhaseState& s, const ForcingField& f, const P& pot) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (f[k] != 0.0) acc += f[k] * pot.k(s.u(k));
    return acc * s.grid.cell_area();
}

/// E = sigma mu(Omega) - sum g k(u) h^2
template <DoubleWell P>
double energy(const PhaseState& s, const ForcingField& f, const P& pot) {
    return sigma(pot) * measure_mu(s, pot) - forcing_work(s, f, pot);
}

/// [mu_T + I/sigma] - [mu_0 + (1/sigma) sum g (k(u_T) - k(u_0)) h^2], I = int int eps u_t^2.
template <DoubleWell P>
double mass_balance_residual(const PhaseState& sT, const PhaseState& s0, double ut2_integral, const ForcingField& f,
                             const P& pot) {
    const double sg = sigma(pot);
    double dk = 0.0;
    for (std::size_t k = 0; k < sT.size(); ++k)
        if (f[k] != 0.0) dk += f[k] * (pot.k(sT.u(k)) - pot.k(s0.u(k)));
    dk *= sT.grid.cell_area();
    return (measure_mu(sT, pot) + ut2_integral / sg) - (measure_mu(s0, pot) + dk / sg);
}

/// sup eps |grad u| with centred differences and mirrored ghosts.
inline double grad_sup(const PhaseState& s) {
    double m = 0.0;
    const Grid& g = s.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            std::size_t nb[4];
            neighbours(g, i, j, nb);
            const double gx = u_diff(s, nb[0], nb[1]) / (2.0 * g.h);
            const double gy = u_diff(s, nb[2], nb[3]) / (2.0 * g.h);
            m = std::max(m, std::hypot(gx, gy));
        }
    return s.eps * m;
}

/// Per-cell mu mass (1/sigma)(eps |grad u|^2/2 + W/eps) h^2.
template <DoubleWell P>
std::vector<double> mu_cell_masses(const PhaseState& s, const P& pot) {
    std::vector<double> m(s.size());
    const double eps = s.eps, a = s.grid.cell_area() / sigma(pot);
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            const std::size_t k = s.grid.index(i, j);
            m[k] = (0.5 * eps * grad2_cell(s, i, j) + W_cell(s, k, pot) / eps) * a;
        }
    return m;
}

/// Ball masses from row prefix sums of per-cell masses.
class BallMass {
public:
    BallMass(const Grid& g, const std::vector<double>& cell_mass) : g_(g), pre_((g.nx + 1) * g.ny, 0.0) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                pre_[j * (g.nx + 1) + i + 1] = pre_[j * (g.nx + 1) + i] + cell_mass[g.index(i, j)];
    }

    /// Mass of cells whose centres lie in the union of the balls B_r(c) over centres.
    double union_mass(const std::vector<Point>& centres, double r) const {
        double total = 0.0;
        const double h = g_.h;
        std::vector<std::pair<int, int>> iv;
        const double ylo = std::min_element(centres.begin(), centres.end(), [](Point a, Point b) { return a.y < b.y; })->y - r;
        const double yhi = std::max_element(centres.begin(), centres.end(), [](Point a, Point b) { return a.y < b.y; })->y + r;
        const int j0 = std::max(0, static_cast<int>(std::floor((ylo - g_.domain.y_min) / h - 0.5)));
        const int j1 = std::min(g_.ny - 1, static_cast<int>(std::ceil((yhi - g_.domain.y_min) / h - 0.5)));
        for (int j = j0; j <= j1; ++j) {
            const double yc = g_.domain.y_min + (j + 0.5) * h;
            iv.clear();
            for (const Point& c : centres) {
                const double dy = yc - c.y;
                const double w2 = r * r - dy * dy;
                if (w2 <= 0.0) continue;
                const double w = std::sqrt(w2);
                // cells with |x_i - c.x| < w
                int ia = static_cast<int>(std::floor((c.x - w - g_.domain.x_min) / h - 0.5)) + 1;
                int ib = static_cast<int>(std::ceil((c.x + w - g_.domain.x_min) / h - 0.5)) - 1;
                while (ia - 1 >= 0 && std::fabs(g_.domain.x_min + (ia - 0.5) * h - c.x) < w) --ia;
                while (ib + 1 < g_.nx && std::fabs(g_.domain.x_min + (ib + 1.5) * h - c.x) < w) ++ib;
                ia = std::max(ia, 0);
                ib = std::min(ib, g_.nx - 1);
                if (ia <= ib) iv.emplace_back(ia, ib);
            }
            if (iv.empty()) continue;
            std::sort(iv.begin(), iv.end());
            int cs = iv[0].first, ce = iv[0].second;
            const double* row = &pre_[j * (g_.nx + 1)];
            for (std::size_t n = 1; n < iv.size(); ++n) {
                if (iv[n].first <= ce + 1) {
                    ce = std::max(ce, iv[n].second);
                } else {
                    total += row[ce + 1] - row[cs];
                    cs = iv[n].first;
                    ce = iv[n].second;
                }
            }
            total += row[ce + 1] - row[cs];
        }
        return total;
    }

private:
    Grid g_;
    std::vector<double> pre_;
};

/// Centre plus its mirror images across every edge closer than c4.
inline std::vector<Point> mirrored_centres(Point y, const Rect& dom, double c4) {
    std::vector<Point> c{y};
    std::vector<double> mx{y.x}, my{y.y};
    if (y.x - dom.x_min < c4) mx.push_back(2 * dom.x_min - y.x);
    if (dom.x_max - y.x < c4) mx.push_back(2 * dom.x_max - y.x);
    if (y.y - dom.y_min < c4) my.push_back(2 * dom.y_min - y.y);
    if (dom.y_max - y.y < c4) my.push_back(2 * dom.y_max - y.y);
    c.clear();
    for (double a : mx)
        for (double b : my) c.push_back({a, b});
    return c;
}

/// Eight radii spaced geometrically strictly inside (2h, c4).
inline std::vector<double> default_radii(double h, double c4, int count = 8) {
    if (!(c4 > 2.0 * h)) throw DomainError("density ratio: c4 must exceed 2h");
    std::vector<double> r(count);
    for (int n = 0; n < count; ++n) r[n] = 2.0 * h * std::pow(c4 / (2.0 * h), double(n + 1) / (count + 1));
    return r;
}

inline std::vector<Point> sublattice_centres(const Grid& g, int stride) {
    std::vector<Point> c;
    const int off = stride / 2;
    for (int j = off; j < g.ny; j += stride)
        for (int i = off; i < g.nx; i += stride) c.push_back(g.center(i, j));
    return c;
}

/// max over centres y and radii r of mu(B_r(y) [u reflected ball]) / (2r).
template <DoubleWell P>
double density_ratio(const PhaseState& s, const P& pot, const std::vector<Point>& centres,
                     const std::vector<double>& radii, double c4) {
    for (double r : radii)
        if (!(r > 0.0 && r < c4)) throw DomainError("density ratio: radius outside (0, c4)");
    const BallMass bm(s.grid, mu_cell_masses(s, pot));
    double best = 0.0;
    for (const Point& y : centres) {
        const std::vector<Point> cs = mirrored_centres(y, s.grid.domain, c4);
        for (double r : radii) best = std::max(best, bm.union_mass(cs, r) / (2.0 * r));
    }
    return best;
}

template <DoubleWell P>
double density_ratio(const PhaseState& s, const P& pot, double c4, int stride) {
    return density_ratio(s, pot, sublattice_centres(s.grid, stride), default_radii(s.grid.h, c4), c4);
}

/// (4 pi tau)^(-1/2) exp(-|x-y|^2 / (4 tau)), the one-dimensional backward heat kernel.
inline double backward_heat_kernel(Point x, Point y, double tau) {
    const double r2 = (x.x - y.x) * (x.x - y.x) + (x.y - y.y) * (x.y - y.y);
    return std::exp(-r2 / (4.0 * tau)) / std::sqrt(4.0 * std::numbers::pi * tau);
}

/// Cutoff: 1 on [0, c4/4], 0 on [c4/2, inf).
inline double kernel_cutoff(double r, double c4) {
    return 1.0 - smoothstep5((r - 0.25 * c4) / (0.25 * c4));
}

struct KernelProbe {
    Point y;
    double s = 0.0;
    bool boundary = false;
    double c4 = 0.0;
};

/// int (rho1 [+ rho2]) d mu_t over grid cells.
template <DoubleWell P>
double heat_kernel_functional(const PhaseState& st, const P& pot, const KernelProbe& probe) {
    if (!(probe.s > st.t)) throw DomainError("heat kernel: probe time must exceed the state time");
    const Rect& dom = st.grid.domain;
    const double dy = dom.dist_to_boundary(probe.y);
    if (probe.boundary && !(dy <= 0.5 * probe.c4)) throw DomainError("heat kernel: boundary probe too far from the boundary");
    if (!probe.boundary && !(dy > 0.5 * probe.c4)) throw DomainError("heat kernel: interior probe inside the collar");
    int edge = -1;
    if (probe.boundary) {
        const double d[4] = {probe.y.x - dom.x_min, dom.x_max - probe.y.x, probe.y.y - dom.y_min, dom.y_max - probe.y.y};
        int close = 0;
        for (int k = 0; k < 4; ++k)
            if (d[k] < probe.c4) {
                ++close;
                edge = k;
            }
        if (close != 1) throw ReflectionUndefined("heat kernel: probe lies in a corner zone");
    }
    const double tau = probe.s - st.t;
    const std::vector<double> m = mu_cell_masses(st, pot);
    double acc = 0.0;
    for (int j = 0; j < st.grid.ny; ++j)
        for (int i = 0; i < st.grid.nx; ++i) {
            const Point x = st.grid.center(i, j);
            const std::size_t k = st.grid.index(i, j);
            const double r1 = distance(x, probe.y);
            double w = 0.0;
            if (r1 < 0.5 * probe.c4) w += kernel_cutoff(r1, probe.c4) * backward_heat_kernel(x, probe.y, tau);
            if (edge >= 0) {
                Point xt = x;
                if (edge == 0) xt.x = 2 * dom.x_min - x.x;
                if (edge == 1) xt.x = 2 * dom.x_max - x.x;
                if (edge == 2) xt.y = 2 * dom.y_min - x.y;
                if (edge == 3) xt.y = 2 * dom.y_max - x.y;
                const double r2 = distance(xt, probe.y);
                if (r2 < 0.5 * probe.c4) w += kernel_cutoff(r2, probe.c4) * backward_heat_kernel(xt, probe.y, tau);
            }
            acc += w * m[k];
        }
    return acc;
}

struct Polyline {
    std::vector<Point> points;
    bool closed = false;

    double length() const {
        double l = 0.0;
        for (std::size_t n = 1; n < points.size(); ++n) l += distance(points[n - 1], points[n]);
        if (closed && points.size() > 1) l += distance(points.back(), points.front());
        return l;
    }
    /// Shoelace area (closed curves only).
    double area() const {
        if (!closed) return 0.0;
        double a = 0.0;
        for (std::size_t n = 0; n < points.size(); ++n) {
            const Point& p = points[n];
            const Point& q = points[(n + 1) % points.size()];
            a += p.x * q.y - q.x * p.y;
        }
        return 0.5 * std::fabs(a);
    }
};

struct Interface {
    std::vector<Polyline> lines;
    double length = 0.0;
};

namespace detail {

/// Liang-Barsky clip of segment ab to the rectangle.
inline bool clip_segment(Point& a, Point& b, const Rect& r) {
    double t0 = 0.0, t1 = 1.0;
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - r.x_min, r.x_max - a.x, a.y - r.y_min, r.y_max - a.y};
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) return false;
            continue;
        }
        const double t = q[k] / p[k];
        if (p[k] < 0.0)
            t0 = std::max(t0, t);
        else
            t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
    const Point a0 = a;
    // unclipped ends are kept bit-exact so callers can detect clipping by comparison
    if (t0 > 0.0) a = {a0.x + t0 * dx, a0.y + t0 * dy};
    if (t1 < 1.0) b = {a0.x + t1 * dx, a0.y + t1 * dy};
    return true;
}

}  // namespace detail

/// Zero level set of a cell-centred field by marching squares.
///
/// The field is padded with one mirrored ghost layer so contours reach the
/// boundary; the result is clipped to the domain. Saddles are resolved by the
/// sign of the cell average.
inline Interface extract_interface(const std::vector<double>& u, const Grid& g) {
    const int NX = g.nx + 2, NY = g.ny + 2;
    auto val = [&](int I, int J) {
        const int i = std::clamp(I - 1, 0, g.nx - 1), j = std::clamp(J - 1, 0, g.ny - 1);
        return u[g.index(i, j)];
    };
    auto pos = [&](int I, int J) { return Point{g.domain.x_min + (I - 0.5) * g.h, g.domain.y_min + (J - 0.5) * g.h}; };
    const long hcount = static_cast<long>(NX - 1) * NY;
    auto hedge = [&](int I, int J) { return static_cast<long>(J) * (NX - 1) + I; };
    auto vedge = [&](int I, int J) { return hcount + static_cast<long>(J) * NX + I; };
    auto crossing = [&](int I0, int J0, int I1, int J1) {
        const double a = val(I0, J0), b = val(I1, J1);
        const double t = a / (a - b);
        const Point p = pos(I0, J0), q = pos(I1, J1);
        return Point{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
    };

    std::map<long, Point> edge_point;
    std::map<long, std::vector<long>> adj;  // edge -> linked edges
    auto link = [&](long e1, Point p1, long e2, Point p2) {
        edge_point[e1] = p1;
        edge_point[e2] = p2;
        adj[e1].push_back(e2);
        adj[e2].push_back(e1);
    };

    for (int J = 0; J + 1 < NY; ++J)
        for (int I = 0; I + 1 < NX; ++I) {
            const double v0 = val(I, J), v1 = val(I + 1, J), v2 = val(I + 1, J + 1), v3 = val(I, J + 1);
            const int c = (v0 >= 0) | ((v1 >= 0) << 1) | ((v2 >= 0) << 2) | ((v3 >= 0) << 3);
            if (c == 0 || c == 15) continue;
            // edges: bottom(0) right(1) top(2) left(3)
            const long e[4] = {hedge(I, J), vedge(I + 1, J), hedge(I, J + 1), vedge(I, J)};
            auto pt = [&](int k) {
                switch (k) {
                    case 0: return crossing(I, J, I + 1, J);
                    case 1: return crossing(I + 1, J, I + 1, J + 1);
                    case 2: return crossing(I, J + 1, I + 1, J + 1);
                    default: return crossing(I, J, I, J + 1);
                }
            };
            auto seg = [&](int a, int b) { link(e[a], pt(a), e[b], pt(b)); };
            const bool centre_pos = 0.25 * (v0 + v1 + v2 + v3) >= 0.0;
            switch (c) {
                case 1: case 14: seg(3, 0); break;
                case 2: case 13: seg(0, 1); break;
                case 3: case 12: seg(3, 1); break;
                case 4: case 11: seg(1, 2); break;
                case 6: case 9: seg(0, 2); break;
                case 7: case 8: seg(3, 2); break;
                case 5:
                    if (centre_pos) { seg(3, 2); seg(0, 1); } else { seg(3, 0); seg(1, 2); }
                    break;
                case 10:
                    if (centre_pos) { seg(3, 0); seg(1, 2); } else { seg(3, 2); seg(0, 1); }
                    break;
                default: break;
            }
        }

    // walk chains of edges
    std::vector<Polyline> raw;
    std::map<long, bool> seen;
    auto walk = [&](long start) {
        Polyline pl;
        long prev = -1, cur = start;
        while (true) {
            seen[cur] = true;
            pl.points.push_back(edge_point[cur]);
            long next = -1;
            for (long n : adj[cur])
                if (n != prev && !seen[n]) {
                    next = n;
                    break;
                }
            if (next < 0) {
                for (long n : adj[cur])
                    if (n == start && n != prev && pl.points.size() > 2) pl.closed = true;
                break;
            }
            prev = cur;
            cur = next;
        }
        raw.push_back(std::move(pl));
    };
    for (const auto& [e, nbrs] : adj)
        if (nbrs.size() == 1 && !seen[e]) walk(e);
    for (const auto& [e, nbrs] : adj)
        if (!seen[e]) walk(e);

    Interface out;
    for (const Polyline& pl : raw) {
        const std::size_t n = pl.points.size();
        const std::size_t nseg = pl.closed ? n : (n > 0 ? n - 1 : 0);
        bool all_inside = true;
        for (const Point& p : pl.points)
            all_inside = all_inside && p.x >= g.domain.x_min && p.x <= g.domain.x_max && p.y >= g.domain.y_min &&
                         p.y <= g.domain.y_max;
        if (all_inside) {
            out.lines.push_back(pl);
            continue;
        }
        Polyline cur;
        for (std::size_t s = 0; s < nseg; ++s) {
            Point a = pl.points[s], b = pl.points[(s + 1) % n];
            const Point a_orig = a;
            if (!detail::clip_segment(a, b, g.domain)) {
                if (cur.points.size() > 1) out.lines.push_back(cur);
                cur = {};
                continue;
            }
            if (cur.points.empty() || a.x != a_orig.x || a.y != a_orig.y) {
                if (cur.points.size() > 1) out.lines.push_back(cur);
                cur = {};
                cur.points.push_back(a);
            }
            cur.points.push_back(b);
            const Point b_orig = pl.points[(s + 1) % n];
            if (b.x != b_orig.x || b.y != b_orig.y) {
                if (cur.points.size() > 1) out.lines.push_back(cur);
                cur = {};
            }
        }
        if (cur.points.size() > 1) out.lines.push_back(cur);
    }
    for (const auto& l : out.lines) out.length += l.length();
    return out;
}

inline Interface extract_interface(const PhaseState& s) { return extract_interface(s.u_values(), s.grid); }

/// Smallest distance from p to any segment of the interface.
inline double min_distance_to_point(const Interface& itf, Point p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : itf.lines) {
        const std::size_t n = l.points.size();
        const std::size_t nseg = l.closed ? n : n - 1;
        for (std::size_t s = 0; s < nseg; ++s) {
            const Point a = l.points[s], b = l.points[(s + 1) % n];
            const double dx = b.x - a.x, dy = b.y - a.y;
            const double L2 = dx * dx + dy * dy;
            double t = L2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / L2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            best = std::min(best, std::hypot(a.x + t * dx - p.x, a.y + t * dy - p.y));
        }
    }
    return best;
}

/// One row of diagnostics.csv plus run-level extras that are not part of the CSV.
struct DiagnosticsRecord {
    double t = 0.0;
    double energy = 0.0;
    double mu_total = 0.0;
    double xi_total_abs = 0.0;
    double xi_sup = 0.0;
    double grad_sup = 0.0;
    double density_ratio_max = 0.0;
    double interface_length = 0.0;
    double mass_balance_residual = 0.0;
    double obstacle_mass = std::numeric_limits<double>::quiet_NaN();
    double min_gap_sub = std::numeric_limits<double>::quiet_NaN();
    double min_gap_super = std::numeric_limits<double>::quiet_NaN();
    double obstacle_dev = std::numeric_limits<double>::quiet_NaN();

    double xi_signed = 0.0;
    double obstacle_mass_log10 = std::numeric_limits<double>::quiet_NaN();
    double min_log10_v = 0.0;
    long near_well_cells = 0;
    long step_index = 0;
};

struct DiagnosticsOptions {
    double c4 = 0.1;
    int density_stride = 4;
    std::optional<Ball> obstacle_ball;
};

/// All solver-side columns of a record (barrier columns are filled by the caller).
template <DoubleWell P>
DiagnosticsRecord compute_record(const PhaseState& s, const PhaseState& s0, double ut2_integral, const ForcingField& f,
                                 const P& pot, const DiagnosticsOptions& opt) {
    DiagnosticsRecord r;
    r.t = s.t;
    r.step_index = s.step_index;
    r.mu_total = measure_mu(s, pot);
    r.energy = sigma(pot) * r.mu_total - forcing_work(s, f, pot);
    const XiSummary xi = measure_xi(s, pot);
    r.xi_total_abs = xi.abs_total;
    r.xi_signed = xi.signed_total;
    r.xi_sup = xi.sup_pointwise;
    r.grad_sup = grad_sup(s);
    r.density_ratio_max = density_ratio(s, pot, opt.c4, opt.density_stride);
    r.interface_length = extract_interface(s).length;
    r.mass_balance_residual = mass_balance_residual(s, s0, ut2_integral, f, pot);
    if (opt.obstacle_ball) {
        const XReal m = measure_mu_x(s, pot, *opt.obstacle_ball);
        r.obstacle_mass = m.to_double();
        r.obstacle_mass_log10 = m.log10();
    }
    r.min_log10_v = s.min_log10_v();
    r.near_well_cells = s.count_near_wells();
    return r;
}

}  // namespace pfobs
