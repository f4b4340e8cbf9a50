#pragma once

#include <cmath>
#include <cstddef>

#include "pfobs/errors.hpp"

namespace pfobs {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rect {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool contains(Point p) const { return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max; }
    double dist_to_boundary(Point p) const {
        return std::fmin(std::fmin(p.x - x_min, x_max - p.x), std::fmin(p.y - y_min, y_max - p.y));
    }
};

/// Cell-centred uniform grid: node (i, j) sits at (x_min + (i+1/2)h, y_min + (j+1/2)h).
/// Storage is row-major with j the row index.
struct Grid {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    Rect domain;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    Point center(int i, int j) const {
        return {domain.x_min + (i + 0.5) * h, domain.y_min + (j + 0.5) * h};
    }
    double cell_area() const { return h * h; }

    /// Square cells with h <= h_max; both sides must be integer multiples of h.
    static Grid for_domain(const Rect& r, double h_max) {
        if (!(h_max > 0.0)) throw ConfigError("grid: spacing bound must be positive");
        if (!(r.width() > 0.0 && r.height() > 0.0)) throw ConfigError("grid: empty domain");
        const double short_side = std::fmin(r.width(), r.height());
        const int n_short = static_cast<int>(std::ceil(short_side / h_max - 1e-9));
        Grid g;
        g.h = short_side / n_short;
        g.domain = r;
        const double fx = r.width() / g.h;
        const double fy = r.height() / g.h;
        g.nx = static_cast<int>(std::lround(fx));
        g.ny = static_cast<int>(std::lround(fy));
        if (std::fabs(fx - g.nx) > 1e-6 || std::fabs(fy - g.ny) > 1e-6)
            throw ConfigError("grid: domain sides are not commensurate with a square cell of size <= h_max");
        return g;
    }
};

}  // namespace pfobs
