#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pfobs/errors.hpp"
#include "pfobs/grid.hpp"
#include "pfobs/xreal.hpp"

namespace pfobs {

/// Discrete phase field u on a cell-centred grid.
///
/// Each cell holds sign(u) and v = 1 - |u| as an extended-exponent number, so
/// saturated cells keep a strictly positive distance to the wells even when
/// that distance is far below the double range.
struct PhaseState {
    Grid grid;
    double eps = 0.0;
    double t = 0.0;
    long step_index = 0;
    std::vector<std::int8_t> sign;
    std::vector<double> mant;
    std::vector<long> expo;

    PhaseState() = default;
    PhaseState(const Grid& g, double eps_) : grid(g), eps(eps_), sign(g.size(), 1), mant(g.size(), 1.0), expo(g.size(), 0) {}

    std::size_t size() const { return sign.size(); }

    XReal vx(std::size_t k) const { return {mant[k], expo[k]}; }
    double v(std::size_t k) const { return XReal::scale(mant[k], expo[k]); }
    double u(std::size_t k) const { return sign[k] * (1.0 - v(k)); }
    double u(int i, int j) const { return u(grid.index(i, j)); }

    void set(std::size_t k, int s, XReal dist) {
        sign[k] = static_cast<std::int8_t>(s >= 0 ? 1 : -1);
        mant[k] = dist.m;
        expo[k] = dist.e;
    }

    std::vector<double> u_values() const {
        std::vector<double> out(size());
        for (std::size_t k = 0; k < size(); ++k) out[k] = u(k);
        return out;
    }

    /// Requires |u| < 1 everywhere.
    static PhaseState from_u(const Grid& g, double eps, const std::vector<double>& u) {
        if (u.size() != g.size()) throw DomainError("from_u: size mismatch");
        PhaseState s(g, eps);
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (!(std::fabs(u[k]) < 1.0)) throw DomainError("from_u: |u| must be < 1");
            s.set(k, u[k] >= 0.0 ? 1 : -1, XReal::from_double(1.0 - std::fabs(u[k])));
        }
        return s;
    }

    /// log10 of the smallest well distance.
    double min_log10_v() const {
        double m = 0.0;
        for (std::size_t k = 0; k < size(); ++k) m = std::fmin(m, vx(k).log10());
        return m;
    }

    /// Cells with |u| >= 1 - threshold.
    long count_near_wells(double threshold = 1e-12) const {
        const double lt = std::log10(threshold);
        long n = 0;
        for (std::size_t k = 0; k < size(); ++k)
            if (vx(k).log10() <= lt) ++n;
        return n;
    }

    /// True when every cell has 0 < v <= 1 in the exact representation.
    bool strictly_inside() const {
        for (std::size_t k = 0; k < size(); ++k)
            if (!(mant[k] > 0.0) || !(v(k) <= 1.0)) return false;
        return true;
    }
};

}  // namespace pfobs
