#pragma once

#include <cmath>
#include <limits>

namespace pfobs {

/// Nonnegative real with an unbounded binary exponent: value = m * 2^e.
///
/// Used for the distance of u to the nearest well, which decays far below
/// the smallest double in saturated regions. The mantissa is kept lazily
/// normalized (only rescaled when it drifts out of [2^-300, 2^300]).
struct XReal {
    double m = 0.0;
    long e = 0;

    static XReal from_double(double x) { return normalized(x, 0); }

    static XReal normalized(double m, long e) {
        if (m == 0.0 || !std::isfinite(m)) return {m, m == 0.0 ? 0 : e};
        if (m < 0x1p-300 || m > 0x1p300) {
            int k = 0;
            m = std::frexp(m, &k);
            e += k;
        }
        return {m, e};
    }

    double to_double() const { return scale(m, e); }

    /// log10 of the value; -inf for zero.
    double log10() const {
        if (m <= 0.0) return -std::numeric_limits<double>::infinity();
        return std::log10(m) + static_cast<double>(e) * 0.30102999566398119521;
    }

    /// x * 2^k without overflow/underflow surprises for very negative k.
    static double scale(double x, long k) {
        if (k == 0 || x == 0.0) return x;
        if (k < -2200) return 0.0;
        if (k > 2200) return x * std::numeric_limits<double>::infinity();
        return std::ldexp(x, static_cast<int>(k));
    }

    friend XReal operator*(XReal a, XReal b) { return normalized(a.m * b.m, a.e + b.e); }

    friend XReal operator+(XReal a, XReal b) {
        if (a.m == 0.0) return b;
        if (b.m == 0.0) return a;
        const long ref = a.e > b.e ? a.e : b.e;
        return normalized(scale(a.m, a.e - ref) + scale(b.m, b.e - ref), ref);
    }

    /// |a - b|
    friend XReal absdiff(XReal a, XReal b) {
        const long ref = a.e > b.e ? a.e : b.e;
        return normalized(std::fabs(scale(a.m, a.e - ref) - scale(b.m, b.e - ref)), ref);
    }

    friend bool operator<(XReal a, XReal b) {
        if (a.m == 0.0 || b.m == 0.0) return a.m < b.m;
        return a.log10() < b.log10();
    }
};

}  // namespace pfobs
