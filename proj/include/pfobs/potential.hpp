#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <string>
#include <vector>

#include "pfobs/errors.hpp"
#include "pfobs/report.hpp"

namespace pfobs {

/// Requirements on a double-well potential W and its standing-wave profile q.
///
/// Besides the pointwise evaluators, a potential exposes its reaction terms
/// in the "well frame": for u = sign * (1 - v) with v in (0, 1],
///   relax_rate(sign, v)    = -sign * W'(u) / v
///   root2w_over_v(sign, v) = sqrt(2 W(u)) / v
/// Both stay finite as v -> 0 for a nondegenerate well, which is what lets the
/// solver advance v without ever forming 1 - v in floating point.
template <class P>
concept DoubleWell = requires(const P& p, double s, int sign) {
    { p.W(s) } -> std::convertible_to<double>;
    { p.dW(s) } -> std::convertible_to<double>;
    { p.d2W(s) } -> std::convertible_to<double>;
    { p.q(s) } -> std::convertible_to<double>;
    { p.dq(s) } -> std::convertible_to<double>;
    { p.q_inverse(s) } -> std::convertible_to<double>;
    { p.k(s) } -> std::convertible_to<double>;
    { p.G_on_profile(s) } -> std::convertible_to<double>;
    { p.well_distance_on_profile(s) } -> std::convertible_to<double>;
    { p.W_well(sign, s) } -> std::convertible_to<double>;
    { p.relax_rate(sign, s) } -> std::convertible_to<double>;
    { p.root2w_over_v(sign, s) } -> std::convertible_to<double>;
    { p.relax_rate_max() } -> std::convertible_to<double>;
    { p.root2w_over_v_max() } -> std::convertible_to<double>;
    { p.max_abs_d2W() } -> std::convertible_to<double>;
    { p.alpha() } -> std::convertible_to<double>;
    { p.beta() } -> std::convertible_to<double>;
    { p.gamma() } -> std::convertible_to<double>;
};

/// W(s) = lambda (1 - s^2)^2 / 2, profile q(s) = tanh(sqrt(lambda) s).
///
/// lambda = 1 is the default potential (alpha = 1/sqrt 2, beta = 1, gamma = 0).
class QuarticPotential {
public:
    explicit QuarticPotential(double scale = 1.0) : lambda_(scale), root_(std::sqrt(scale)) {
        if (!(scale > 0.0)) throw DomainError("quartic potential: scale must be positive");
    }

    double scale() const { return lambda_; }

    double W(double s) const {
        const double a = 1.0 - s * s;
        return 0.5 * lambda_ * a * a;
    }
    double dW(double s) const { return -2.0 * lambda_ * s * (1.0 - s * s); }
    double d2W(double s) const { return lambda_ * (6.0 * s * s - 2.0); }
    double max_abs_d2W() const { return 4.0 * lambda_; }

    /// sqrt(2W) with the roundoff floor at zero.
    double root2W(double s) const { return std::sqrt(std::max(2.0 * W(s), 0.0)); }

    double q(double s) const { return std::tanh(root_ * s); }
    double dq(double s) const {
        const double t = std::tanh(root_ * s);
        return root_ * (1.0 - t * t);
    }
    double q_inverse(double u) const { return std::atanh(u) / root_; }

    /// k(s) = int_0^s sqrt(2W(a)) da.
    double k(double s) const { return root_ * (s - s * s * s / 3.0); }

    /// G(s) = W'(s)/sqrt(2W(s)) on (-1, 1).
    double G(double s) const {
        if (!(std::fabs(s) < 1.0)) throw DomainError("G is defined only on (-1,1)");
        return -2.0 * root_ * s;
    }
    /// G(q(z)), finite for every real z even where q(z) rounds to +-1.
    double G_on_profile(double z) const { return -2.0 * root_ * std::tanh(root_ * z); }

    /// 1 - |q(z)| without cancellation.
    double well_distance_on_profile(double z) const {
        const double x = std::exp(-2.0 * root_ * std::fabs(z));
        return 2.0 * x / (1.0 + x);
    }

    double W_well(int, double v) const {
        const double a = v * (2.0 - v);
        return 0.5 * lambda_ * a * a;
    }
    double relax_rate(int, double v) const { return 2.0 * lambda_ * (1.0 - v) * (2.0 - v); }
    double root2w_over_v(int, double v) const { return root_ * (2.0 - v); }
    double relax_rate_max() const { return 4.0 * lambda_; }
    double root2w_over_v_max() const { return 2.0 * root_; }

    double alpha() const { return 1.0 / std::sqrt(2.0); }
    double beta() const { return lambda_; }
    double gamma() const { return 0.0; }

    double closed_form_sigma() const { return 4.0 / 3.0 * root_; }

private:
    double lambda_;
    double root_;
};

static_assert(DoubleWell<QuarticPotential>);

namespace detail {

inline double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                               double fm, double fb, double whole, double tol, int depth,
                               double& err_acc) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth <= 0) {
        err_acc += std::fabs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err_acc) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err_acc);
}

}  // namespace detail

/// Adaptive Simpson quadrature. Throws QuadratureError when the recursion
/// bottoms out with an accumulated error estimate above tol.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-13, int max_depth = 40) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double err = 0.0;
    const double val = detail::adaptive_simpson(f, a, b, fa, fm, fb, detail::simpson(fa, fm, fb, a, b), tol,
                                                max_depth, err);
    if (err > tol) throw QuadratureError("adaptive quadrature did not converge", err);
    return val;
}

/// sigma = int_{-1}^{1} sqrt(2 W(a)) da by adaptive quadrature.
template <DoubleWell P>
double sigma_by_quadrature(const P& pot, double tol = 1e-13) {
    return integrate_adaptive([&](double a) { return std::sqrt(std::max(2.0 * pot.W(a), 0.0)); }, -1.0, 1.0,
                              tol);
}

/// Surface-tension normalisation; closed form when the potential provides one.
template <DoubleWell P>
double sigma(const P& pot) {
    if constexpr (requires { pot.closed_form_sigma(); })
        return pot.closed_form_sigma();
    else
        return sigma_by_quadrature(pot);
}

template <DoubleWell P>
double eval_W(const P& pot, double s) { return pot.W(s); }

template <DoubleWell P>
double eval_q(const P& pot, double s) { return pot.q(s); }

template <DoubleWell P>
double eval_k(const P& pot, double s) { return pot.k(s); }

template <DoubleWell P>
double eval_G(const P& pot, double s) {
    if (!(std::fabs(s) < 1.0)) throw DomainError("G is defined only on (-1,1)");
    return pot.dW(s) / std::sqrt(std::max(2.0 * pot.W(s), 0.0));
}

/// Rescaled profile q^eps(s) = q(s / eps).
template <DoubleWell P>
double q_eps(const P& pot, double s, double eps) { return pot.q(s / eps); }

/// Root of q^eps(s) = level by bisection (defaults to level = gamma).
template <DoubleWell P>
double s_gamma_eps(const P& pot, double eps, double level) {
    if (!(eps > 0.0)) throw DomainError("s_gamma_eps: eps must be positive");
    if (!(std::fabs(level) < 1.0)) throw DomainError("s_gamma_eps: level must lie in (-1,1)");
    double lo = -1.0, hi = 1.0;
    while (q_eps(pot, lo, eps) > level) lo *= 2.0;
    while (q_eps(pot, hi, eps) < level) hi *= 2.0;
    for (int it = 0; it < 400 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (q_eps(pot, mid, eps) < level)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

template <DoubleWell P>
double s_gamma_eps(const P& pot, double eps) { return s_gamma_eps(pot, eps, pot.gamma()); }

/// Sampled check of the structural conditions on W (nonnegativity with zeros
/// only at +-1, sign of W' around gamma, W'' >= beta near the wells) and the
/// profile relation q' = sqrt(2W(q)).
template <DoubleWell P>
Report validate_potential(const P& pot, int samples = 2001) {
    Report out;
    const double a = pot.alpha(), b = pot.beta(), g = pot.gamma();

    Check w1{"W >= 0, zero only at +-1", true, 0.0, 0.0, {}};
    for (int n = 0; n < samples; ++n) {
        const double s = -2.0 + 4.0 * n / (samples - 1);
        const double w = pot.W(s);
        const bool root = std::fabs(std::fabs(s) - 1.0) < 1e-12;
        if (w < 0.0 || (!root && w == 0.0)) w1.passed = false;
        w1.measured = std::min(w1.measured, w);
    }
    if (pot.W(1.0) != 0.0 || pot.W(-1.0) != 0.0) w1.passed = false;
    out.checks.push_back(w1);

    Check w2{"W' > 0 on (-1,gamma), < 0 on (gamma,1)", true, 0.0, 0.0, {}};
    for (int n = 1; n < samples - 1; ++n) {
        const double s = -1.0 + 2.0 * n / (samples - 1);
        if (std::fabs(s - g) < 1e-9) continue;
        const double d = pot.dW(s);
        if ((s < g && !(d > 0.0)) || (s > g && !(d < 0.0))) w2.passed = false;
    }
    out.checks.push_back(w2);

    Check w3{"W'' >= beta on [-1,-alpha] u [alpha,1]", true, 1e300, 0.0, {}};
    for (int n = 0; n < samples; ++n) {
        const double s = a + (1.0 - a) * n / (samples - 1);
        const double m = std::min(pot.d2W(s), pot.d2W(-s));
        w3.measured = std::min(w3.measured, m - b);
        if (m < b * (1.0 - 1e-12)) w3.passed = false;
    }
    out.checks.push_back(w3);

    Check q1{"q' = sqrt(2W(q))", true, 0.0, 0.0, {}};
    for (int n = 0; n < samples; ++n) {
        const double s = -10.0 + 20.0 * n / (samples - 1);
        const double r = std::fabs(pot.dq(s) - std::sqrt(std::max(2.0 * pot.W(pot.q(s)), 0.0)));
        q1.measured = std::max(q1.measured, r);
    }
    q1.passed = q1.measured <= 1e-12;
    out.checks.push_back(q1);
    return out;
}

/// Smallest c with 1 - q(s) <= c exp(-sqrt(beta) s) on a sample of
/// [q^{-1}(alpha), s_max].
template <DoubleWell P>
double fit_tail_constant(const P& pot, double s_max = 30.0, int samples = 3001) {
    const double s0 = pot.q_inverse(pot.alpha());
    const double rb = std::sqrt(pot.beta());
    double c = 0.0;
    for (int n = 0; n < samples; ++n) {
        const double s = s0 + (s_max - s0) * n / (samples - 1);
        c = std::max(c, pot.well_distance_on_profile(s) * std::exp(rb * s));
    }
    return c;
}

}  // namespace pfobs
