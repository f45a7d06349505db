#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <limits>

#include "levysep/detail/math_util.hpp"
#include "levysep/errors.hpp"

namespace levysep {

struct QuadratureOptions {
    double tol = 1e-10;       ///< relative termination target
    unsigned max_depth = 14;  ///< adaptive bisection depth
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod over [a, b]; infinities allowed.
/// Never throws; inspect `converged`.
template <class F>
QuadratureResult try_integrate(F&& f, double a, double b, QuadratureOptions opt = {}) {
    using boost::math::quadrature::gauss_kronrod;
    QuadratureResult r;
    double err = 0.0, l1 = 0.0;
    r.value = gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b, opt.max_depth,
                                                   opt.tol, &err, &l1);
    r.error = err;
    r.l1 = l1;
    if (!std::isfinite(r.value)) {
        r.converged = false;
    } else {
        r.converged = err <= 10.0 * opt.tol * std::max(1.0, l1);
    }
    return r;
}

/// Adaptive Gauss-Kronrod; throws QuadratureError if the tolerance is missed.
template <class F>
double integrate(F&& f, double a, double b, QuadratureOptions opt = {}) {
    auto r = try_integrate(std::forward<F>(f), a, b, opt);
    if (!r.converged) {
        throw QuadratureError("quadrature did not converge", opt.tol,
                              r.l1 > 0 ? r.error / std::max(1.0, r.l1) : r.error, a, b);
    }
    return r.value;
}

/// Complex-valued integrand over [a, b].
template <class F>
std::complex<double> integrate_c(F&& f, double a, double b, QuadratureOptions opt = {}) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0, l1 = 0.0;
    std::complex<double> v = gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b,
                                                                  opt.max_depth, opt.tol, &err, &l1);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
        err > 10.0 * opt.tol * std::max(1.0, l1)) {
        throw QuadratureError("complex quadrature did not converge", opt.tol,
                              err / std::max(1.0, l1), a, b);
    }
    return v;
}

/// Integral over the whole line.
template <class F>
double integrate_line(F&& f, QuadratureOptions opt = {}) {
    return integrate(std::forward<F>(f), -detail::inf, detail::inf, opt);
}

/// Improper integral handled by doubling the truncation radius until the
/// increment stabilizes. Reports how the sequence behaves; this is the
/// numerically decidable surrogate used by the tail-convergence diagnostics.
struct DoublingResult {
    double value = 0.0;
    double last_increment = 0.0;
    double reached = 0.0;          ///< upper limit actually integrated to
    bool converged = false;        ///< increments fell below `quiet`
    bool diverged = false;         ///< increments plateaued above `loud`
};

/// Integrates f over [lo, infinity) through segments [U, 2U]. An increment
/// ratio across doublings below 1 marks a convergent power tail (f ~ u^-b,
/// b > 1 gives ratio 2^{1-b} < 1); a plateau at or above 1 marks divergence.
template <class F>
DoublingResult integrate_doubling(F&& f, double lo, double quiet = 1e-8, double loud = 1e-4,
                                  double u_cap = 1e8, QuadratureOptions opt = {}) {
    DoublingResult out;
    double u = lo;
    double prev_inc = detail::inf;
    double ratio = 1.0;
    int segments = 0;
    while (u < u_cap) {
        const double hi = 2.0 * u;
        auto seg = try_integrate(f, u, hi, opt);
        double inc = seg.value;
        if (!std::isfinite(inc)) inc = detail::inf;
        out.value += inc;
        out.last_increment = inc;
        out.reached = hi;
        u = hi;
        ++segments;
        if (!std::isfinite(out.value)) {
            out.diverged = true;
            return out;
        }
        if (std::abs(inc) < quiet) {
            out.converged = true;
            return out;
        }
        ratio = std::isfinite(prev_inc) ? std::abs(inc) / std::max(std::abs(prev_inc), 1e-300)
                                        : 1.0;
        if (std::abs(inc) > loud && ratio >= 0.95 && segments >= 4) {
            out.diverged = true;
            return out;
        }
        prev_inc = inc;
    }
    // cap reached: still-shrinking tame increments integrate out geometrically
    if (std::abs(out.last_increment) < loud && ratio < 0.95) {
        out.value += out.last_increment * ratio / (1.0 - ratio);
        out.converged = true;
    } else if (std::abs(out.last_increment) > loud && ratio >= 0.75) {
        out.diverged = true;
    }
    return out;
}

}  // namespace levysep
