// Test-side numerics, independent of the library's quadrature and inversion
// paths: a plain composite Simpson rule and small closed forms used to freeze
// expected values.
#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "levysep/levy.hpp"

namespace test_oracles {

template <class F>
double simpson(F&& f, double a, double b, int n /* odd node count */) {
    if (n % 2 == 0) ++n;
    const double h = (b - a) / (n - 1);
    double s = f(a) + f(b);
    for (int i = 1; i < n - 1; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Smooth compactly supported bump centered at c with half-width w, with
/// closed-form derivatives.
inline levysep::TwiceDifferentiable bump(double c, double w) {
    auto f = [c, w](double x) {
        const double z = (x - c) / w;
        return std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0;
    };
    auto df = [c, w, f](double x) {
        const double z = (x - c) / w;
        if (std::abs(z) >= 1.0) return 0.0;
        const double q = 1.0 - z * z;
        return f(x) * (-2.0 * z / (q * q)) / w;
    };
    auto d2f = [c, w, f](double x) {
        const double z = (x - c) / w;
        if (std::abs(z) >= 1.0) return 0.0;
        const double q = 1.0 - z * z;
        const double a = -2.0 * z / (q * q);
        const double da = -2.0 * (1.0 + 3.0 * z * z) / (q * q * q);
        return f(x) * (a * a + da) / (w * w);
    };
    return {f, df, d2f};
}

/// H(x) = int |x-y| (h1 - h0)(y) dy solves (1/2) H'' = h1 - h0; the direct
/// quadrature is the Brownian-pair oracle for the Poisson solution.
inline double bm_pair_H(double x, double v0 = 1.0, double v1 = 2.0) {
    auto g = [&](double y) {
        return std::abs(x - y) * (std::exp(-y * y / (2 * v1)) / std::sqrt(2 * M_PI * v1) -
                                  std::exp(-y * y / (2 * v0)) / std::sqrt(2 * M_PI * v0));
    };
    return simpson(g, -42.0, 42.0, 16001);
}

/// Frozen-state closed form of the trigger integral for the Brownian pair:
/// with a = (h1(x)-h0(x))/H(x), I(t) = (h1(x)/H(x)) (1 - e^{-a t})/a.
inline double frozen_trigger(double h0v, double h1v, double Hv, double t) {
    const double a = (h1v - h0v) / Hv;
    return h1v / Hv * (1.0 - std::exp(-a * t)) / a;
}

}  // namespace test_oracles
