#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace levysep::detail {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double inf = std::numeric_limits<double>::infinity();

/// e^{ix}
inline std::complex<double> cis(double x) {
    return {std::cos(x), std::sin(x)};
}

/// cos(x) - 1, no cancellation at small x.
inline double cos_m1(double x) {
    const double s = std::sin(0.5 * x);
    return -2.0 * s * s;
}

/// sin(x) - x, no cancellation at small x.
inline double sin_mx(double x) {
    if (std::abs(x) > 0.25) return std::sin(x) - x;
    // sin(x) - x = -x^3/6 (1 - x^2/20 (1 - x^2/42 (1 - x^2/72)))
    const double x2 = x * x;
    return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
}

/// e^{ix} - 1
inline std::complex<double> cis_m1(double x) {
    return {cos_m1(x), std::sin(x)};
}

/// e^{ix} - 1 - ix  (compensated jump integrand)
inline std::complex<double> cis_m1_mi(double x) {
    return {cos_m1(x), sin_mx(x)};
}

/// e^z - 1 for complex z, stable for small |z|.
inline std::complex<double> cexpm1(std::complex<double> z) {
    const double ex = std::exp(z.real());
    return {std::expm1(z.real()) * std::cos(z.imag()) + cos_m1(z.imag()),
            ex * std::sin(z.imag())};
}

/// expm1(z)/z, stable for small |z|; value 1 at z = 0.
inline std::complex<double> expm1_over(std::complex<double> z) {
    if (std::abs(z) < 1e-4) {
        return 1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0));
    }
    return cexpm1(z) / z;
}

/// expm1(x)/x for real x; value 1 at x = 0.
inline double expm1_over(double x) {
    if (std::abs(x) < 1e-5) return 1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0));
    return std::expm1(x) / x;
}

/// SplitMix64 step; used to derive independent RNG stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double normal_pdf(double x, double mean = 0.0, double var = 1.0) {
    const double z = x - mean;
    return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * pi * var);
}

inline double normal_cdf(double x, double mean = 0.0, double var = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

/// Inverse standard normal CDF (Acklam's rational approximation plus one
/// Halley refinement against erfc; accurate to ~1e-15 on (0,1)).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -inf;
        if (p == 1.0) return inf;
        return std::numeric_limits<double>::quiet_NaN();
    }
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace levysep::detail
