#pragma once

#include <stdexcept>
#include <string>

namespace levysep {

/// Adaptive quadrature failed to reach the requested tolerance.
struct QuadratureError : std::runtime_error {
    double requested;
    double achieved;
    double sub_lo, sub_hi;  ///< unresolved sub-interval, when known

    QuadratureError(const std::string& what, double req, double ach,
                    double lo = 0.0, double hi = 0.0)
        : std::runtime_error(what), requested(req), achieved(ach), sub_lo(lo), sub_hi(hi) {}
};

/// The ratio (h1_hat - h0_hat)/eta has a non-removable singularity at a zero
/// of the characteristic exponent; no finite-mean embedding can exist.
struct FeasibilityBreached : std::runtime_error {
    double zero_location;    ///< the offending zero u0 of eta
    double numerator_size;   ///< |g_hat(u0)| scale that fails to vanish

    FeasibilityBreached(const std::string& what, double u0, double gsize)
        : std::runtime_error(what), zero_location(u0), numerator_size(gsize) {}
};

/// Configuration or input parse problem (CLI maps this to exit code 64).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A sampler or evaluator was asked for a representation it does not support.
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace levysep
