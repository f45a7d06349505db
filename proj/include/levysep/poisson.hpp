#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "levysep/density.hpp"
#include "levysep/detail/math_util.hpp"
#include "levysep/errors.hpp"
#include "levysep/interp.hpp"
#include "levysep/levy.hpp"
#include "levysep/quadrature.hpp"
#include "levysep/stats.hpp"

namespace levysep {

/// The integrability of the transform ratio failed: its tail mass cannot be
/// pushed below tolerance at any truncation.
struct TailNotIntegrable : std::runtime_error {
    double tail_integral;
    double reached;
    TailNotIntegrable(const std::string& w, double tail, double reached_)
        : std::runtime_error(w), tail_integral(tail), reached(reached_) {}
};

// ---------------------------------------------------------------------------
// psi(xi) = (h1_hat - h0_hat)(xi) / eta(xi)
// ---------------------------------------------------------------------------

/// Removable-singularity-aware evaluator of the transform ratio. Near each
/// zero of eta the quotient is 0/0; evaluation there goes through a series
/// form (moment expansion of the numerator against the leading behaviour of
/// eta) or through an exact pair-specific formula when one exists.
class RatioFunction {
public:
    RatioFunction(DensityPair pair, CharExponent exponent, double zero_scan_radius = 64.0)
        : pair_(std::move(pair)), eta_(std::move(exponent)) {
        analyze_zero_at_origin();
        scan_lattice_zeros(zero_scan_radius);
    }

    const DensityPair& pair() const { return pair_; }
    const CharExponent& exponent() const { return eta_; }

    /// All detected zeros of eta in the scanned band (0 always included).
    const std::vector<double>& zeros() const { return zeros_; }
    bool singular() const { return singular_; }
    double singular_at() const { return singular_at_; }
    double switch_radius() const { return r0_; }

    /// The limit of psi at 0; equals the integral of the Poisson solution.
    double limit_at_zero() const { return psi0_; }

    Complex operator()(double xi) const {
        if (singular_ && std::abs(xi - singular_at_) < std::max(r0_, 1e-9)) {
            throw FeasibilityBreached(
                "non-removable singularity of (h1_hat-h0_hat)/eta at u0=" + std::to_string(singular_at_),
                singular_at_, breach_size_);
        }
        const double axi = std::abs(xi);
        if (axi < r0_) return near_zero_form(xi);
        const Complex num = pair_.g_hat(xi);
        const Complex den = eta_(xi);
        return num / den;
    }

private:
    enum class NearForm { none, stable_pair, moment_series };

    void analyze_zero_at_origin() {
        zeros_.push_back(0.0);
        const auto& sf = eta_.small_freq();
        const double den_order = sf.order();

        // exact form: time marginals of this very process
        if (pair_.h0().kind() == DensitySpec::Kind::stable_marginal &&
            pair_.h1().kind() == DensitySpec::Kind::stable_marginal && sf.stable &&
            eta_.triplet().alpha2 == 0.0 && eta_.triplet().gamma == 0.0) {
            const auto& a = pair_.h0().stable_params();
            const auto& b = pair_.h1().stable_params();
            if (a.index == sf.stable->first && a.scale == sf.stable->second &&
                b.index == a.index && b.scale == a.scale) {
                near_ = NearForm::stable_pair;
                t0_ = a.time;
                dt_ = b.time - a.time;
                psi0_ = dt_;
                r0_ = find_switch_radius();
                return;
            }
        }

        // moment expansion of the numerator (4 terms)
        bool have_moments = true;
        double num_order = 5.0;
        for (int k = 1; k <= 4; ++k) {
            dm_[k] = pair_.moment_gap(k);
            if (!std::isfinite(dm_[k])) {
                have_moments = false;
                break;
            }
            const double scale = 1.0 + std::abs(pair_.h0().raw_moment(k)) +
                                 std::abs(pair_.h1().raw_moment(k));
            if (num_order > 4.5 && std::abs(dm_[k]) > 1e-9 * scale) num_order = double(k);
        }
        if (!have_moments) {
            near_ = NearForm::none;
            r0_ = 0.0;
            psi0_ = std::abs((*this)(1e-5).real());  // best effort for diagnostics
            return;
        }
        near_ = NearForm::moment_series;
        if (num_order < den_order - 1e-9) {
            singular_ = true;
            singular_at_ = 0.0;
            breach_size_ = std::abs(dm_[int(num_order)]);
            psi0_ = detail::inf;
            r0_ = 1e-2;
            return;
        }
        // finite limit at 0
        if (num_order > den_order + 1e-9) {
            psi0_ = 0.0;
        } else {
            const int k = int(std::lround(num_order));
            if (k == 1)
                psi0_ = dm_[1] / sf.linear;
            else
                psi0_ = dm_[2] / sf.quadratic;
        }
        r0_ = find_switch_radius();
    }

    /// Largest probe |xi| where the near form and the direct quotient agree
    /// to 1e-9; evaluation switches to the series inside this radius.
    double find_switch_radius() const {
        double best = 0.0;
        for (double xi = 0.5; xi > 1e-7; xi *= 0.5) {
            const Complex near = near_zero_form(xi);
            const Complex direct = pair_.g_hat(xi) / eta_(xi);
            if (std::abs(near - direct) <= 1e-9 * (1.0 + std::abs(near))) {
                best = xi;
                break;
            }
        }
        return best;
    }

    Complex near_zero_form(double xi) const {
        if (near_ == NearForm::stable_pair) {
            const auto& s = pair_.h0().stable_params();
            const double e = -s.scale * std::pow(std::abs(xi), s.index);
            // psi = e^{t0 e} * dt * expm1(dt e)/(dt e)
            return std::exp(t0_ * e) * dt_ * detail::expm1_over(dt_ * e);
        }
        if (near_ == NearForm::moment_series) {
            const Complex ix(0.0, xi);
            Complex num = 0.0;
            Complex p = 1.0;
            double fact = 1.0;
            for (int k = 1; k <= 4; ++k) {
                p *= ix;
                fact *= k;
                num += p * (dm_[k] / fact);
            }
            return num / eta_(xi);
        }
        return pair_.g_hat(xi) / eta_(xi);
    }

    void scan_lattice_zeros(double radius) {
        // |eta| scale over the band, then refine local minima toward zeros
        const int n = 4096;
        double scale = 0.0;
        std::vector<double> a(n + 1);
        for (int i = 0; i <= n; ++i) {
            const double u = radius * i / n;
            a[i] = std::abs(eta_(u));
            scale = std::max(scale, a[i]);
        }
        for (int i = 2; i < n - 1; ++i) {
            if (a[i] < a[i - 1] && a[i] <= a[i + 1] && a[i] < 1e-3 * scale) {
                double at = radius * i / n;
                const double v = detail::refine_eta_min(eta_.triplet(), radius * (i - 1) / n,
                                                        radius * (i + 1) / n, at);
                if (v < 1e-10 * std::max(1.0, scale) && at > 1e-9) {
                    zeros_.push_back(at);
                    zeros_.push_back(-at);
                    const double g = std::abs(pair_.g_hat(at));
                    if (g > 1e-10 && !singular_) {
                        singular_ = true;
                        singular_at_ = at;
                        breach_size_ = g;
                    }
                }
            }
        }
        std::sort(zeros_.begin(), zeros_.end());
    }

    DensityPair pair_;
    CharExponent eta_;
    std::vector<double> zeros_;
    NearForm near_ = NearForm::none;
    double dm_[5] = {0, 0, 0, 0, 0};
    double t0_ = 0.0, dt_ = 0.0;
    double r0_ = 0.0;
    double psi0_ = 0.0;
    bool singular_ = false;
    double singular_at_ = 0.0;
    double breach_size_ = 0.0;
};

// ---------------------------------------------------------------------------
// Grid solution of the Poisson equation by Fourier inversion
// ---------------------------------------------------------------------------

struct GridParams {
    double extent = 0.0;    ///< half-width of the x grid; 0 = auto (8 sigma rule)
    int points_log2 = 12;   ///< dx = extent / 2^points_log2
    double xi_max = 0.0;    ///< truncation of the inversion integral; 0 = adaptive
    double tail_tol = 1e-8; ///< |psi| mass allowed beyond the truncation
    int workers = 1;
};

struct PoissonSolution {
    std::vector<double> x;
    std::vector<double> H;
    double dx = 0.0, extent = 0.0;
    double xi_max = 0.0, dxi = 0.0;
    double l1_ratio = 0.0;
    double tail_mass = 0.0;
    double min_H = 0.0, max_H = 0.0;
    double integral_H = 0.0;      ///< grid trapezoid plus fitted tail-model mass
    double integral_H_grid = 0.0; ///< grid trapezoid alone (the CSV column sum)
    double psi0 = 0.0;            ///< limit of the ratio at 0 (= target integral of H)
    double imag_residual = 0.0;   ///< conjugate-asymmetry / imaginary inversion residue
};

inline double auto_extent(const DensityPair& pair) {
    const auto& a = pair.h0();
    const auto& b = pair.h1();
    return std::max(std::abs(a.median()) + 8.0 * a.sigma_width(),
                    std::abs(b.median()) + 8.0 * b.sigma_width());
}

/// Inverse Fourier transform of the ratio on a uniform grid:
///   H(x) = (1/2pi) int_{-Xi}^{Xi} psi(xi) e^{-i x xi} dxi
/// with Xi grown until the tail mass of |psi| is below tolerance and the
/// frequency step refined until probe values stabilize. Each x is independent;
/// the sweep parallelizes across grid chunks.
inline PoissonSolution solve_H(const RatioFunction& r, GridParams gp = {}) {
    if (r.singular()) {
        throw FeasibilityBreached("cannot invert: non-removable singularity at u0=" +
                                      std::to_string(r.singular_at()),
                                  r.singular_at(), 0.0);
    }
    PoissonSolution sol;
    sol.extent = gp.extent > 0 ? gp.extent : auto_extent(r.pair());
    const int n_half = 1 << gp.points_log2;
    sol.dx = sol.extent / double(n_half);
    const int n = 2 * n_half + 1;

    // --- truncation: double Xi until the |psi| segment mass is negligible
    double xi = gp.xi_max > 0 ? gp.xi_max : 8.0;
    double tail = 0.0;
    if (gp.xi_max <= 0) {
        for (;;) {
            auto seg = try_integrate([&](double u) { return std::abs(r(u)); }, xi, 2.0 * xi,
                                     {1e-10, 12});
            if (seg.value < 0.5 * gp.tail_tol) {
                tail = 2.0 * seg.value;
                break;
            }
            xi *= 2.0;
            if (xi > 1e6)
                throw TailNotIntegrable("ratio tail mass irreducible below tolerance",
                                        seg.value, xi);
        }
    } else {
        tail = 2.0 * try_integrate([&](double u) { return std::abs(r(u)); }, xi, 4.0 * xi,
                                   {1e-9, 10}).value;
    }
    sol.xi_max = xi;
    sol.tail_mass = tail;
    sol.psi0 = r.limit_at_zero();

    // --- L1 norm of the ratio
    sol.l1_ratio = 2.0 * try_integrate([&](double u) { return std::abs(r(u)); }, 0.0, xi,
                                       {1e-9, 12}).value + tail;

    // --- frequency step: aliasing bound, then refine on probe points
    double dxi = detail::pi / (4.0 * sol.extent);
    const double probes[9] = {0.0, 0.3 * sol.extent, -0.3 * sol.extent, 0.6 * sol.extent,
                              -0.6 * sol.extent, 0.9 * sol.extent, -0.9 * sol.extent,
                              0.15 * sol.extent, -0.45 * sol.extent};
    auto invert_at = [&](double x, double step) {
        const std::size_t K = std::size_t(std::ceil(xi / step));
        KahanSum acc;
        acc.add(0.5 * r.limit_at_zero());  // xi = 0 node at half trapezoid weight times 2 below
        for (std::size_t k = 1; k <= K; ++k) {
            const double u = double(k) * step;
            const Complex p = r(u);
            const double w = (k == K) ? 0.5 : 1.0;
            acc.add(w * (p * detail::cis(-x * u)).real());
        }
        return acc.value() * step / detail::pi;  // 2x for the negative side, /(2 pi)
    };
    double prev[9];
    for (int i = 0; i < 9; ++i) prev[i] = invert_at(probes[i], dxi);
    for (int it = 0; it < 7; ++it) {
        double next[9], diff = 0;
        for (int i = 0; i < 9; ++i) {
            next[i] = invert_at(probes[i], dxi / 2);
            diff = std::max(diff, std::abs(next[i] - prev[i]));
        }
        dxi /= 2;
        std::copy(next, next + 9, prev);
        if (diff < 1e-8) break;
    }
    sol.dxi = dxi;

    // --- precompute ratio samples, then sweep the grid with phase recurrence
    const std::size_t K = std::size_t(std::ceil(xi / dxi));
    std::vector<Complex> psi(K + 1);
    psi[0] = r.limit_at_zero();
    double asym = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
        psi[k] = r(double(k) * dxi);
        if (k % 64 == 0)
            asym = std::max(asym, std::abs(r(-double(k) * dxi) - std::conj(psi[k])));
    }
    sol.imag_residual = asym;

    sol.x.resize(n);
    sol.H.resize(n);
    auto sweep = [&](int lo, int hi) {
        for (int j = lo; j < hi; ++j) {
            const double x = -sol.extent + sol.dx * j;
            const Complex rot = detail::cis(-x * dxi);
            Complex ph = rot;
            KahanSum acc;
            acc.add(0.5 * psi[0].real());
            for (std::size_t k = 1; k <= K; ++k) {
                const Complex v = psi[k] * ph;
                acc.add((k == K ? 0.5 : 1.0) * v.real());
                ph *= rot;
            }
            sol.x[j] = x;
            sol.H[j] = acc.value() * dxi / detail::pi;
        }
    };
    const int workers = std::max(1, gp.workers);
    if (workers == 1) {
        sweep(0, n);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int lo = w * chunk, hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(sweep, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    sol.min_H = *std::min_element(sol.H.begin(), sol.H.end());
    sol.max_H = *std::max_element(sol.H.begin(), sol.H.end());
    KahanSum si;
    for (int j = 0; j < n; ++j) si.add((j == 0 || j == n - 1 ? 0.5 : 1.0) * sol.H[j]);
    sol.integral_H_grid = si.value() * sol.dx;
    // heavy-tailed solutions carry real mass past any practical grid; account
    // for it through the same decay models the interpolant uses
    GriddedFunction tails(sol.x, sol.H, 1e-8 * std::max(sol.max_H, 1e-300));
    sol.integral_H = sol.integral_H_grid + tails.left_tail().mass_beyond(sol.extent) +
                     tails.right_tail().mass_beyond(sol.extent);
    return sol;
}

// ---------------------------------------------------------------------------
// Feasibility verdict
// ---------------------------------------------------------------------------

struct Feasibility {
    bool ratio_integrable = false;
    double l1_ratio = 0.0;
    bool H_nonnegative = false;
    double min_H = 0.0, max_H = 0.0;
    bool H_integrable = false;
    double integral_H = 0.0;
    double mean_gap = 0.0;
    bool mean_ok = false;
    enum class Verdict { accepted, rejected, unverified } verdict = Verdict::rejected;
    std::string reason;

    bool accepted() const { return verdict == Verdict::accepted; }

    static Feasibility from_breach(const FeasibilityBreached& e) {
        Feasibility f;
        f.verdict = Verdict::rejected;
        f.reason = e.what();
        return f;
    }

    static Feasibility from_tail(const TailNotIntegrable& e) {
        Feasibility f;
        f.l1_ratio = detail::inf;
        f.verdict = Verdict::rejected;
        f.reason = "ratio_integrable=false: tail integral " + std::to_string(e.tail_integral);
        return f;
    }
};

/// Accept iff the ratio is integrable, H >= -eps_neg, H integrable and the
/// means agree; the negativity allowance scales with max H so that Fourier
/// ringing is not mistaken for a convex-order failure.
inline Feasibility check_feasibility(const PoissonSolution& sol, const DensityPair& pair,
                                     bool regularity_ok = true) {
    Feasibility f;
    f.l1_ratio = sol.l1_ratio;
    f.ratio_integrable = std::isfinite(sol.l1_ratio);
    f.min_H = sol.min_H;
    f.max_H = sol.max_H;
    const double eps_neg = 1e-6 * std::max(sol.max_H, 0.0);
    f.H_nonnegative = sol.min_H >= -eps_neg;
    f.integral_H = sol.integral_H;
    f.H_integrable = std::isfinite(sol.integral_H);
    f.mean_gap = std::abs(pair.moment_gap(1));
    f.mean_ok = !(f.mean_gap > 1e-6);  // NaN (moment not defined) does not fail the gate
    if (!f.ratio_integrable) {
        f.verdict = Feasibility::Verdict::rejected;
        f.reason = "ratio_integrable=false";
    } else if (!f.mean_ok) {
        f.verdict = Feasibility::Verdict::rejected;
        f.reason = "mean_check=" + std::to_string(f.mean_gap);
    } else if (!f.H_nonnegative) {
        f.verdict = Feasibility::Verdict::rejected;
        f.reason = "H_nonnegative=false (min_H=" + std::to_string(f.min_H) + ")";
    } else if (!f.H_integrable) {
        f.verdict = Feasibility::Verdict::rejected;
        f.reason = "H_integrable=false";
    } else if (!regularity_ok) {
        f.verdict = Feasibility::Verdict::unverified;
        f.reason = "regularity conditions unverified";
    } else {
        f.verdict = Feasibility::Verdict::accepted;
    }
    return f;
}

/// int g and int x g; a zero pair is necessary for solvability.
struct MomentReport {
    double integral_g = 0.0;
    double integral_xg = 0.0;
};

inline MomentReport check_moments(const DensityPair& pair) {
    const double r0 = std::abs(pair.h0().median()) + 10.0 * pair.h0().sigma_width();
    const double r1 = std::abs(pair.h1().median()) + 10.0 * pair.h1().sigma_width();
    const double R = 8.0 * std::max(r0, r1);
    MomentReport m;
    m.integral_g = integrate([&](double x) { return pair.h1()(x) - pair.h0()(x); }, -R, R, {1e-9, 14});
    m.integral_xg = integrate([&](double x) { return x * (pair.h1()(x) - pair.h0()(x)); }, -R, R,
                              {1e-9, 14});
    return m;
}

/// Adapter exposing a gridded solution (with tails) to the generator
/// quadratures; derivatives are only requested inside the grid.
inline TwiceDifferentiable as_fn(const GriddedFunction& g) {
    return {[&g](double x) { return g(x); },
            [&g](double x) {
                const auto& s = g.spline();
                return x < s.x_min() || x > s.x_max() ? 0.0 : s.deriv(x);
            },
            [&g](double x) {
                const auto& s = g.spline();
                return x < s.x_min() || x > s.x_max() ? 0.0 : s.second(x);
            }};
}

/// sup over the inner portion of the grid of |A* H_interp - (h1 - h0)|,
/// H_interp the cubic interpolant of the grid solution.
inline double residual(const PoissonSolution& sol, const LevyTriplet& triplet,
                       const DensityPair& pair, double inner_fraction = 0.8,
                       std::size_t max_points = 1024) {
    GriddedFunction Hf(sol.x, sol.H, 1e-8 * std::max(sol.max_H, 1e-300));
    auto fn = as_fn(Hf);
    const double lim = inner_fraction * sol.extent;
    const std::size_t stride = std::max<std::size_t>(1, sol.x.size() / max_points);
    double sup = 0.0;
    for (std::size_t j = 0; j < sol.x.size(); j += stride) {
        const double x = sol.x[j];
        if (std::abs(x) > lim) continue;
        const double lhs = adjoint_apply(triplet, fn, x);
        const double rhs = pair.h1()(x) - pair.h0()(x);
        sup = std::max(sup, std::abs(lhs - rhs));
    }
    return sup;
}

/// Resolvent-route evaluation
///   (U^q)* g(x) = (1/2pi) int g_hat(xi) e^{-i x xi} / (q - eta(xi)) dxi ;
/// -(U^q)* g approaches the Poisson solution as q drops to 0 and provides an
/// independent cross-check of the inversion.
inline double resolvent_oracle(const DensityPair& pair, const CharExponent& eta, double q,
                               double x) {
    auto f = [&](double xi) -> Complex {
        return pair.g_hat(xi) * detail::cis(-x * xi) / (q - eta(xi));
    };
    const Complex v = integrate_c(f, -detail::inf, detail::inf, {1e-10, 14});
    return v.real() / (2.0 * detail::pi);
}

/// Convergence estimate of int |xi psi(xi)| dxi; a finite value certifies a
/// Lipschitz solution. Informational only.
struct LipschitzReport {
    double value = 0.0;
    bool established = false;
    double reached = 0.0;
};

inline LipschitzReport lipschitz_diag(const RatioFunction& r) {
    LipschitzReport rep;
    try {
        auto head =
            try_integrate([&](double u) { return std::abs(u * r(u)); }, 0.0, 1.0, {1e-9, 12});
        auto tail = integrate_doubling([&](double u) { return std::abs(u * r(u)); }, 1.0, 1e-8,
                                       1e-4, 1e7, {1e-8, 10});
        rep.value = 2.0 * (head.value + tail.value);
        rep.established = tail.converged;
        rep.reached = tail.reached;
    } catch (const FeasibilityBreached&) {
        // a non-vanishing transform difference at a zero of eta makes the
        // integral infinite outright
        rep.value = detail::inf;
        rep.established = false;
    }
    return rep;
}

}  // namespace levysep
