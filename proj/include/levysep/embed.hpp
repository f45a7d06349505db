#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "levysep/density.hpp"
#include "levysep/detail/math_util.hpp"
#include "levysep/errors.hpp"
#include "levysep/interp.hpp"
#include "levysep/pathsim.hpp"
#include "levysep/poisson.hpp"

namespace levysep {

// ---------------------------------------------------------------------------
// Speed field: the densities together with the Poisson solution
// ---------------------------------------------------------------------------

/// Evaluators for the time-change machinery:
///   phi(t,x)   = (1-t) h0(x) + t h1(x)      (prescribed marginal flow)
///   sigma(t,x) = H(x) / phi(t,x)            (local speed)
/// A regularized field mixes both densities toward p = H/C, which scales H by
/// (1-eps) and caps sigma by (1-eps) C / eps.
class SpeedField {
public:
    static SpeedField create(DensityPair pair, const PoissonSolution& sol,
                             const Feasibility& feas) {
        if (!feas.accepted())
            throw std::invalid_argument("speed field requires an accepted feasibility verdict: " +
                                        feas.reason);
        return SpeedField(std::move(pair), sol, 0.0);
    }

    double eps() const { return eps_; }
    const DensityPair& pair() const { return pair_; }
    double integral_H() const { return (1.0 - eps_) * C_; }
    double base_integral_H() const { return C_; }
    double exhaustion_threshold() const { return (1.0 - eps_) * eps_H_; }
    double max_H() const { return (1.0 - eps_) * max_H_; }
    double grid_min() const { return Hgrid_.x_min(); }
    double grid_max() const { return Hgrid_.x_max(); }

    double H(double x) const {
        bool off;
        return H_track(x, off);
    }

    double H_track(double x, bool& offgrid) const {
        const double v = std::max(Hgrid_.eval(x, offgrid), 0.0);
        return (1.0 - eps_) * v;
    }

    /// Density of p = H / C (the regularization target).
    double mix_density(double x) const {
        return std::max(Hgrid_(x), 0.0) / C_;
    }

    double h0(double x) const {
        const double b = pair_.h0()(x);
        return eps_ == 0.0 ? b : (1.0 - eps_) * b + eps_ * mix_density(x);
    }

    double h1(double x) const {
        const double b = pair_.h1()(x);
        return eps_ == 0.0 ? b : (1.0 - eps_) * b + eps_ * mix_density(x);
    }

    double phi(double t, double x) const { return (1.0 - t) * h0(x) + t * h1(x); }

    double sigma(double t, double x) const { return H(x) / phi(t, x); }

    /// Convex shift of the densities toward p = H/C; the shifted system keeps
    /// the same exhaustion set and scales the Poisson solution by (1-eps).
    SpeedField regularize(double epsilon) const {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("regularization epsilon must be in (0,1)");
        if (eps_ != 0.0) throw std::invalid_argument("regularize acts on the base field");
        if (!(C_ > 0.0)) throw std::invalid_argument("degenerate pair: integral of H is 0");
        SpeedField f(*this);
        f.eps_ = epsilon;
        return f;
    }

    /// Draw an initial state from the field's own initial density
    /// (1-eps) h0 + eps p; the base field reduces to plain h0 sampling.
    double sample_initial_state(std::mt19937_64& rng) const {
        if (eps_ > 0.0) {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            if (unif(rng) < eps_) return sample_mix(rng);
        }
        return sample_initial(pair_.h0(), rng);
    }

private:
    SpeedField(DensityPair pair, const PoissonSolution& sol, double eps)
        : pair_(std::move(pair)), eps_(eps), C_(sol.integral_H), max_H_(sol.max_H) {
        Hgrid_ = GriddedFunction(sol.x, sol.H, 1e-8 * std::max(sol.max_H, 1e-300));
        eps_H_ = 1e-9 * std::max(max_H_, 0.0);
        // inverse CDF of p on the grid for regularized initial draws
        const auto& xs = sol.x;
        mix_cdf_.resize(xs.size(), 0.0);
        double acc = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i) {
            acc += 0.5 * (std::max(sol.H[i - 1], 0.0) + std::max(sol.H[i], 0.0)) *
                   (xs[i] - xs[i - 1]);
            mix_cdf_[i] = acc;
        }
        mix_x_ = xs;
    }

    double sample_mix(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double target = unif(rng) * mix_cdf_.back();
        auto it = std::lower_bound(mix_cdf_.begin(), mix_cdf_.end(), target);
        std::size_t i = std::min<std::size_t>(std::size_t(it - mix_cdf_.begin()), mix_cdf_.size() - 1);
        if (i == 0) return mix_x_[0];
        const double c0 = mix_cdf_[i - 1], c1 = mix_cdf_[i];
        const double f = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
        return mix_x_[i - 1] + f * (mix_x_[i] - mix_x_[i - 1]);
    }

    DensityPair pair_;
    GriddedFunction Hgrid_;
    double eps_ = 0.0;
    double C_ = 0.0;
    double max_H_ = 0.0;
    double eps_H_ = 0.0;
    std::vector<double> mix_x_, mix_cdf_;
};

// ---------------------------------------------------------------------------
// Clock state and the sub-step engine
// ---------------------------------------------------------------------------

struct ClockCaps {
    double max_dG = 0.01;             ///< per-substep cap on |increment of G|
    double max_dI = 0.01;             ///< per-substep cap on the increment of I
    double crossing_rel_tol = 1e-10;  ///< bisection tolerance within a substep
};

/// Pathwise accumulators of the stopping construction. Within a substep the
/// state is frozen, so every update below is the exact constant-coefficient
/// solution; `progress` integrates its own ODE and is audited against the
/// algebraic identity progress = 1 - e^G (1 - I).
struct ClockState {
    double t = 0.0;
    double G = 0.0;         ///< accumulated (h1 - h0)/H along the path
    double I = 0.0;         ///< accumulated e^{-G} h1/H (the trigger integral)
    double wtime = 0.0;     ///< accumulated e^{-G} (weighted elapsed time)
    double progress = 0.0;  ///< ODE route of the schedule level
    bool exhausted = false; ///< latched once the path enters {H = 0}
    double max_integrand = 0.0;
    long substeps = 0;
};

inline double progress_identity(const ClockState& s) {
    return 1.0 - std::exp(s.G) * (1.0 - s.I);
}

namespace detail {

struct SubstepRates {
    double a = 0.0;   // (h1 - h0)/H
    double b = 0.0;   // h1/H
    double c0 = 0.0;  // h0/H
};

/// Rates for one substep, evaluated at two points and averaged:
///  - bridged segments use the Gauss spread around the bridge midpoint
///    (spread = conditional bridge deviation), cancelling the curvature bias
///    of the frozen-midpoint rule;
///  - jump segments use the trapezoid of the two endpoint states, which is
///    exact in expectation over the in-step jump arrival time.
struct SubstepEval {
    SubstepRates r;
    double x_mid = 0.0;  ///< state snapshot point for crossings/transforms
    double x_a = 0.0, x_b = 0.0;
    bool exhausted = false;
    bool offgrid = false;
};

inline SubstepEval eval_substep(const SpeedField& f, const Segment& seg, double t_start,
                                double d) {
    SubstepEval e;
    if (!seg.bridged) {
        e.x_mid = e.x_a = seg.x0;
        e.x_b = seg.x1;
    } else {
        const double len = seg.t1 - seg.t0;
        const double m = t_start + 0.5 * d;
        const double frac = (m - seg.t0) / len;
        e.x_mid = seg.x0 + (seg.x1 - seg.x0) * frac;
        const double v = seg.var_rate * (m - seg.t0) * (seg.t1 - m) / len;
        const double s = std::sqrt(std::max(v, 0.0));
        e.x_a = e.x_mid - s;
        e.x_b = e.x_mid + s;
    }
    bool off1 = false, off2 = false;
    const double Ha = f.H_track(e.x_a, off1);
    double Hb = e.x_b == e.x_a ? Ha : f.H_track(e.x_b, off2);
    e.offgrid = off1 || off2;
    const double thr = f.exhaustion_threshold();
    if (Ha <= thr) {
        e.exhausted = true;
        return e;
    }
    if (seg.bridged && Hb <= thr) {
        e.exhausted = true;
        return e;
    }
    if (!seg.bridged && Hb <= thr) {
        // the step's jump lands in {H ~ 0}; occupy the pre-jump state only,
        // exhaustion fires when the next segment starts there
        e.x_b = e.x_a;
        Hb = Ha;
    }
    if (e.x_b == e.x_a) {
        const double h0 = f.h0(e.x_a), h1 = f.h1(e.x_a);
        e.r.b = h1 / Ha;
        e.r.c0 = h0 / Ha;
    } else {
        e.r.b = 0.5 * (f.h1(e.x_a) / Ha + f.h1(e.x_b) / Hb);
        e.r.c0 = 0.5 * (f.h0(e.x_a) / Ha + f.h0(e.x_b) / Hb);
    }
    e.r.a = e.r.b - e.r.c0;  // kept exact so the schedule identity telescopes
    return e;
}

/// Exact constant-coefficient update over duration d.
inline void apply_substep(ClockState& s, const SubstepRates& r, double d) {
    const double eg = std::exp(-s.G);
    const double ad = r.a * d;
    s.I += r.b * eg * d * expm1_over(-ad);
    s.wtime += eg * d * expm1_over(-ad);
    s.progress = s.progress * std::exp(ad) + r.c0 * d * expm1_over(ad);
    s.G += ad;
    s.t += d;
    ++s.substeps;
}

/// Trigger value of the partial update after duration d (no state mutation).
inline double trial_I(const ClockState& s, const SubstepRates& r, double d) {
    return s.I + r.b * std::exp(-s.G) * d * expm1_over(-r.a * d);
}

inline double trial_progress(const ClockState& s, const SubstepRates& r, double d) {
    const double I = trial_I(s, r, d);
    const double G = s.G + r.a * d;
    return 1.0 - std::exp(G) * (1.0 - I);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

struct EmbeddingOutcome {
    double tau = 0.0;
    double L_tau = 0.0;
    bool hit_rho = false;
    bool censored = false;
    long steps = 0;            ///< sampler steps consumed
    double max_integrand = 0.0;
};

/// Everything a verification pass wants from one path, collected in a single
/// sweep: the stopping time, the intermediate schedule crossings, and the
/// pathwise transform time-integrals.
struct PathRecord {
    EmbeddingOutcome outcome;
    std::vector<double> schedule_time;   ///< per requested level s
    std::vector<double> schedule_state;  ///< L at each schedule crossing
    std::vector<bool> schedule_hit;
    std::vector<Complex> transform_integral;  ///< per probe u: int_0^tau e^{iuL}
    bool offgrid = false;
    double identity_gap = 0.0;  ///< max |progress - (1 - e^G(1-I))| over substeps
    ClockState final_state;
};

// ---------------------------------------------------------------------------
// The clock runner
// ---------------------------------------------------------------------------

/// Advances the clock across one path segment with sub-stepping; stops early
/// on exhaustion. This is the quadrature primitive; crossing localization
/// lives in EmbeddingClock.
inline void step_clock(ClockState& s, const Segment& seg, const SpeedField& field,
                       const ClockCaps& caps = {}) {
    if (s.exhausted) return;
    const double eps_t = 1e-9 * (seg.t1 - seg.t0);
    while (seg.t1 - s.t > eps_t) {
        const double remaining = seg.t1 - s.t;
        // provisional rates at zero substep width, then size from the caps
        auto probe = detail::eval_substep(field, seg, s.t, 0.0);
        if (probe.exhausted) {
            s.exhausted = true;  // entered {H ~ 0}; the clock freezes here
            return;
        }
        double d = remaining;
        if (probe.r.a != 0.0) d = std::min(d, caps.max_dG / std::abs(probe.r.a));
        const double irate = probe.r.b * std::exp(-s.G);
        if (irate > 0.0) d = std::min(d, caps.max_dI / irate);
        const auto ev = seg.bridged ? detail::eval_substep(field, seg, s.t, d) : probe;
        if (ev.exhausted) {
            s.exhausted = true;
            return;
        }
        s.max_integrand = std::max(s.max_integrand, ev.r.b * std::exp(-s.G));
        detail::apply_substep(s, ev.r, d);
    }
    s.t = seg.t1;
}

class EmbeddingClock {
public:
    EmbeddingClock(const SpeedField& field, ClockCaps caps = {}) : field_(field), caps_(caps) {}

    /// Schedule levels to record (ascending, in (0,1]); the stopping time is
    /// the level-1 crossing and is appended when absent.
    void set_schedule_probes(std::vector<double> s_levels) {
        s_levels_ = std::move(s_levels);
        std::sort(s_levels_.begin(), s_levels_.end());
        if (s_levels_.empty() || s_levels_.back() < 1.0) s_levels_.push_back(1.0);
    }
    void set_transform_probes(std::vector<double> u) { u_probes_ = std::move(u); }

    template <class Stream>
    PathRecord run(Stream& stream, double t_max) const {
        PathRecord rec;
        rec.schedule_time.assign(s_levels_.size(), 0.0);
        rec.schedule_state.assign(s_levels_.size(), 0.0);
        rec.schedule_hit.assign(s_levels_.size(), false);
        rec.transform_integral.assign(u_probes_.size(), Complex(0.0, 0.0));
        ClockState s;
        std::size_t next_level = 0;  // first un-crossed schedule probe

        // immediate exhaustion at the initial state
        {
            bool off = false;
            const double H0 = field_.H_track(stream.state(), off);
            rec.offgrid = rec.offgrid || off;
            if (H0 <= field_.exhaustion_threshold()) {
                s.exhausted = true;
                finish_exhausted(rec, s, stream.state(), next_level);
                rec.outcome.steps = stream.steps();
                rec.final_state = s;
                return rec;
            }
        }

        while (true) {
            if (s.t >= t_max - 1e-15) {
                rec.outcome.censored = true;
                rec.outcome.tau = t_max;
                rec.outcome.L_tau = stream.state();
                break;
            }
            const Segment seg = stream.next();
            const double eps_t = 1e-9 * (seg.t1 - seg.t0);
            bool stop = false;
            while (seg.t1 - s.t > eps_t && !stop) {
                const double remaining = seg.t1 - s.t;
                auto probe = detail::eval_substep(field_, seg, s.t, 0.0);
                rec.offgrid = rec.offgrid || probe.offgrid;
                if (probe.exhausted) {
                    s.exhausted = true;
                    finish_exhausted(rec, s, probe.x_mid, next_level);
                    stop = true;
                    break;
                }
                double d = remaining;
                if (probe.r.a != 0.0) d = std::min(d, caps_.max_dG / std::abs(probe.r.a));
                const double irate0 = probe.r.b * std::exp(-s.G);
                if (irate0 > 0.0) d = std::min(d, caps_.max_dI / irate0);
                const auto ev = seg.bridged ? detail::eval_substep(field_, seg, s.t, d) : probe;
                rec.offgrid = rec.offgrid || ev.offgrid;
                if (ev.exhausted) {
                    s.exhausted = true;
                    finish_exhausted(rec, s, ev.x_mid, next_level);
                    stop = true;
                    break;
                }
                const detail::SubstepRates r = ev.r;
                const double x = ev.x_mid;
                const double xa = ev.x_a, xb = ev.x_b;
                s.max_integrand = std::max(s.max_integrand, r.b * std::exp(-s.G));

                const ClockState before = s;
                detail::apply_substep(s, r, d);
                rec.identity_gap = std::max(rec.identity_gap,
                                            std::abs(s.progress - progress_identity(s)));

                // schedule crossings within this substep (levels are ascending)
                while (next_level < s_levels_.size()) {
                    const double level = s_levels_[next_level];
                    const bool crossed = level >= 1.0
                                             ? s.I >= 1.0
                                             : progress_identity(s) >= level;
                    if (!crossed) break;
                    const double dc = locate_crossing(before, r, d, level);
                    const double tc = before.t + dc;
                    const double lc = state_at(seg, x, tc);
                    rec.schedule_time[next_level] = tc;
                    rec.schedule_state[next_level] = lc;
                    rec.schedule_hit[next_level] = true;
                    if (level >= 1.0) {
                        rec.outcome.tau = tc;
                        rec.outcome.L_tau = lc;
                        // transform integrals run up to tau only
                        add_transform(rec, xa, xb, dc);
                        stop = true;
                    }
                    ++next_level;
                    if (stop) break;
                }
                if (!stop) add_transform(rec, xa, xb, d);
            }
            if (stop || s.exhausted) break;
            s.t = seg.t1;
        }
        rec.outcome.hit_rho = s.exhausted;
        rec.outcome.steps = stream.steps();
        rec.outcome.max_integrand = s.max_integrand;
        rec.final_state = s;
        return rec;
    }

private:
    void finish_exhausted(PathRecord& rec, ClockState& s, double x, std::size_t& next_level) const {
        // tau = rho: every pending schedule level is capped at the exhaustion time
        rec.outcome.tau = s.t;
        rec.outcome.L_tau = x;
        rec.outcome.hit_rho = true;
        for (std::size_t k = next_level; k < s_levels_.size(); ++k) {
            rec.schedule_time[k] = s.t;
            rec.schedule_state[k] = x;
            rec.schedule_hit[k] = true;
        }
        next_level = s_levels_.size();
    }

    static double state_at(const Segment& seg, double frozen_x, double t) {
        if (!seg.bridged) return frozen_x;
        const double f = (t - seg.t0) / (seg.t1 - seg.t0);
        return seg.x0 + (seg.x1 - seg.x0) * f;
    }

    /// Earliest duration d' in (0, d] whose trial update reaches the level.
    double locate_crossing(const ClockState& before, const detail::SubstepRates& r, double d,
                           double level) const {
        auto reached = [&](double dd) {
            return level >= 1.0 ? detail::trial_I(before, r, dd) >= 1.0
                                : detail::trial_progress(before, r, dd) >= level;
        };
        double lo = 0.0, hi = d;
        while (hi - lo > caps_.crossing_rel_tol * d) {
            const double mid = 0.5 * (lo + hi);
            (reached(mid) ? hi : lo) = mid;
        }
        return hi;
    }

    void add_transform(PathRecord& rec, double xa, double xb, double d) const {
        for (std::size_t i = 0; i < u_probes_.size(); ++i) {
            const Complex v = xa == xb
                                  ? detail::cis(u_probes_[i] * xa)
                                  : 0.5 * (detail::cis(u_probes_[i] * xa) +
                                           detail::cis(u_probes_[i] * xb));
            rec.transform_integral[i] += v * d;
        }
    }

    const SpeedField& field_;
    ClockCaps caps_;
    std::vector<double> s_levels_{1.0};  // the stopping level is always live
    std::vector<double> u_probes_;
};

// ---------------------------------------------------------------------------
// Named operations
// ---------------------------------------------------------------------------

/// tau = first time the trigger integral reaches 1, capped by exhaustion and
/// the simulation horizon.
template <class Stream>
EmbeddingOutcome stop_time(Stream& stream, const SpeedField& field, double t_max,
                           const ClockCaps& caps = {}) {
    EmbeddingClock clock(field, caps);
    clock.set_schedule_probes({1.0});
    return clock.run(stream, t_max).outcome;
}

/// delta(s): first time the schedule level reaches s (capped like tau).
struct ScheduleCrossing {
    double time = 0.0;
    double state = 0.0;
    bool censored = false;
};

template <class Stream>
ScheduleCrossing delta_schedule(Stream& stream, const SpeedField& field, double s, double t_max,
                                const ClockCaps& caps = {}) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("schedule level s must be in [0,1]");
    if (s == 0.0) return {0.0, stream.state(), false};
    EmbeddingClock clock(field, caps);
    if (s < 1.0)
        clock.set_schedule_probes({s, 1.0});
    else
        clock.set_schedule_probes({1.0});
    const PathRecord rec = clock.run(stream, t_max);
    ScheduleCrossing out;
    out.censored = !rec.schedule_hit[0];
    out.time = out.censored ? t_max : rec.schedule_time[0];
    out.state = out.censored ? 0.0 : rec.schedule_state[0];
    return out;
}

inline SpeedField regularize(const SpeedField& field, double epsilon) {
    return field.regularize(epsilon);
}

}  // namespace levysep
