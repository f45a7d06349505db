#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "levysep/density.hpp"
#include "levysep/detail/math_util.hpp"
#include "levysep/errors.hpp"
#include "levysep/levy.hpp"

namespace levysep {

struct PathConfig {
    double dt_base = 1e-3;
    double t_max = 50.0;             ///< horizon cap; clock outcomes are censored past it
    std::uint64_t seed = 1;
    double small_jump_cutoff = 1e-3; ///< Gaussian substitution threshold for tabulated measures

    void validate() const {
        if (!(dt_base > 0) || !(t_max > 0) || dt_base > t_max)
            throw ConfigError("path config requires 0 < dt_base <= t_max");
        if (!(small_jump_cutoff > 0) || small_jump_cutoff > 1.0)
            throw ConfigError("small_jump_cutoff must be in (0, 1]");
    }
};

struct SamplePath {
    std::vector<double> times;
    std::vector<double> states;
    std::vector<std::uint8_t> jump_flags;
};

/// Independent, order-free stream per path: runs are reproducible for any
/// worker count because stream k never depends on streams < k.
inline std::mt19937_64 make_path_rng(std::uint64_t seed, std::uint64_t path_index) {
    const std::uint64_t s = detail::splitmix64(seed) ^
                            detail::splitmix64(0xA3C59AC2ULL + path_index * 0x9E3779B97F4A7C15ULL);
    return std::mt19937_64(s);
}

namespace detail {

/// Chambers-Mallows-Stuck draw of a standard symmetric alpha-stable variate
/// (characteristic function e^{-|u|^alpha}).
inline double sample_sym_stable(double alpha, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u1 = unif(rng);
    double u2 = unif(rng);
    u1 = std::min(std::max(u1, 1e-16), 1.0 - 1e-16);
    u2 = std::max(u2, 1e-300);
    const double theta = pi * (u1 - 0.5);
    const double w = -std::log(u2);
    if (std::abs(alpha - 1.0) < 1e-12) return std::tan(theta);
    const double a = alpha;
    return std::sin(a * theta) / std::pow(std::cos(theta), 1.0 / a) *
           std::pow(std::cos((1.0 - a) * theta) / w, (1.0 - a) / a);
}

}  // namespace detail

/// Draws one initial state from the given density.
inline double sample_initial(const DensitySpec& h0, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (h0.kind()) {
        case DensitySpec::Kind::gaussian: {
            const auto& g = h0.gaussian_params();
            return g.mean + std::sqrt(g.variance) * std::normal_distribution<double>()(rng);
        }
        case DensitySpec::Kind::gaussian_mixture: {
            const auto& comps = h0.mixture_params();
            double u = unif(rng);
            for (const auto& c : comps) {
                if (u < c.weight || &c == &comps.back())
                    return c.mean + std::sqrt(c.variance) * std::normal_distribution<double>()(rng);
                u -= c.weight;
            }
            return 0;
        }
        case DensitySpec::Kind::stable_marginal: {
            const auto& s = h0.stable_params();
            return std::pow(s.scale * s.time, 1.0 / s.index) * detail::sample_sym_stable(s.index, rng);
        }
        default: {
            const double u = std::min(std::max(unif(rng), 1e-15), 1.0 - 1e-15);
            return h0.quantile(u);
        }
    }
}

/// Stationary-increment sampler for a triplet. Gaussian and drift parts are
/// exact; finite atoms are Poisson-thinned with their compensation; symmetric
/// stable parts are sampled exactly (no truncation); tabulated measures get
/// exact jumps above the cutoff and a variance-matched Gaussian below it.
class IncrementSampler {
public:
    IncrementSampler(const LevyTriplet& t, double small_jump_cutoff = 1e-3) : t_(t) {
        t_.validate();
        switch (t_.nu.kind()) {
            case JumpMeasure::Kind::none:
            case JumpMeasure::Kind::finite_atoms:
                break;
            case JumpMeasure::Kind::stable_density: {
                const auto& s = t_.nu.stable_part();
                if (std::abs(s.weight_left - s.weight_right) > 1e-15)
                    throw UnsupportedError("exact sampling implemented for symmetric stable only");
                break;
            }
            case JumpMeasure::Kind::tabulated_density:
                build_tabulated(small_jump_cutoff);
                break;
        }
    }

    struct Increment {
        double dx = 0.0;
        bool jumped = false;
    };

    Increment draw(double dt, std::mt19937_64& rng) const {
        Increment out;
        out.dx = t_.gamma * dt;
        if (t_.alpha2 > 0)
            out.dx += std::sqrt(t_.alpha2 * dt) * std::normal_distribution<double>()(rng);
        switch (t_.nu.kind()) {
            case JumpMeasure::Kind::none:
                break;
            case JumpMeasure::Kind::finite_atoms: {
                for (const auto& a : t_.nu.atom_list()) {
                    std::poisson_distribution<int> pois(a.rate * dt);
                    const int n = pois(rng);
                    if (n > 0) {
                        out.dx += a.location * double(n);
                        out.jumped = true;
                    }
                    if (std::abs(a.location) <= 1.0) out.dx -= dt * a.rate * a.location;
                }
                break;
            }
            case JumpMeasure::Kind::stable_density: {
                const auto& s = t_.nu.stable_part();
                out.dx += std::pow(s.scale * dt, 1.0 / s.index) *
                          detail::sample_sym_stable(s.index, rng);
                break;
            }
            case JumpMeasure::Kind::tabulated_density: {
                if (sigma2_small_ > 0)
                    out.dx += std::sqrt(sigma2_small_ * dt) * std::normal_distribution<double>()(rng);
                std::poisson_distribution<int> pois(big_rate_ * dt);
                const int n = pois(rng);
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                for (int i = 0; i < n; ++i) out.dx += big_quantile(unif(rng));
                if (n > 0) out.jumped = true;
                out.dx -= dt * comp_drift_;
                break;
            }
        }
        return out;
    }

    const LevyTriplet& triplet() const { return t_; }

private:
    void build_tabulated(double cutoff) {
        const auto& tab = t_.nu.table();
        CubicSpline dens(tab.y, tab.density);
        const double lo = tab.y.front(), hi = tab.y.back();
        auto nu = [&](double y) { return std::max(dens(y), 0.0); };
        // total rate above the cutoff and its inverse CDF on a fine grid
        const int n = 2048;
        big_y_.reserve(n);
        big_cdf_.reserve(n);
        double acc = 0;
        double prev_y = lo;
        for (int i = 0; i < n; ++i) {
            const double y = lo + (hi - lo) * i / (n - 1);
            if (i > 0) {
                const double mid = 0.5 * (prev_y + y);
                if (std::abs(mid) > cutoff) acc += nu(mid) * (y - prev_y);
            }
            big_y_.push_back(y);
            big_cdf_.push_back(acc);
            prev_y = y;
        }
        big_rate_ = acc;
        sigma2_small_ = integrate([&](double y) { return std::abs(y) <= cutoff ? y * y * nu(y) : 0.0; },
                                  std::max(lo, -cutoff), std::min(hi, cutoff), {1e-9, 12});
        comp_drift_ = 0;
        if (hi > cutoff)
            comp_drift_ += integrate([&](double y) { return y * nu(y); }, std::max(lo, cutoff),
                                     std::min(hi, 1.0), {1e-9, 12});
        if (lo < -cutoff)
            comp_drift_ += integrate([&](double y) { return y * nu(y); }, std::max(lo, -1.0),
                                     std::min(hi, -cutoff), {1e-9, 12});
    }

    double big_quantile(double u) const {
        const double target = u * big_rate_;
        auto it = std::lower_bound(big_cdf_.begin(), big_cdf_.end(), target);
        std::size_t i = std::min<std::size_t>(std::size_t(it - big_cdf_.begin()), big_cdf_.size() - 1);
        if (i == 0) return big_y_[0];
        const double c0 = big_cdf_[i - 1], c1 = big_cdf_[i];
        const double f = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
        return big_y_[i - 1] + f * (big_y_[i] - big_y_[i - 1]);
    }

    LevyTriplet t_;
    // tabulated-measure sampling state
    double big_rate_ = 0, sigma2_small_ = 0, comp_drift_ = 0;
    std::vector<double> big_y_, big_cdf_;
};

/// One path segment as seen by the embedding clock: the state moves linearly
/// from x0 to x1 when bridged (Gaussian part, no jump in the step), else it
/// holds at x0 on [t0, t1).
struct Segment {
    double t0 = 0, t1 = 0;
    double x0 = 0, x1 = 0;
    bool bridged = false;
    bool jumped = false;
    double var_rate = 0.0;  ///< diffusion variance per unit time along the bridge
};

/// Streams path segments on the fixed base time grid; owns the per-path RNG.
class SegmentStream {
public:
    SegmentStream(const IncrementSampler& sampler, const DensitySpec& h0, const PathConfig& cfg,
                  std::uint64_t path_index)
        : sampler_(sampler), cfg_(cfg), rng_(make_path_rng(cfg.seed, path_index)) {
        x_ = sample_initial(h0, rng_);
    }

    /// Start from an externally drawn initial state (regularized systems remix
    /// the initial law; the stream stays otherwise identical).
    SegmentStream(const IncrementSampler& sampler, double x0, const PathConfig& cfg,
                  std::uint64_t path_index, int substream)
        : sampler_(sampler), cfg_(cfg),
          rng_(make_path_rng(cfg.seed ^ (0x5851F42D4C957F2DULL * (substream + 1)), path_index)) {
        x_ = x0;
    }

    double state() const { return x_; }
    double time() const { return t_; }
    long steps() const { return steps_; }
    std::mt19937_64& rng() { return rng_; }

    Segment next() {
        const double dt = std::min(cfg_.dt_base, cfg_.t_max - t_);
        auto inc = sampler_.draw(dt, rng_);
        Segment s;
        s.t0 = t_;
        s.t1 = t_ + dt;
        s.x0 = x_;
        s.x1 = x_ + inc.dx;
        s.jumped = inc.jumped;
        s.bridged = sampler_.triplet().alpha2 > 0 && !inc.jumped;
        s.var_rate = s.bridged ? sampler_.triplet().alpha2 : 0.0;
        t_ = s.t1;
        x_ = s.x1;
        ++steps_;
        return s;
    }

private:
    const IncrementSampler& sampler_;
    PathConfig cfg_;
    std::mt19937_64 rng_;
    double x_ = 0, t_ = 0;
    long steps_ = 0;
};

/// Full trajectory on the base grid, for dumps and calibration tests.
inline SamplePath simulate_path(const IncrementSampler& sampler, const DensitySpec& h0,
                                const PathConfig& cfg, std::uint64_t path_index) {
    SegmentStream ss(sampler, h0, cfg, path_index);
    SamplePath p;
    p.times.push_back(0.0);
    p.states.push_back(ss.state());
    p.jump_flags.push_back(0);
    while (ss.time() < cfg.t_max - 1e-15) {
        const Segment s = ss.next();
        p.times.push_back(s.t1);
        p.states.push_back(s.x1);
        p.jump_flags.push_back(s.jumped ? 1 : 0);
    }
    return p;
}

}  // namespace levysep
