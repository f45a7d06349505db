#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "levysep/density.hpp"
#include "levysep/embed.hpp"
#include "levysep/pathsim.hpp"
#include "levysep/poisson.hpp"
#include "levysep/quadrature.hpp"
#include "levysep/stats.hpp"

namespace levysep {

struct MCConfig {
    std::size_t n_paths = 100000;
    PathConfig path;
    std::vector<double> u_probe;  ///< frequencies for the pathwise transform residuals
    std::vector<double> s_probe;  ///< schedule levels for intermediate marginal checks
    int workers = 1;
    ClockCaps caps;

    void validate() const {
        if (n_paths < 100) throw ConfigError("mc config requires n_paths >= 100");
        path.validate();
        for (double s : s_probe)
            if (!(s > 0.0 && s < 1.0)) throw ConfigError("s_probe values must be in (0,1)");
        for (double u : u_probe)
            if (!std::isfinite(u)) throw ConfigError("u_probe values must be finite");
    }

    /// Probe order fixes the record layout; normalize before collecting paths.
    MCConfig normalized() const {
        MCConfig c = *this;
        std::sort(c.s_probe.begin(), c.s_probe.end());
        c.s_probe.erase(std::unique(c.s_probe.begin(), c.s_probe.end()), c.s_probe.end());
        return c;
    }
};

struct TransformResidual {
    double u = 0.0;
    double residual_re = 0.0, residual_im = 0.0;
    double se_re = 0.0, se_im = 0.0;
};

struct MarginalCheck {
    double s = 0.0;
    double ks = 0.0;
    std::size_t n = 0;
};

struct MCReport {
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    double mean_tau = 0.0, se_tau = 0.0;
    double integral_H = 0.0;
    double ks_stat = 0.0;
    double wasserstein1 = 0.0;
    std::vector<TransformResidual> dynkin;
    std::vector<MarginalCheck> marginals;
    std::size_t n_censored = 0, n_exhausted = 0, n_offgrid = 0;
    double censor_rate = 0.0;
    bool valid = true;  ///< false when censoring exceeds 1%
    double max_identity_gap = 0.0;
    double mean_steps = 0.0;
};

/// Runs the clock on n independent paths and returns the per-path records,
/// indexed by path id (order-free across workers).
inline std::vector<PathRecord> collect_paths(const SpeedField& field, const IncrementSampler& sampler,
                                             const MCConfig& cfg) {
    EmbeddingClock clock(field, cfg.caps);
    clock.set_schedule_probes(cfg.s_probe);
    clock.set_transform_probes(cfg.u_probe);
    std::vector<PathRecord> recs(cfg.n_paths);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cfg.n_paths) return;
                std::mt19937_64 init_rng = make_path_rng(cfg.path.seed ^ 0x9D2C5680ULL, i);
                const double x0 = field.sample_initial_state(init_rng);
                SegmentStream stream(sampler, x0, cfg.path, i, /*substream=*/0);
                recs[i] = clock.run(stream, cfg.path.t_max);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(cfg.n_paths);  // drain remaining work
        }
    };
    const int w = std::max(1, cfg.workers);
    if (w == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < w; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return recs;
}

/// Sequential, Kahan-compensated aggregation of collected records into the
/// report; bit-identical for any worker count.
inline MCReport aggregate_report(const SpeedField& field, const IncrementSampler& sampler,
                                 const MCConfig& cfg, const std::vector<PathRecord>& recs) {
    MCReport rep;
    rep.n_paths = cfg.n_paths;
    rep.seed = cfg.path.seed;
    rep.epsilon = field.eps();
    rep.integral_H = field.integral_H();

    std::vector<double> taus;
    std::vector<double> l_tau;
    taus.reserve(recs.size());
    l_tau.reserve(recs.size());
    KahanSum steps_sum;
    for (const auto& r : recs) {
        rep.max_identity_gap = std::max(rep.max_identity_gap, r.identity_gap);
        steps_sum.add(double(r.outcome.steps));
        if (r.offgrid) ++rep.n_offgrid;
        if (r.outcome.censored) {
            ++rep.n_censored;
            continue;
        }
        if (r.outcome.hit_rho) ++rep.n_exhausted;
        taus.push_back(r.outcome.tau);
        l_tau.push_back(r.outcome.L_tau);
    }
    rep.censor_rate = double(rep.n_censored) / double(recs.size());
    rep.valid = rep.censor_rate <= 0.01;
    rep.mean_steps = steps_sum.value() / double(recs.size());

    const auto mt = mean_se(taus);
    rep.mean_tau = mt.mean;
    rep.se_tau = mt.se;

    std::sort(l_tau.begin(), l_tau.end());
    const DensitySpec& target = field.pair().h1();
    rep.ks_stat = ks_statistic(l_tau, [&](double x) { return target.cdf(x); });
    rep.wasserstein1 = wasserstein1(l_tau, [&](double p) { return target.quantile(p); });

    // transform residuals: eta(u) E[int_0^tau e^{iuL}] - g_hat(u)
    const CharExponent eta{sampler.triplet()};
    for (std::size_t k = 0; k < cfg.u_probe.size(); ++k) {
        const double u = cfg.u_probe[k];
        const Complex eu = eta(u);
        std::vector<double> re, im;
        re.reserve(recs.size());
        im.reserve(recs.size());
        for (const auto& r : recs) {
            if (r.outcome.censored) continue;
            const Complex z = eu * r.transform_integral[k];
            re.push_back(z.real());
            im.push_back(z.imag());
        }
        const auto mr = mean_se(re);
        const auto mi = mean_se(im);
        const Complex g = field.pair().g_hat(u);
        rep.dynkin.push_back({u, mr.mean - g.real(), mi.mean - g.imag(), mr.se, mi.se});
    }

    // intermediate marginals vs the prescribed flow (1-s) h0 + s h1
    for (std::size_t k = 0; k < cfg.s_probe.size(); ++k) {
        const double s = cfg.s_probe[k];
        std::vector<double> ls;
        ls.reserve(recs.size());
        for (const auto& r : recs) {
            if (r.outcome.censored || !r.schedule_hit[k]) continue;
            ls.push_back(r.schedule_state[k]);
        }
        std::sort(ls.begin(), ls.end());
        const double ks =
            ks_statistic(ls, [&](double x) { return field.pair().mixture_cdf(s, x); });
        rep.marginals.push_back({s, ks, ls.size()});
    }
    return rep;
}

/// Full Monte Carlo verification sweep: n independent paths, stopping times,
/// target-law distance, transform residuals and intermediate marginals, all
/// from a single pass.
inline MCReport run_embedding_mc(const SpeedField& field, const IncrementSampler& sampler,
                                 MCConfig cfg) {
    cfg.validate();
    cfg = cfg.normalized();
    const auto recs = collect_paths(field, sampler, cfg);
    return aggregate_report(field, sampler, cfg, recs);
}

/// Residuals of the pathwise transform identity alone (thin wrapper over the
/// full sweep with only the frequency probes active).
inline std::vector<TransformResidual> dynkin_check(const SpeedField& field,
                                                   const IncrementSampler& sampler,
                                                   MCConfig cfg) {
    cfg.s_probe.clear();
    return run_embedding_mc(field, sampler, cfg).dynkin;
}

/// KS distance of the schedule marginal at level s against the mixture CDF.
inline MarginalCheck marginal_check(const SpeedField& field, const IncrementSampler& sampler,
                                    MCConfig cfg, double s) {
    cfg.s_probe = {s};
    cfg.u_probe.clear();
    const auto rep = run_embedding_mc(field, sampler, cfg);
    return rep.marginals.front();
}

/// Deterministic weak-form identity: for a smooth compactly supported f and
/// the analytic marginal flow phi,
///   int f phi(t) - int f h0 = int_0^t int sigma(s,x) (A f)(x) phi(s,x) dx ds.
/// Returns the absolute mismatch of the two sides (quadrature only, no paths).
inline double fokker_planck_residual(const SpeedField& field, const LevyTriplet& triplet,
                                     const TwiceDifferentiable& f, double support_lo,
                                     double support_hi, double t) {
    // Af is s-independent; the adaptive x-rules revisit the same nodes for
    // every s, so memoize the generator evaluations
    std::map<double, double> af_cache;
    auto af = [&](double x) {
        auto it = af_cache.find(x);
        if (it != af_cache.end()) return it->second;
        const double v = generator_apply(triplet, f, x);
        af_cache.emplace(x, v);
        return v;
    };
    const double lhs = integrate(
        [&](double x) { return f.f(x) * (field.phi(t, x) - field.h0(x)); }, support_lo,
        support_hi, {1e-10, 14});
    // inner x-integral at a given s, then the s-integral
    auto inner = [&](double s) {
        return integrate([&](double x) { return field.sigma(s, x) * af(x) * field.phi(s, x); },
                         support_lo, support_hi, {1e-9, 13});
    };
    const double rhs = integrate(inner, 0.0, t, {1e-9, 8});
    return std::abs(lhs - rhs);
}

}  // namespace levysep
