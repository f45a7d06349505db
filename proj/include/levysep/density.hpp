#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "levysep/detail/math_util.hpp"
#include "levysep/errors.hpp"
#include "levysep/interp.hpp"
#include "levysep/levy.hpp"
#include "levysep/quadrature.hpp"

namespace levysep {

struct MixtureComponent {
    double weight = 1.0;
    double mean = 0.0;
    double variance = 1.0;
};

struct GaussianParams { double mean = 0.0, variance = 1.0; };
struct LaplaceParams { double mean = 0.0, scale = 1.0; };
struct StableMarginalParams { double index = 1.5, scale = 1.0, time = 1.0; };
struct TabulatedParams { std::vector<double> x, h; };

/// A strictly positive probability density with its Fourier transform, CDF,
/// quantile function and cached moments. Immutable after construction; all
/// table-backed kinds precompute their tables here.
class DensitySpec {
public:
    enum class Kind { gaussian, gaussian_mixture, laplace, stable_marginal, tabulated };

    static DensitySpec gaussian(double mean, double variance) {
        if (!(variance > 0)) throw std::invalid_argument("gaussian variance must be > 0");
        return DensitySpec(std::make_shared<Impl>(GaussianParams{mean, variance}));
    }

    static DensitySpec gaussian_mixture(std::vector<MixtureComponent> comps) {
        if (comps.empty()) throw std::invalid_argument("empty mixture");
        double w = 0;
        for (auto& c : comps) {
            if (!(c.weight > 0) || !(c.variance > 0))
                throw std::invalid_argument("mixture component invalid");
            w += c.weight;
        }
        for (auto& c : comps) c.weight /= w;
        return DensitySpec(std::make_shared<Impl>(std::move(comps)));
    }

    static DensitySpec laplace(double mean, double scale) {
        if (!(scale > 0)) throw std::invalid_argument("laplace scale must be > 0");
        return DensitySpec(std::make_shared<Impl>(LaplaceParams{mean, scale}));
    }

    static DensitySpec stable_marginal(double index, double scale, double time) {
        if (!(index > 0 && index < 2)) throw std::invalid_argument("stable index not in (0,2)");
        if (!(scale > 0) || !(time > 0)) throw std::invalid_argument("stable scale/time must be > 0");
        return DensitySpec(std::make_shared<Impl>(StableMarginalParams{index, scale, time}));
    }

    static DensitySpec tabulated(std::vector<double> x, std::vector<double> h) {
        if (x.size() != h.size() || x.size() < 8)
            throw std::invalid_argument("tabulated density needs >= 8 nodes");
        for (double v : h)
            if (!(v > 0)) throw std::invalid_argument("tabulated density must be strictly positive");
        return DensitySpec(std::make_shared<Impl>(TabulatedParams{std::move(x), std::move(h)}));
    }

    Kind kind() const { return impl_->kind; }

    double operator()(double x) const { return impl_->pdf(x); }
    Complex fourier(double xi) const { return impl_->fourier(xi); }
    double cdf(double x) const { return impl_->cdf(x); }
    double quantile(double p) const { return impl_->quantile(p); }

    double mean() const { return impl_->moments[1]; }
    /// Raw k-th moment, k in 1..4; +inf when the tail makes it diverge.
    double raw_moment(int k) const { return impl_->moments[k]; }
    double abs_moment() const { return impl_->abs_moment; }
    double median() const { return impl_->median; }
    /// Half-width of the central 68.3% interval; equals sigma for a Gaussian.
    double sigma_width() const { return impl_->sigma_width; }
    /// Normalization defect measured at construction (before rescaling).
    double normalization_defect() const { return impl_->norm_defect; }

    /// Smallest probed radius past which the density stays below `tol`;
    /// +inf when no such radius is found (C0 decay surrogate).
    double decay_radius(double tol = 1e-8) const {
        double r = std::max(1.0, 8.0 * impl_->sigma_width + std::abs(impl_->median));
        for (int i = 0; i < 60; ++i) {
            if (impl_->pdf(r) < tol && impl_->pdf(-r) < tol) {
                // make sure it stays down at a couple of further probes
                if (impl_->pdf(2 * r) < tol && impl_->pdf(4 * r) < tol &&
                    impl_->pdf(-2 * r) < tol && impl_->pdf(-4 * r) < tol)
                    return r;
            }
            r *= 1.5;
            if (r > 1e9) break;
        }
        return detail::inf;
    }

    const GaussianParams& gaussian_params() const { return std::get<GaussianParams>(impl_->params); }
    const std::vector<MixtureComponent>& mixture_params() const {
        return std::get<std::vector<MixtureComponent>>(impl_->params);
    }
    const LaplaceParams& laplace_params() const { return std::get<LaplaceParams>(impl_->params); }
    const StableMarginalParams& stable_params() const {
        return std::get<StableMarginalParams>(impl_->params);
    }
    const TabulatedParams& tabulated_params() const { return std::get<TabulatedParams>(impl_->params); }

private:
    struct Impl {
        Kind kind;
        std::variant<GaussianParams, std::vector<MixtureComponent>, LaplaceParams,
                     StableMarginalParams, TabulatedParams>
            params;
        // caches
        double moments[5] = {1, 0, 0, 0, 0};  // moments[k] = E X^k
        double abs_moment = 0.0;
        double median = 0.0, sigma_width = 1.0;
        double norm_defect = 0.0;
        // table-backed kinds
        GriddedFunction pdf_tab;
        CubicSpline cdf_tab;
        double tail_mass_right = 0.0, tail_mass_left = 0.0;  // model mass beyond the table
        double stable_unit_scale = 1.0;                      // (c t)^{1/alpha}

        explicit Impl(GaussianParams g) : kind(Kind::gaussian), params(g) {
            moments[1] = g.mean;
            moments[2] = g.mean * g.mean + g.variance;
            moments[3] = std::pow(g.mean, 3) + 3 * g.mean * g.variance;
            moments[4] = std::pow(g.mean, 4) + 6 * g.mean * g.mean * g.variance +
                         3 * g.variance * g.variance;
            const double s = std::sqrt(g.variance);
            abs_moment = s * std::sqrt(2.0 / detail::pi) * std::exp(-g.mean * g.mean / (2 * g.variance)) +
                         g.mean * (1.0 - 2.0 * detail::normal_cdf(-g.mean / s));
            median = g.mean;
            sigma_width = s;
        }

        explicit Impl(std::vector<MixtureComponent> m) : kind(Kind::gaussian_mixture), params(std::move(m)) {
            const auto& comps = std::get<std::vector<MixtureComponent>>(params);
            for (int k = 1; k <= 4; ++k) {
                double s = 0;
                for (const auto& c : comps) {
                    Impl g(GaussianParams{c.mean, c.variance});
                    s += c.weight * g.moments[k];
                }
                moments[k] = s;
            }
            abs_moment = 0;
            for (const auto& c : comps) {
                Impl g(GaussianParams{c.mean, c.variance});
                abs_moment += c.weight * g.abs_moment;
            }
            finish_quantiles();
        }

        explicit Impl(LaplaceParams l) : kind(Kind::laplace), params(l) {
            const double m = l.mean, b = l.scale;
            moments[1] = m;
            moments[2] = m * m + 2 * b * b;
            moments[3] = m * m * m + 6 * m * b * b;
            moments[4] = m * m * m * m + 12 * m * m * b * b + 24 * b * b * b * b;
            abs_moment = std::abs(m) + b * std::exp(-std::abs(m) / b);
            median = m;
            sigma_width = (quantile(0.841344746) - quantile(0.158655254)) / 2.0;
        }

        explicit Impl(StableMarginalParams s) : kind(Kind::stable_marginal), params(s) {
            build_stable_tables(s);
            moments[1] = s.index > 1.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
            moments[2] = moments[3] = moments[4] = detail::inf;
            if (s.index > 1.0) {
                const double body = integrate([&](double x) { return x * pdf(x); }, 0.0,
                                              pdf_tab.x_max(), {1e-9, 12});
                abs_moment = 2.0 * (body + tail_abs_first_moment());
            } else {
                abs_moment = detail::inf;
            }
            finish_quantiles();
        }

        explicit Impl(TabulatedParams t) : kind(Kind::tabulated), params(std::move(t)) {
            build_tabulated();
            // piecewise: spline body plus the smooth tail models (integrating
            // across the support edge would hand the quadrature a kink)
            auto weighted = [&](int k, bool absolute) {
                auto w = [&](double x) {
                    const double f = absolute ? std::abs(x) : std::pow(x, k);
                    return f * pdf(x);
                };
                double v = integrate(w, pdf_tab.x_min(), pdf_tab.x_max(), {1e-9, 13});
                const auto& rt = pdf_tab.right_tail();
                const auto& lt = pdf_tab.left_tail();
                if (rt.kind == TailKind::exponential)
                    v += integrate(w, pdf_tab.x_max(), pdf_tab.x_max() + 80.0 / rt.rate, {1e-9, 12});
                if (lt.kind == TailKind::exponential)
                    v += integrate(w, pdf_tab.x_min() - 80.0 / lt.rate, pdf_tab.x_min(), {1e-9, 12});
                return v;
            };
            for (int k = 1; k <= 4; ++k) moments[k] = weighted(k, false);
            abs_moment = weighted(1, true);
            finish_quantiles();
        }

        double tail_abs_first_moment() const {
            const auto& tm = pdf_tab.right_tail();
            if (tm.kind != TailKind::power || tm.power <= 2.0) return detail::inf;
            // int_R^inf x * v(x) dx for v = edge * (x/R)^-p
            return tm.edge_value * tm.edge_x * tm.edge_x / (tm.power - 2.0);
        }

        double pdf_closed(double x) const {
            switch (kind) {
                case Kind::gaussian: {
                    const auto& g = std::get<GaussianParams>(params);
                    return detail::normal_pdf(x, g.mean, g.variance);
                }
                case Kind::gaussian_mixture: {
                    double s = 0;
                    for (const auto& c : std::get<std::vector<MixtureComponent>>(params))
                        s += c.weight * detail::normal_pdf(x, c.mean, c.variance);
                    return s;
                }
                case Kind::laplace: {
                    const auto& l = std::get<LaplaceParams>(params);
                    return std::exp(-std::abs(x - l.mean) / l.scale) / (2.0 * l.scale);
                }
                default: return 0;
            }
        }

        double pdf(double x) const {
            if (kind == Kind::stable_marginal || kind == Kind::tabulated) {
                bool off = false;
                const double v = pdf_tab.eval(x, off);
                return std::max(v, 1e-300);  // keep strict positivity for ratios
            }
            return std::max(pdf_closed(x), 1e-300);
        }

        Complex fourier(double xi) const {
            switch (kind) {
                case Kind::gaussian: {
                    const auto& g = std::get<GaussianParams>(params);
                    return std::exp(-0.5 * g.variance * xi * xi) * detail::cis(g.mean * xi);
                }
                case Kind::gaussian_mixture: {
                    Complex s = 0;
                    for (const auto& c : std::get<std::vector<MixtureComponent>>(params))
                        s += c.weight * std::exp(-0.5 * c.variance * xi * xi) * detail::cis(c.mean * xi);
                    return s;
                }
                case Kind::laplace: {
                    const auto& l = std::get<LaplaceParams>(params);
                    return detail::cis(l.mean * xi) / (1.0 + l.scale * l.scale * xi * xi);
                }
                case Kind::stable_marginal: {
                    const auto& s = std::get<StableMarginalParams>(params);
                    return {std::exp(-s.time * s.scale * std::pow(std::abs(xi), s.index)), 0.0};
                }
                case Kind::tabulated: {
                    // spline body plus closed-form transforms of the exponential tails
                    const auto& sp = pdf_tab.spline();
                    Complex body = integrate_c(
                        [&](double x) { return detail::cis(xi * x) * std::max(sp(x), 0.0); },
                        sp.x_min(), sp.x_max(), {1e-10, 14});
                    const auto& rt = pdf_tab.right_tail();
                    const auto& lt = pdf_tab.left_tail();
                    Complex tails = 0;
                    if (rt.kind == TailKind::exponential)
                        tails += rt.edge_value * detail::cis(xi * sp.x_max()) /
                                 Complex(rt.rate, -xi);
                    if (lt.kind == TailKind::exponential)
                        tails += lt.edge_value * detail::cis(xi * sp.x_min()) /
                                 Complex(lt.rate, xi);
                    return body + tails;
                }
            }
            return 0;
        }

        double cdf(double x) const {
            switch (kind) {
                case Kind::gaussian: {
                    const auto& g = std::get<GaussianParams>(params);
                    return detail::normal_cdf(x, g.mean, g.variance);
                }
                case Kind::gaussian_mixture: {
                    double s = 0;
                    for (const auto& c : std::get<std::vector<MixtureComponent>>(params))
                        s += c.weight * detail::normal_cdf(x, c.mean, c.variance);
                    return s;
                }
                case Kind::laplace: {
                    const auto& l = std::get<LaplaceParams>(params);
                    const double z = (x - l.mean) / l.scale;
                    return z < 0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
                }
                default: {
                    // tail models rescaled so the total tail mass matches the
                    // residual recorded at construction (CDF continuous, sums to 1)
                    if (x <= cdf_tab.x_min()) {
                        const double edge = pdf_tab.left_tail().mass_beyond(std::abs(cdf_tab.x_min()));
                        if (!(edge > 0) || tail_mass_left <= 0) return 0.0;
                        return std::clamp(
                            pdf_tab.left_tail().mass_beyond(std::abs(x)) * tail_mass_left / edge, 0.0,
                            tail_mass_left);
                    }
                    if (x >= cdf_tab.x_max()) {
                        const double edge = pdf_tab.right_tail().mass_beyond(cdf_tab.x_max());
                        if (!(edge > 0) || tail_mass_right <= 0) return 1.0;
                        return 1.0 - std::clamp(pdf_tab.right_tail().mass_beyond(x) * tail_mass_right / edge,
                                                0.0, tail_mass_right);
                    }
                    return std::clamp(cdf_tab(x), 0.0, 1.0);
                }
            }
        }

        double quantile(double p) const {
            if (!(p > 0 && p < 1)) throw std::invalid_argument("quantile p must be in (0,1)");
            switch (kind) {
                case Kind::gaussian: {
                    const auto& g = std::get<GaussianParams>(params);
                    return g.mean + std::sqrt(g.variance) * detail::normal_quantile(p);
                }
                case Kind::laplace: {
                    const auto& l = std::get<LaplaceParams>(params);
                    return p < 0.5 ? l.mean + l.scale * std::log(2 * p)
                                   : l.mean - l.scale * std::log(2 * (1 - p));
                }
                default: {
                    // bisection on the CDF
                    double lo = kind == Kind::gaussian_mixture ? -1e6 : cdf_tab.x_min() - 1,
                           hi = kind == Kind::gaussian_mixture ? 1e6 : cdf_tab.x_max() + 1;
                    while (cdf(lo) > p) lo = lo * 2 - 1;
                    while (cdf(hi) < p) hi = hi * 2 + 1;
                    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++i) {
                        const double m = 0.5 * (lo + hi);
                        (cdf(m) < p ? lo : hi) = m;
                    }
                    return 0.5 * (lo + hi);
                }
            }
        }

        void finish_quantiles() {
            median = quantile(0.5);
            sigma_width = (quantile(0.841344746) - quantile(0.158655254)) / 2.0;
        }

        void build_stable_tables(const StableMarginalParams& s) {
            const double scale = std::pow(s.scale * s.time, 1.0 / s.index);
            stable_unit_scale = scale;
            const double R = 100.0 * scale;
            const int n = 4001;
            std::vector<double> xs(n), ps(n), Fs(n);
            const double tc = s.time * s.scale;
            for (int i = 0; i < n; ++i) {
                const double x = -R + 2.0 * R * i / (n - 1);
                xs[i] = x;
                ps[i] = integrate([&](double u) { return std::cos(x * u) * std::exp(-tc * std::pow(u, s.index)); },
                                  0.0, detail::inf, {1e-11, 14}) /
                        detail::pi;
                if (x == 0.0)
                    Fs[i] = 0.5;
                else
                    Fs[i] = 0.5 + integrate([&](double u) {
                                      return std::sin(x * u) / u * std::exp(-tc * std::pow(u, s.index));
                                  },
                                  0.0, detail::inf, {1e-11, 14}) /
                                  detail::pi;
                ps[i] = std::max(ps[i], 0.0);
                Fs[i] = std::clamp(Fs[i], 0.0, 1.0);
            }
            // enforce monotone CDF against quadrature jitter
            for (int i = 1; i < n; ++i) Fs[i] = std::max(Fs[i], Fs[i - 1]);
            pdf_tab = GriddedFunction(xs, ps, 1e-300);
            cdf_tab = CubicSpline(std::move(xs), std::move(Fs));
            tail_mass_right = 1.0 - cdf_tab(cdf_tab.x_max());
            tail_mass_left = cdf_tab(cdf_tab.x_min());
        }

        void build_tabulated() {
            auto& t = std::get<TabulatedParams>(params);
            GriddedFunction raw(t.x, t.h, 1e-300);
            // total mass including the fitted exponential tails
            double mass = integrate([&](double x) { return std::max(raw.spline()(x), 0.0); },
                                    raw.x_min(), raw.x_max(), {1e-9, 15});
            mass += raw.left_tail().mass_beyond(std::abs(raw.x_min()));
            mass += raw.right_tail().mass_beyond(raw.x_max());
            norm_defect = std::abs(mass - 1.0);
            std::vector<double> hs = t.h;
            for (auto& v : hs) v /= mass;
            pdf_tab = GriddedFunction(t.x, hs, 1e-300);
            // numeric CDF on the same grid
            const auto& gx = pdf_tab.spline().grid();
            std::vector<double> Fs(gx.size());
            double acc = pdf_tab.left_tail().mass_beyond(std::abs(gx.front()));
            tail_mass_left = acc;
            Fs[0] = acc;
            for (std::size_t i = 1; i < gx.size(); ++i) {
                acc += integrate([&](double x) { return std::max(pdf_tab.spline()(x), 0.0); },
                                 gx[i - 1], gx[i], {1e-11, 10});
                Fs[i] = std::min(acc, 1.0);
            }
            tail_mass_right = std::max(0.0, 1.0 - Fs.back());
            cdf_tab = CubicSpline(gx, Fs);
        }
    };

    explicit DensitySpec(std::shared_ptr<Impl> i) : impl_(std::move(i)) {}
    std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Density pair and the transform difference
// ---------------------------------------------------------------------------

class DensityPair {
public:
    DensityPair(DensitySpec h0, DensitySpec h1) : h0_(std::move(h0)), h1_(std::move(h1)) {}

    const DensitySpec& h0() const { return h0_; }
    const DensitySpec& h1() const { return h1_; }

    /// g_hat(xi) = h1_hat(xi) - h0_hat(xi), evaluated without cancellation
    /// where the pair structure permits.
    Complex g_hat(double xi) const {
        if (h0_.kind() == DensitySpec::Kind::gaussian && h1_.kind() == DensitySpec::Kind::gaussian) {
            const auto& a = h0_.gaussian_params();
            const auto& b = h1_.gaussian_params();
            const Complex z(-0.5 * (b.variance - a.variance) * xi * xi, (b.mean - a.mean) * xi);
            return h0_.fourier(xi) * detail::cexpm1(z);
        }
        if (h0_.kind() == DensitySpec::Kind::stable_marginal &&
            h1_.kind() == DensitySpec::Kind::stable_marginal) {
            const auto& a = h0_.stable_params();
            const auto& b = h1_.stable_params();
            if (a.index == b.index && a.scale == b.scale) {
                const double e = -a.scale * std::pow(std::abs(xi), a.index);
                return std::exp(a.time * e) * detail::cexpm1(Complex((b.time - a.time) * e, 0.0));
            }
        }
        return h1_.fourier(xi) - h0_.fourier(xi);
    }

    /// E_1 X^k - E_0 X^k; NaN if either side lacks the moment.
    double moment_gap(int k) const {
        const double a = h0_.raw_moment(k), b = h1_.raw_moment(k);
        if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::quiet_NaN();
        return b - a;
    }

    /// (1-s) F0 + s F1, the prescribed marginal flow CDF.
    double mixture_cdf(double s, double x) const {
        return (1.0 - s) * h0_.cdf(x) + s * h1_.cdf(x);
    }

private:
    DensitySpec h0_, h1_;
};

// ---------------------------------------------------------------------------
// Regularity surrogates per process type
// ---------------------------------------------------------------------------

struct RegularityReport {
    struct Item {
        std::string name;
        bool pass = false;
        double measured = 0.0;
        std::string note;
    };
    std::vector<Item> items;
    bool all_pass = true;

    void add(std::string name, bool pass, double measured, std::string note = "") {
        all_pass = all_pass && pass;
        items.push_back({std::move(name), pass, measured, std::move(note)});
    }
};

namespace detail {

/// Ratio of max finite-difference magnitudes at scales delta and delta/2.
/// Near 1 for a C^k function, near 2^order-ish growth marks a discontinuity.
inline double fd_refinement_ratio(const DensitySpec& h, int order, double radius, double delta) {
    auto fd = [&](double d) {
        double mx = 0;
        for (int i = -200; i <= 200; ++i) {
            const double x = radius * i / 200.0;
            double v = 0;
            if (order == 0)
                v = std::abs(h(x + d) - h(x));
            else if (order == 1)
                v = std::abs(h(x + d) - h(x - d)) / (2 * d);
            else
                v = std::abs(h(x + d) - 2 * h(x) + h(x - d)) / (d * d);
            mx = std::max(mx, v);
        }
        return mx;
    };
    const double c = fd(delta), f = fd(delta / 2);
    if (order == 0) return c > 1e-14 ? f / c : 1.0;  // differences should shrink ~ linearly
    return c > 1e-14 ? f / c : 1.0;
}

}  // namespace detail

/// Checks the density regularity surrogates demanded by the process type:
/// type S needs continuous decaying densities, type 0 integrable first and
/// second derivatives, type D a compactly supported transform difference.
/// Failures are reported, never thrown; feasibility verdicts downgrade to
/// "unverified" on failure.
inline RegularityReport check_regularity(const DensityPair& pair, const ProcessClass& cls) {
    RegularityReport rep;
    const DensitySpec* hs[2] = {&pair.h0(), &pair.h1()};

    switch (cls.tag) {
        case ProcessClass::Tag::S: {
            for (int i = 0; i < 2; ++i) {
                const auto& h = *hs[i];
                const double r = h.decay_radius(1e-8);
                rep.add("h" + std::to_string(i) + "_decay", std::isfinite(r), r,
                        "radius with h < 1e-8");
                const double delta = h.kind() == DensitySpec::Kind::tabulated
                                         ? 4.0 * (h.tabulated_params().x.back() - h.tabulated_params().x.front()) /
                                               double(h.tabulated_params().x.size())
                                         : h.sigma_width() / 64.0;
                const double ratio = detail::fd_refinement_ratio(h, 0, 4 * h.sigma_width(), delta);
                rep.add("h" + std::to_string(i) + "_continuity", ratio < 0.8, ratio,
                        "zeroth-difference refinement ratio (continuous ~ 0.5)");
            }
            break;
        }
        case ProcessClass::Tag::Zero: {
            for (int i = 0; i < 2; ++i) {
                const auto& h = *hs[i];
                const double delta = h.kind() == DensitySpec::Kind::tabulated
                                         ? 4.0 * (h.tabulated_params().x.back() - h.tabulated_params().x.front()) /
                                               double(h.tabulated_params().x.size())
                                         : h.sigma_width() / 64.0;
                for (int order = 1; order <= 2; ++order) {
                    const double ratio =
                        detail::fd_refinement_ratio(h, order, 4 * h.sigma_width(), delta);
                    rep.add("h" + std::to_string(i) + "_deriv" + std::to_string(order) + "_exists",
                            ratio < 1.5, ratio, "finite-difference refinement ratio");
                }
                // absolute integrability of h', h'' by central differences
                const double d = delta;
                const double r = 8 * h.sigma_width() + std::abs(h.median());
                double l1d1 = 0, l1d2 = 0;
                const int n = 801;
                for (int j = 0; j < n; ++j) {
                    const double x = -r + 2 * r * j / (n - 1);
                    l1d1 += std::abs(h(x + d) - h(x - d)) / (2 * d);
                    l1d2 += std::abs(h(x + d) - 2 * h(x) + h(x - d)) / (d * d);
                }
                l1d1 *= 2 * r / n;
                l1d2 *= 2 * r / n;
                rep.add("h" + std::to_string(i) + "_deriv1_L1", std::isfinite(l1d1), l1d1);
                rep.add("h" + std::to_string(i) + "_deriv2_L1", std::isfinite(l1d2), l1d2);
            }
            break;
        }
        case ProcessClass::Tag::D: {
            // compact support of g_hat: find R with |g_hat| < 1e-10 past R
            const double probe = 32.0;
            double radius = detail::inf;
            const int n = 2048;
            double running_max = 0;
            for (int j = n; j-- > 0;) {
                const double xi = probe * (j + 1) / n;
                running_max = std::max(running_max, std::abs(pair.g_hat(xi)));
                if (running_max >= 1e-10) {
                    radius = xi;
                    break;
                }
            }
            const bool has_radius = radius < probe / 2.0;
            rep.add("ghat_compact_support", has_radius, radius,
                    "smallest radius with sup |ghat| < 1e-10 beyond it");
            // the transform difference must vanish at every detected zero of eta
            for (double u0 : cls.evidence.lattice_zeros) {
                const double g = std::abs(pair.g_hat(u0));
                rep.add("ghat_at_zero_" + std::to_string(u0), g < 1e-10, g,
                        "|ghat| at a lattice zero of eta");
            }
            break;
        }
    }
    return rep;
}

}  // namespace levysep
