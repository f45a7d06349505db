#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "levysep/density.hpp"
#include "oracles.hpp"

using namespace levysep;
using Catch::Approx;

TEST_CASE("Fourier transforms of the closed-form kinds") {
    SECTION("Gaussian") {
        auto g = DensitySpec::gaussian(0.0, 2.25);
        for (double xi : {0.1, 0.9, 3.0}) {
            CHECK(g.fourier(xi).real() == Approx(std::exp(-2.25 * xi * xi / 2)).epsilon(1e-13));
            CHECK(g.fourier(xi).imag() == Approx(0.0).margin(1e-14));
        }
    }
    SECTION("any kind is 1 at xi = 0") {
        auto specs = {DensitySpec::gaussian(0.3, 1.0), DensitySpec::laplace(0.0, 0.7),
                      DensitySpec::stable_marginal(1.5, 1.0, 1.0)};
        for (const auto& s : specs) CHECK(std::abs(s.fourier(0.0) - 1.0) < 1e-10);
    }
    SECTION("stable marginal transform is exp(t eta)") {
        auto s = DensitySpec::stable_marginal(1.5, 1.0, 2.0);
        for (double xi : {0.2, 1.0, 2.5}) {
            CHECK(s.fourier(xi).real() ==
                  Approx(std::exp(-2.0 * std::pow(xi, 1.5))).epsilon(1e-12));
        }
    }
    SECTION("conjugate symmetry") {
        auto mix = DensitySpec::gaussian_mixture({{0.4, -1.0, 0.5}, {0.6, 2.0, 1.5}});
        for (double xi : {0.3, 1.7, 4.2}) {
            CHECK(std::abs(mix.fourier(-xi) - std::conj(mix.fourier(xi))) < 1e-14);
        }
    }
    SECTION("mixture transform is the mixture of transforms") {
        auto a = DensitySpec::gaussian(-1.0, 0.5);
        auto b = DensitySpec::gaussian(2.0, 1.5);
        auto mix = DensitySpec::gaussian_mixture({{0.4, -1.0, 0.5}, {0.6, 2.0, 1.5}});
        for (double xi : {0.3, 1.1}) {
            const Complex want = 0.4 * a.fourier(xi) + 0.6 * b.fourier(xi);
            CHECK(std::abs(mix.fourier(xi) - want) < 1e-12);
        }
    }
}

TEST_CASE("moment caches against quadrature") {
    auto specs = {DensitySpec::gaussian(0.5, 1.7),
                  DensitySpec::gaussian_mixture({{0.3, -1.0, 0.4}, {0.7, 1.0, 2.0}}),
                  DensitySpec::laplace(0.2, 0.9)};
    for (const auto& s : specs) {
        const double m1 = test_oracles::simpson([&](double x) { return x * s(x); }, -60, 60, 48001);
        const double m2 =
            test_oracles::simpson([&](double x) { return x * x * s(x); }, -60, 60, 48001);
        CHECK(s.mean() == Approx(m1).margin(1e-8));
        CHECK(s.raw_moment(2) == Approx(m2).margin(1e-8));
        const double mass = test_oracles::simpson([&](double x) { return s(x); }, -60, 60, 48001);
        CHECK(mass == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("stable marginal tables") {
    auto s = DensitySpec::stable_marginal(1.5, 1.0, 1.0);
    SECTION("density values at the origin match the cosine-integral oracle") {
        // p_t(0) = Gamma(1 + 2/3)/ (pi t^{2/3}) for alpha = 3/2
        CHECK(s(0.0) == Approx(std::tgamma(5.0 / 3.0) / detail::pi).epsilon(1e-8));
    }
    SECTION("CDF is a proper distribution with power tails") {
        CHECK(s.cdf(0.0) == Approx(0.5).margin(1e-10));
        CHECK(s.cdf(-1e9) == Approx(0.0).margin(1e-9));
        CHECK(s.cdf(1e9) == Approx(1.0).margin(1e-9));
        CHECK(s.quantile(0.5) == Approx(0.0).margin(1e-9));
        // symmetric: F(-x) = 1 - F(x)
        for (double x : {0.5, 2.0, 20.0, 200.0})
            CHECK(s.cdf(-x) == Approx(1.0 - s.cdf(x)).margin(1e-9));
    }
    SECTION("tail matches the jump-measure asymptote") {
        // 1 - F(x) ~ t k x^{-alpha} / alpha with k = c / (2 I(alpha))
        const double k = 1.0 / (2.0 * stable_cosine_mass(1.5));
        const double x = 120.0;
        CHECK((1.0 - s.cdf(x)) == Approx(k * std::pow(x, -1.5) / 1.5).epsilon(0.05));
    }
}

TEST_CASE("tabulated density normalizes and interpolates") {
    std::vector<double> xs, hs;
    for (int i = 0; i <= 200; ++i) {
        const double x = -6.0 + 12.0 * i / 200;
        xs.push_back(x);
        hs.push_back(std::exp(-0.5 * x * x));  // unnormalized Gaussian
    }
    auto t = DensitySpec::tabulated(xs, hs);
    CHECK(t.normalization_defect() > 1.0);  // input was off by sqrt(2 pi)
    CHECK(t(0.0) == Approx(1.0 / std::sqrt(2 * detail::pi)).epsilon(1e-5));
    CHECK(t.cdf(0.0) == Approx(0.5).margin(1e-5));
    CHECK(t.mean() == Approx(0.0).margin(1e-6));
}

TEST_CASE("regularity surrogates per process type") {
    const DensityPair gaussians(DensitySpec::gaussian(0, 1), DensitySpec::gaussian(0, 2));

    SECTION("Gaussians pass under type S") {
        ProcessClass cls;
        cls.tag = ProcessClass::Tag::S;
        const auto rep = check_regularity(gaussians, cls);
        CHECK(rep.all_pass);
    }
    SECTION("Gaussians pass under type 0") {
        ProcessClass cls;
        cls.tag = ProcessClass::Tag::Zero;
        const auto rep = check_regularity(gaussians, cls);
        CHECK(rep.all_pass);
    }
    SECTION("a tabulated density with a jump fails the derivative surrogate") {
        std::vector<double> xs, hs;
        for (int i = 0; i <= 400; ++i) {
            const double x = -8.0 + 16.0 * i / 400;
            xs.push_back(x);
            double v = std::exp(-0.5 * x * x);
            if (x > 0.5) v *= 0.25;  // discontinuity at 0.5
            hs.push_back(std::max(v, 1e-9));
        }
        const DensityPair pair(DensitySpec::tabulated(xs, hs), DensitySpec::gaussian(0, 2));
        ProcessClass cls;
        cls.tag = ProcessClass::Tag::Zero;
        const auto rep = check_regularity(pair, cls);
        CHECK_FALSE(rep.all_pass);
        bool deriv_failed = false;
        for (const auto& it : rep.items)
            if (!it.pass && it.name.find("deriv") != std::string::npos) deriv_failed = true;
        CHECK(deriv_failed);
    }
    SECTION("a Gaussian pair fails the type-D compact-support surrogate") {
        ProcessClass cls;
        cls.tag = ProcessClass::Tag::D;
        cls.evidence.lattice_zeros = {2.0 * detail::pi, 4.0 * detail::pi};
        const auto rep = check_regularity(gaussians, cls);
        CHECK_FALSE(rep.all_pass);
    }
}

TEST_CASE("transform difference special forms") {
    SECTION("Gaussian pair: no cancellation near zero") {
        const DensityPair pair(DensitySpec::gaussian(0, 1), DensitySpec::gaussian(0, 2));
        // exact: e^{-xi^2} - e^{-xi^2/2}; near zero the stable form must track
        // the leading -xi^2/2 behaviour with full relative accuracy
        for (double xi : {1e-3, 1e-5, 1e-7}) {
            const double lead = -xi * xi / 2.0;
            CHECK(pair.g_hat(xi).real() == Approx(lead).epsilon(1e-5));
        }
        CHECK(std::abs(pair.g_hat(0.0)) == 0.0);
    }
    SECTION("stable time-marginal pair") {
        const DensityPair pair(DensitySpec::stable_marginal(1.5, 1.0, 1.0),
                               DensitySpec::stable_marginal(1.5, 1.0, 2.0));
        for (double xi : {1e-4, 0.5, 2.0}) {
            const double e = -std::pow(std::abs(xi), 1.5);
            const double want = std::exp(e) * std::expm1(e);  // e^{2e} - e^{e}, stably
            CHECK(pair.g_hat(xi).real() == Approx(want).epsilon(1e-12));
        }
    }
}
