#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace levysep {

/// Kahan-compensated accumulator; keeps parallel-then-sequential reductions
/// order-independent at the reported precision.
class KahanSum {
public:
    void add(double v) {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0, c_ = 0.0;
};

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

inline MeanSE mean_se(const std::vector<double>& v) {
    MeanSE r;
    r.n = v.size();
    if (r.n == 0) return r;
    KahanSum s;
    for (double x : v) s.add(x);
    r.mean = s.value() / double(r.n);
    if (r.n > 1) {
        KahanSum q;
        for (double x : v) q.add((x - r.mean) * (x - r.mean));
        r.se = std::sqrt(q.value() / double(r.n - 1) / double(r.n));
    }
    return r;
}

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
/// `sorted` must be ascending.
inline double ks_statistic(const std::vector<double>& sorted,
                           const std::function<double(double)>& cdf) {
    const double n = double(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::max((double(i) + 1.0) / n - f, f - double(i) / n));
    }
    return d;
}

/// W1 distance between the empirical law of `sorted` and the law with the
/// given quantile function, via the standard quantile-coupling estimator.
inline double wasserstein1(const std::vector<double>& sorted,
                           const std::function<double(double)>& quantile) {
    const std::size_t n = sorted.size();
    if (n == 0) return 0.0;
    KahanSum s;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (double(i) + 0.5) / double(n);
        s.add(std::abs(sorted[i] - quantile(p)));
    }
    return s.value() / double(n);
}

}  // namespace levysep
