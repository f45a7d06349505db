#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "levysep/detail/math_util.hpp"

namespace levysep {

/// Natural cubic spline on a strictly increasing grid.
/// Exposes value, first and second derivative so interpolants can be fed to
/// the generator quadratures directly.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw std::invalid_argument("spline needs >= 3 nodes");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline grid not increasing");
        m_.assign(n, 0.0);
        // tridiagonal solve for second derivatives, natural boundary
        std::vector<double> c(n, 0.0), rhs(n, 0.0);
        std::vector<double> diag(n, 1.0), sub(n, 0.0), sup(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
        }
        // Thomas algorithm
        c[0] = sup[0] / diag[0];
        rhs[0] = rhs[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = diag[i] - sub[i] * c[i - 1];
            c[i] = sup[i] / m;
            rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / m;
        }
        m_[n - 1] = rhs[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = rhs[i] - c[i] * m_[i + 1];
        uniform_ = true;
        dx_ = (x_.back() - x_.front()) / double(n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs((x_[i] - x_[i - 1]) - dx_) > 1e-9 * std::max(1.0, dx_)) {
                uniform_ = false;
                break;
            }
        }
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    const std::vector<double>& grid() const { return x_; }
    const std::vector<double>& values() const { return y_; }

    double operator()(double x) const {
        const auto [i, t, h] = locate(x);
        const double a = 1.0 - t;
        return a * y_[i] + t * y_[i + 1] +
               h * h / 6.0 * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[i + 1]);
    }

    double deriv(double x) const {
        const auto [i, t, h] = locate(x);
        const double a = 1.0 - t;
        return (y_[i + 1] - y_[i]) / h +
               h / 6.0 * ((3.0 * t * t - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]);
    }

    double second(double x) const {
        const auto [i, t, h] = locate(x);
        return (1.0 - t) * m_[i] + t * m_[i + 1];
    }

private:
    struct Loc { std::size_t i; double t; double h; };

    Loc locate(double x) const {
        const std::size_t n = x_.size();
        std::size_t i;
        if (uniform_) {
            double fi = (x - x_.front()) / dx_;
            i = fi <= 0 ? 0 : std::min<std::size_t>(std::size_t(fi), n - 2);
        } else {
            auto it = std::upper_bound(x_.begin(), x_.end(), x);
            i = it == x_.begin() ? 0 : std::min<std::size_t>(std::size_t(it - x_.begin()) - 1, n - 2);
        }
        const double h = x_[i + 1] - x_[i];
        return {i, (x - x_[i]) / h, h};
    }

    std::vector<double> x_, y_, m_;
    bool uniform_ = false;
    double dx_ = 0.0;
};

/// Extrapolation model past the tabulated range.
enum class TailKind { zero, exponential, power };

struct TailModel {
    TailKind kind = TailKind::zero;
    double edge_x = 0.0;      ///< |x| at the fit edge
    double edge_value = 0.0;  ///< value at the edge
    double rate = 1.0;        ///< exp: v(x) = edge_value * exp(-rate (|x| - edge_x))
    double power = 2.0;       ///< pow: v(x) = edge_value * (|x|/edge_x)^{-power}

    double eval(double ax) const {
        switch (kind) {
            case TailKind::zero: return 0.0;
            case TailKind::exponential: return edge_value * std::exp(-rate * (ax - edge_x));
            case TailKind::power: return edge_value * std::pow(ax / edge_x, -power);
        }
        return 0.0;
    }

    /// Integral of the model over (|x| >= ax).
    double mass_beyond(double ax) const {
        switch (kind) {
            case TailKind::zero: return 0.0;
            case TailKind::exponential: return eval(ax) / rate;
            case TailKind::power:
                if (power <= 1.0) return detail::inf;
                return eval(ax) * ax / (power - 1.0);
        }
        return 0.0;
    }
};

/// Least-squares fit of a decay model to the outer positive samples of a
/// tabulated function. Chooses exponential vs power law by residual.
inline TailModel fit_tail(const std::vector<double>& x, const std::vector<double>& v,
                          bool right_side, double noise_floor) {
    TailModel tm;
    const std::size_t n = x.size();
    // gather outer samples (10% of the range, at least 8 points) above the floor
    std::vector<double> ax, lv;
    const std::size_t span = std::max<std::size_t>(8, n / 10);
    for (std::size_t k = 0; k < span && k < n; ++k) {
        const std::size_t i = right_side ? n - span + k : span - 1 - k;
        if (v[i] > noise_floor && std::abs(x[i]) > 0) {
            ax.push_back(std::abs(x[i]));
            lv.push_back(std::log(v[i]));
        }
    }
    if (ax.size() < 4) return tm;  // zero tail
    auto lsq = [&](bool log_abscissa) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < ax.size(); ++i) {
            const double u = log_abscissa ? std::log(ax[i]) : ax[i];
            sx += u; sy += lv[i]; sxx += u * u; sxy += u * lv[i];
        }
        const double m = double(ax.size());
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / m;
        double res = 0;
        for (std::size_t i = 0; i < ax.size(); ++i) {
            const double u = log_abscissa ? std::log(ax[i]) : ax[i];
            const double d = lv[i] - (slope * u + icpt);
            res += d * d;
        }
        return std::pair<double, double>(slope, res);
    };
    auto [exp_slope, exp_res] = lsq(false);
    auto [pow_slope, pow_res] = lsq(true);
    const std::size_t edge = right_side ? n - 1 : 0;
    tm.edge_x = std::abs(x[edge]);
    tm.edge_value = std::max(v[edge], noise_floor);
    if (pow_res < exp_res && pow_slope < -1.0) {
        tm.kind = TailKind::power;
        tm.power = -pow_slope;
    } else if (exp_slope < 0.0) {
        tm.kind = TailKind::exponential;
        tm.rate = -exp_slope;
    }
    return tm;
}

/// Spline on a grid with decay models on both sides. Evaluation outside the
/// grid goes through the tails and reports the excursion via `offgrid`.
class GriddedFunction {
public:
    GriddedFunction() = default;

    GriddedFunction(std::vector<double> x, std::vector<double> y, double noise_floor = 0.0)
        : spline_(std::move(x), std::move(y)) {
        const auto& gx = spline_.grid();
        const auto& gy = spline_.values();
        left_ = fit_tail(gx, gy, /*right=*/false, noise_floor);
        right_ = fit_tail(gx, gy, /*right=*/true, noise_floor);
    }

    double operator()(double x) const {
        bool dummy;
        return eval(x, dummy);
    }

    double eval(double x, bool& offgrid) const {
        offgrid = false;
        if (x < spline_.x_min()) {
            offgrid = true;
            return left_.eval(std::abs(x));
        }
        if (x > spline_.x_max()) {
            offgrid = true;
            return right_.eval(std::abs(x));
        }
        return spline_(x);
    }

    const CubicSpline& spline() const { return spline_; }
    const TailModel& left_tail() const { return left_; }
    const TailModel& right_tail() const { return right_; }
    double x_min() const { return spline_.x_min(); }
    double x_max() const { return spline_.x_max(); }

private:
    CubicSpline spline_;
    TailModel left_, right_;
};

}  // namespace levysep
