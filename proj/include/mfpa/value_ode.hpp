#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mfpa/errors.hpp"
#include "mfpa/model.hpp"
#include "mfpa/quadrature.hpp"

namespace mfpa {

// Threshold below which k1 is treated as zero and the removable
// singularity in the h1 closed form is replaced by its limit.
inline constexpr double k_small_k1 = 1e-12;

// ((gamma+k2)/k2)^{-k2/gamma}, the constant tilt factor at the optimal
// mitigation effort.
inline double tilt_constant(const MarketParams& p) {
    return std::pow((p.gamma + p.k2) / p.k2, -p.k2 / p.gamma);
}

// h1(t) = (beta + delta/k1) e^{k1(T-t)} - delta/k1, with the k1 -> 0
// limit beta + delta (T-t).
inline double h1_closed(double t, const MarketParams& p) {
    double s = p.horizon - t;
    if (std::abs(p.k1) < k_small_k1) return p.beta + p.delta * s;
    return (p.beta + p.delta / p.k1) * std::exp(p.k1 * s) - p.delta / p.k1;
}

// e^{-k2 h2(t)} = e^{k2 theta/2}
//   - ((gamma+k2)/k2)^{-k2/gamma} e^{-gamma/(gamma+k2)} int_t^T e^{-k2 h1(s)} ds.
// Writing the integral against h1 directly covers the k1 -> 0 branch and
// sidesteps an index typo in the substituted constant of the printed form.
inline double h2_closed(double t, const MarketParams& p, double rel_tol = 1e-10) {
    double integral = integrate([&](double s) { return std::exp(-p.k2 * h1_closed(s, p)); }, t,
                                p.horizon, rel_tol);
    double arg = std::exp(0.5 * p.k2 * p.theta) -
                 tilt_constant(p) * std::exp(-p.gamma / (p.gamma + p.k2)) * integral;
    if (!(arg > 0.0)) throw HorizonTooLong(t);
    return -std::log(arg) / p.k2;
}

// Jump-rate factor h(t) = ((gamma+k2)/k2)^{-k2/gamma}
//   e^{-gamma/(gamma+k2) - k2 h1(t) + k2 h2(t)}.
inline double h_rate_closed(double t, const MarketParams& p) {
    return tilt_constant(p) * std::exp(-p.gamma / (p.gamma + p.k2) - p.k2 * h1_closed(t, p) +
                                       p.k2 * h2_closed(t, p));
}

// h0(t) = int_t^T ( h1^2 / (2(1+gamma sigma^2)) + h2 sigma^2 ) ds.
inline double h0_quadrature(double t, const MarketParams& p, double rel_tol = 1e-10) {
    double denom = 2.0 * (1.0 + p.gamma * p.sigma * p.sigma);
    return integrate(
        [&](double s) {
            double h1 = h1_closed(s, p);
            return h1 * h1 / denom + h2_closed(s, p) * p.sigma * p.sigma;
        },
        t, p.horizon, rel_tol);
}

// Value coefficients tabulated on a uniform grid, plus closed-form
// evaluators for off-grid queries.
struct ValueCoefficients {
    MarketParams params;
    std::vector<double> grid;
    std::vector<double> h0;
    std::vector<double> h1;
    std::vector<double> h2;
    std::vector<double> h_rate;

    double h0_eval(double t) const { return h0_quadrature(t, params); }
    double h1_eval(double t) const { return h1_closed(t, params); }
    double h2_eval(double t) const { return h2_closed(t, params); }
    double h_rate_eval(double t) const { return h_rate_closed(t, params); }

    double interp(const std::vector<double>& values, double t) const {
        if (t <= grid.front()) return values.front();
        if (t >= grid.back()) return values.back();
        double dt = grid[1] - grid[0];
        auto i = std::size_t((t - grid.front()) / dt);
        if (i >= grid.size() - 1) i = grid.size() - 2;
        double w = (t - grid[i]) / dt;
        return (1.0 - w) * values[i] + w * values[i + 1];
    }
    double h0_at(double t) const { return interp(h0, t); }
    double h1_at(double t) const { return interp(h1, t); }
    double h2_at(double t) const { return interp(h2, t); }
    double h_rate_at(double t) const { return interp(h_rate, t); }
};

inline ValueCoefficients solve_coefficients(const MarketParams& p, std::size_t n_grid) {
    ensure_valid(p);
    if (n_grid < 2) throw InvalidParameter("n_grid", "must be >= 2");
    ValueCoefficients c;
    c.params = p;
    c.grid.resize(n_grid);
    c.h0.resize(n_grid);
    c.h1.resize(n_grid);
    c.h2.resize(n_grid);
    c.h_rate.resize(n_grid);
    double dt = p.horizon / double(n_grid - 1);
    // h2_closed throws at the earliest invalid time: the integral grows
    // as t decreases, so scan from t=0 upward would report the earliest.
    // A single probe at t=0 suffices because invalidity is monotone.
    for (std::size_t i = 0; i < n_grid; ++i) {
        double t = (i + 1 == n_grid) ? p.horizon : double(i) * dt;
        c.grid[i] = t;
        c.h1[i] = h1_closed(t, p);
        c.h2[i] = h2_closed(t, p);
        c.h0[i] = h0_quadrature(t, p);
        c.h_rate[i] = tilt_constant(p) *
                      std::exp(-p.gamma / (p.gamma + p.k2) - p.k2 * c.h1[i] + p.k2 * c.h2[i]);
    }
    // Pin the terminal conditions exactly.
    c.h1.back() = p.beta;
    c.h2.back() = -0.5 * p.theta;
    c.h0.back() = 0.0;
    return c;
}

// Max absolute residual of the measure-space HJB equation on the ansatz
// value function V = h0 + h1 m + h2 v - m_y, using central finite
// differences in t for dV/dt and the explicit sup formula. Small for the
// closed forms since they solve the coefficient ODEs.
template <typename F0, typename F1, typename F2>
inline double hjb_residual_curves(const MarketParams& p, const std::vector<double>& times,
                                  const F0& h0f, const F1& h1f, const F2& h2f,
                                  const std::vector<LawMoments>& samples, double fd_step = 1e-3) {
    double denom = 2.0 * (1.0 + p.gamma * p.sigma * p.sigma);
    double tilt = tilt_constant(p);
    double worst = 0.0;
    for (double t : times) {
        double lo = t - fd_step, hi = t + fd_step;
        if (lo < 0.0) { lo = 0.0; hi = 2.0 * fd_step; }
        if (hi > p.horizon) { hi = p.horizon; lo = p.horizon - 2.0 * fd_step; }
        double d_h0 = (h0f(hi) - h0f(lo)) / (hi - lo);
        double d_h1 = (h1f(hi) - h1f(lo)) / (hi - lo);
        double d_h2 = (h2f(hi) - h2f(lo)) / (hi - lo);
        // the shifted stencils near the endpoints are centered at the
        // stencil midpoint, so evaluate the sup side there as well
        double tm = 0.5 * (lo + hi);
        double h1 = h1f(tm);
        double h2 = h2f(tm);
        double rate =
            tilt * std::exp(-p.gamma / (p.gamma + p.k2) - p.k2 * h1 + p.k2 * h2);
        for (const LawMoments& law : samples) {
            double dt_v = d_h0 + d_h1 * law.mean + d_h2 * law.var;
            double sup = h1 * h1 / denom + h2 * p.sigma * p.sigma +
                         (h1 * p.k1 + p.delta) * law.mean + rate / p.k2 * law.var;
            worst = std::max(worst, std::abs(dt_v + sup));
        }
    }
    return worst;
}

inline double hjb_residual(const ValueCoefficients& c, const MarketParams& p,
                           const std::vector<LawMoments>& samples, double fd_step = 1e-3) {
    return hjb_residual_curves(
        p, c.grid, [&](double t) { return c.h0_eval(t); }, [&](double t) { return c.h1_eval(t); },
        [&](double t) { return c.h2_eval(t); }, samples, fd_step);
}

}  // namespace mfpa
