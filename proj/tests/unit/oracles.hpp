#pragma once

// Independent reference implementations used only by the tests. Each
// oracle restates the target quantity from scratch (literal formulas,
// generic integrators) so that agreement with the library is meaningful.

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfpa/model.hpp"

namespace oracle {

struct CoeffTable {
    std::vector<double> t;   // forward order, 0 .. T
    std::vector<double> h0;
    std::vector<double> h1;
    std::vector<double> h2;
};

// Backward RK4 on the coefficient system, written directly from the
// right-hand sides:
//   h1' = -k1 h1 - delta
//   h2' = -(1/k2) ((g+k2)/k2)^{-k2/g} e^{-g/(g+k2)} e^{-k2 h1 + k2 h2}
//   h0' = -( h1^2 / (2(1+g s^2)) + h2 s^2 )
// from h1(T)=beta, h2(T)=-theta/2, h0(T)=0.
inline CoeffTable rk4_backward_coeffs(const mfpa::MarketParams& p, std::size_t n_steps) {
    double g = p.gamma, k1 = p.k1, k2 = p.k2;
    double a_const = std::pow((g + k2) / k2, -k2 / g) * std::exp(-g / (g + k2));
    double denom = 2.0 * (1.0 + g * p.sigma * p.sigma);
    double sig2 = p.sigma * p.sigma;
    auto d1 = [&](double h1) { return -k1 * h1 - p.delta; };
    auto d2 = [&](double h1, double h2) {
        return -(1.0 / k2) * a_const * std::exp(-k2 * h1 + k2 * h2);
    };
    auto d0 = [&](double h1, double h2) { return -(h1 * h1 / denom + h2 * sig2); };

    CoeffTable tab;
    tab.t.resize(n_steps + 1);
    tab.h0.resize(n_steps + 1);
    tab.h1.resize(n_steps + 1);
    tab.h2.resize(n_steps + 1);
    double dt = p.horizon / double(n_steps);
    double h0 = 0.0, h1 = p.beta, h2 = -0.5 * p.theta;
    tab.t[n_steps] = p.horizon;
    tab.h0[n_steps] = h0;
    tab.h1[n_steps] = h1;
    tab.h2[n_steps] = h2;
    for (std::size_t i = n_steps; i > 0; --i) {
        // step backward in time: apply RK4 with negative step
        double h = -dt;
        double k1a = d1(h1), k2a = d2(h1, h2), k0a = d0(h1, h2);
        double h1b = h1 + 0.5 * h * k1a, h2b = h2 + 0.5 * h * k2a;
        double k1b = d1(h1b), k2b = d2(h1b, h2b), k0b = d0(h1b, h2b);
        double h1c = h1 + 0.5 * h * k1b, h2c = h2 + 0.5 * h * k2b;
        double k1c = d1(h1c), k2c = d2(h1c, h2c), k0c = d0(h1c, h2c);
        double h1d = h1 + h * k1c, h2d = h2 + h * k2c;
        double k1d = d1(h1d), k2d = d2(h1d, h2d), k0d = d0(h1d, h2d);
        h1 += h / 6.0 * (k1a + 2.0 * k1b + 2.0 * k1c + k1d);
        h2 += h / 6.0 * (k2a + 2.0 * k2b + 2.0 * k2c + k2d);
        h0 += h / 6.0 * (k0a + 2.0 * k0b + 2.0 * k0c + k0d);
        tab.t[i - 1] = double(i - 1) * dt;
        tab.h0[i - 1] = h0;
        tab.h1[i - 1] = h1;
        tab.h2[i - 1] = h2;
    }
    return tab;
}

// Plain trapezoid rule for h0(t) = int_t^T (h1^2/(2(1+g s^2)) + h2 s^2),
// with (h1, h2) supplied as callables.
template <typename F1, typename F2>
inline double trapezoid_h0(const mfpa::MarketParams& p, double t, const F1& h1f, const F2& h2f,
                           std::size_t n_steps) {
    double denom = 2.0 * (1.0 + p.gamma * p.sigma * p.sigma);
    double sig2 = p.sigma * p.sigma;
    auto f = [&](double s) {
        double h1 = h1f(s);
        return h1 * h1 / denom + h2f(s) * sig2;
    };
    double h = (p.horizon - t) / double(n_steps);
    double sum = 0.5 * (f(t) + f(p.horizon));
    for (std::size_t i = 1; i < n_steps; ++i) sum += f(t + double(i) * h);
    return sum * h;
}

// The explicit payoff rate of the demand-response instance, written out
// literally (not via GenericModel); -c0 = -a0^2/2 + f(t,x):
//   h = z (a0 + k1 m) - (g/2) s^2 z^2 - a0^2/2 + f0 + f1 x
//       + (1/g)(1 - e^{-g(u + a1)}) e^{-k2 a1} v
inline double h_explicit(double x, double z, double u, double m, double v, double a0, double a1,
                         const mfpa::MarketParams& p) {
    double g = p.gamma;
    return z * (a0 + p.k1 * m) - 0.5 * g * p.sigma * p.sigma * z * z - 0.5 * a0 * a0 +
           p.f_intercept + p.f_slope * x +
           (1.0 - std::exp(-g * (u + a1))) / g * std::exp(-p.k2 * a1) * v;
}

// Dense scan of h_explicit over a1 (a0 fixed at its quadratic optimum z),
// used to confirm the closed-form mitigation effort.
inline double scan_argmax_alpha1(double x, double z, double u, double m, double v,
                                 const mfpa::MarketParams& p, double lo, double hi, double step) {
    double best_a1 = lo, best = -1e300;
    for (double a1 = lo; a1 <= hi; a1 += step) {
        double val = h_explicit(x, z, u, m, v, z, a1, p);
        if (val > best) {
            best = val;
            best_a1 = a1;
        }
    }
    return best_a1;
}

struct MomentPoint {
    double m = 0.0;
    double v = 0.0;
};

// Integrating-factor solution of the linear moment system, with cumulative
// trapezoid quadrature on a fine uniform grid:
//   v(t) = e^{P(t)} ( v0 + int_0^t s^2 e^{-P} ),       P(t) = int_0^t rate
//   m(t) = e^{k1 t} ( m0 + int_0^t e^{-k1 s} (-rate v + h1/(1+g s^2)) ).
template <typename FRate, typename FH1>
inline MomentPoint integrating_factor_moments(const mfpa::MarketParams& p, double t_query,
                                              const FRate& rate, const FH1& h1f,
                                              std::size_t n_steps) {
    double dt = t_query / double(n_steps);
    double denom = 1.0 + p.gamma * p.sigma * p.sigma;
    double sig2 = p.sigma * p.sigma;
    std::vector<double> big_p(n_steps + 1), v(n_steps + 1);
    big_p[0] = 0.0;
    double prev_rate = rate(0.0);
    for (std::size_t i = 1; i <= n_steps; ++i) {
        double r = rate(double(i) * dt);
        big_p[i] = big_p[i - 1] + 0.5 * dt * (prev_rate + r);
        prev_rate = r;
    }
    double acc = 0.0;
    v[0] = p.v0;
    double prev_int = sig2 * std::exp(-big_p[0]);
    for (std::size_t i = 1; i <= n_steps; ++i) {
        double cur = sig2 * std::exp(-big_p[i]);
        acc += 0.5 * dt * (prev_int + cur);
        prev_int = cur;
        v[i] = std::exp(big_p[i]) * (p.v0 + acc);
    }
    auto m_integrand = [&](std::size_t i) {
        double s = double(i) * dt;
        return std::exp(-p.k1 * s) * (-rate(s) * v[i] + h1f(s) / denom);
    };
    double m_acc = 0.0;
    double prev_m = m_integrand(0);
    for (std::size_t i = 1; i <= n_steps; ++i) {
        double cur = m_integrand(i);
        m_acc += 0.5 * dt * (prev_m + cur);
        prev_m = cur;
    }
    MomentPoint out;
    out.v = v[n_steps];
    out.m = std::exp(p.k1 * t_query) * (p.m0 + m_acc);
    return out;
}

}  // namespace oracle
