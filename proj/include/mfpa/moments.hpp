#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mfpa/model.hpp"
#include "mfpa/value_ode.hpp"

namespace mfpa {

// Deterministic mean/variance/second-moment curves of the equilibrium law.
struct MomentFlow {
    std::vector<double> grid;
    std::vector<double> m;
    std::vector<double> v;
    std::vector<double> q;  // v + m^2

    double interp(const std::vector<double>& values, double t) const {
        if (t <= grid.front()) return values.front();
        if (t >= grid.back()) return values.back();
        // grid may be nonuniform (empirical snapshot grids), search linearly
        // from a uniform guess.
        std::size_t n = grid.size();
        double dt = (grid.back() - grid.front()) / double(n - 1);
        std::size_t i = std::size_t((t - grid.front()) / dt);
        if (i >= n - 1) i = n - 2;
        while (i > 0 && grid[i] > t) --i;
        while (i + 2 < n && grid[i + 1] < t) ++i;
        double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }
    double m_at(double t) const { return interp(m, t); }
    double v_at(double t) const { return interp(v, t); }
};

// RK4 on the linear system
//   m' = k1 m - h(t) v + h1(t)/(1+gamma sigma^2),
//   v' = h(t) v + sigma^2,
// with the coefficient curves evaluated in closed form at substeps.
inline MomentFlow solve_moments(const ValueCoefficients& coeffs, const MarketParams& p,
                                std::size_t n_grid) {
    if (n_grid < 2) throw InvalidParameter("n_grid", "must be >= 2");
    MomentFlow flow;
    flow.grid.resize(n_grid);
    flow.m.resize(n_grid);
    flow.v.resize(n_grid);
    flow.q.resize(n_grid);
    double denom = 1.0 + p.gamma * p.sigma * p.sigma;
    double sig2 = p.sigma * p.sigma;
    auto rhs = [&](double t, double m, double v, double& dm, double& dv) {
        double rate = coeffs.h_rate_eval(t);
        dm = p.k1 * m - rate * v + coeffs.h1_eval(t) / denom;
        dv = rate * v + sig2;
    };
    double dt = p.horizon / double(n_grid - 1);
    double m = p.m0, v = p.v0;
    for (std::size_t i = 0; i < n_grid; ++i) {
        double t = double(i) * dt;
        flow.grid[i] = (i + 1 == n_grid) ? p.horizon : t;
        flow.m[i] = m;
        flow.v[i] = v;
        flow.q[i] = v + m * m;
        if (i + 1 == n_grid) break;
        double k1m, k1v, k2m, k2v, k3m, k3v, k4m, k4v;
        rhs(t, m, v, k1m, k1v);
        rhs(t + 0.5 * dt, m + 0.5 * dt * k1m, v + 0.5 * dt * k1v, k2m, k2v);
        rhs(t + 0.5 * dt, m + 0.5 * dt * k2m, v + 0.5 * dt * k2v, k3m, k3v);
        rhs(t + dt, m + dt * k3m, v + dt * k3v, k4m, k4v);
        m += dt / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return flow;
}

// Both candidate right-hand sides for q'(t) = d/dt E[X^2]: the printed
// source formula with jump term -h(t)(2m+1)v, and the independently
// derived one with jump term h(t)(1-2m)v. Only the derived variant is
// consistent with v' = h(t)v + sigma^2, which is what the flow
// integrates; the Monte Carlo adjudication lives in the tests.
struct QPrimeVariants {
    double printed;
    double derived;
};

inline QPrimeVariants q_prime_variants(double t, double m, double v,
                                       const ValueCoefficients& coeffs, const MarketParams& p) {
    double rate = coeffs.h_rate_eval(t);
    double common = 2.0 * p.k1 * m * m + p.sigma * p.sigma +
                    2.0 * coeffs.h1_eval(t) / (1.0 + p.gamma * p.sigma * p.sigma) * m;
    return {common - rate * (2.0 * m + 1.0) * v, common + rate * (1.0 - 2.0 * m) * v};
}

}  // namespace mfpa
