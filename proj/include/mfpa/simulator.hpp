#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

#include "mfpa/errors.hpp"
#include "mfpa/incentives.hpp"
#include "mfpa/model.hpp"
#include "mfpa/moments.hpp"
#include "mfpa/rng.hpp"
#include "mfpa/value_ode.hpp"

namespace mfpa {

struct SimConfig {
    std::size_t n_paths = 100000;
    std::size_t n_steps = 200;
    std::uint64_t seed = 42;
    double picard_tol = 0.02;
    int picard_max_iters = 10;
    bool antithetic = false;
    std::size_t n_snapshots = 21;
    unsigned n_threads = 1;  // 0 = hardware concurrency
};

// Monte Carlo sample of coupled (X, Y) paths with per-path accumulators.
// Snapshot matrices are row-major, one row per path.
struct PathEnsemble {
    std::vector<double> x_terminal;
    std::vector<double> y_terminal;
    std::vector<unsigned> jump_count;
    std::vector<double> cost_integral;   // int c0 dt
    std::vector<double> reward_sum;      // sum alpha1 at jump times
    std::vector<double> g_integral;      // int g(t, X_t) dt
    std::vector<double> snapshot_times;
    std::vector<double> x_snapshots;     // n_paths x n_snapshots
    std::vector<double> ybar_snapshots;  // Y - int c0 + sum c1, same layout
    std::size_t n_paths = 0;
    std::size_t n_snapshots = 0;

    double x_snap(std::size_t path, std::size_t snap) const {
        return x_snapshots[path * n_snapshots + snap];
    }
    double ybar_snap(std::size_t path, std::size_t snap) const {
        return ybar_snapshots[path * n_snapshots + snap];
    }
};

namespace detail {

// Per-step tabulation of every deterministic curve the path loop needs.
struct StepTable {
    double dt = 0.0;
    double sqrt_dt = 0.0;
    std::vector<double> t;        // n_steps entries (left endpoints)
    std::vector<double> a0;       // working policy efforts
    std::vector<double> a1;
    std::vector<double> z;        // contract exposure
    std::vector<double> u;        // contract jump exposure at mark -1
    std::vector<double> lambda;   // per-path jump intensity e^{-k2 a1} v(t)
    std::vector<double> h_const;  // x-independent part of H at (z_comp, u)
    std::vector<double> m;        // candidate law mean
    std::vector<std::size_t> snap_at;  // snapshot step indices, size n_snapshots
};

inline StepTable build_step_table(const MarketParams& p, const IncentivePolicy& pol,
                                  const AgentPolicy& agent, const MomentFlow& flow,
                                  const SimConfig& cfg) {
    StepTable tab;
    std::size_t n = cfg.n_steps;
    tab.dt = p.horizon / double(n);
    tab.sqrt_dt = std::sqrt(tab.dt);
    tab.t.resize(n);
    tab.a0.resize(n);
    tab.a1.resize(n);
    tab.z.resize(n);
    tab.u.resize(n);
    tab.lambda.resize(n);
    tab.h_const.resize(n);
    tab.m.resize(n);
    double tilt = tilt_constant(p);
    for (std::size_t i = 0; i < n; ++i) {
        // midpoint evaluation of the deterministic curves keeps the
        // per-step accumulators second-order accurate in dt
        double t = (double(i) + 0.5) * tab.dt;
        tab.t[i] = t;
        tab.a0[i] = agent.a0(t);
        tab.a1[i] = agent.a1(t);
        tab.z[i] = pol.z(t);
        double zc = pol.z_for_compensation(t);
        double u = pol.u(t, -1.0);
        tab.u[i] = u;
        double m = flow.m_at(t);
        double v = flow.v_at(t);
        tab.m[i] = m;
        tab.lambda[i] = std::exp(-p.k2 * tab.a1[i]) * v;
        tab.h_const[i] = p.f_intercept + 0.5 * (1.0 - p.gamma * p.sigma * p.sigma) * zc * zc +
                         zc * p.k1 * m + tilt * std::exp(p.k2 * u) * v / (p.gamma + p.k2);
    }
    tab.snap_at.resize(cfg.n_snapshots);
    for (std::size_t j = 0; j < cfg.n_snapshots; ++j) {
        tab.snap_at[j] = cfg.n_snapshots > 1
                             ? std::size_t(std::llround(double(j) * double(n) /
                                                        double(cfg.n_snapshots - 1)))
                             : n;
    }
    return tab;
}

inline void run_paths(const MarketParams& p, const IncentivePolicy& pol, const StepTable& tab,
                      const SimConfig& cfg, std::size_t first, std::size_t last,
                      PathEnsemble& out) {
    double sqrt_v0 = std::sqrt(p.v0);
    std::size_t n_snap = tab.snap_at.size();
    for (std::size_t path = first; path < last; ++path) {
        PathRng rng = cfg.antithetic ? PathRng(cfg.seed, path / 2, path % 2 == 1)
                                     : PathRng(cfg.seed, path);
        double x = p.m0 + sqrt_v0 * rng.normal();
        double y = pol.y0;
        double cost = 0.0, reward = 0.0, g_int = 0.0;
        unsigned jumps = 0;
        std::size_t snap = 0;
        for (std::size_t i = 0; i <= cfg.n_steps; ++i) {
            while (snap < n_snap && tab.snap_at[snap] == i) {
                out.x_snapshots[path * n_snap + snap] = x;
                out.ybar_snapshots[path * n_snap + snap] = y - cost + reward;
                ++snap;
            }
            if (i == cfg.n_steps) break;
            double g_noise = rng.normal();
            unsigned dj = rng.poisson(tab.lambda[i] * tab.dt);
            double t = tab.t[i];
            double b_work = tab.a0[i] + p.k1 * tab.m[i];
            double dx_cont = b_work * tab.dt + p.sigma * tab.sqrt_dt * g_noise;
            // time integrals use the midpoint state, matching the midpoint
            // coefficient tabulation (keeps the dt-bias second order)
            double x_mid = x + 0.5 * (dx_cont - double(dj));
            double h_at_x = tab.h_const[i] + p.f_slope * x_mid;
            cost += (0.5 * tab.a0[i] * tab.a0[i] - p.f(t, x_mid)) * tab.dt;
            g_int += p.g(t, x_mid) * tab.dt;
            reward += tab.a1[i] * double(dj);
            jumps += dj;
            y += tab.z[i] * dx_cont + tab.u[i] * double(dj) - h_at_x * tab.dt;
            x += dx_cont - double(dj);
            if (!std::isfinite(x) || !std::isfinite(y)) throw NonFiniteState(path, i);
        }
        out.x_terminal[path] = x;
        out.y_terminal[path] = y;
        out.jump_count[path] = jumps;
        out.cost_integral[path] = cost;
        out.reward_sum[path] = reward;
        out.g_integral[path] = g_int;
    }
}

}  // namespace detail

// Euler-Maruyama under the working policy's measure. The contract terms
// (Z, U, H) always come from pol; the drift and jump intensity come from
// the supplied agent policy, with the law flow frozen at `flow`. Passing
// the equilibrium agent policy reproduces the equilibrium ensemble
// bit-exactly, so deviation runs share this code path.
inline PathEnsemble simulate_policy(const MarketParams& p, const IncentivePolicy& pol,
                                    const AgentPolicy& agent, const MomentFlow& flow,
                                    const SimConfig& cfg) {
    detail::StepTable tab = detail::build_step_table(p, pol, agent, flow, cfg);
    PathEnsemble out;
    out.n_paths = cfg.n_paths;
    out.n_snapshots = cfg.n_snapshots;
    out.snapshot_times.resize(cfg.n_snapshots);
    for (std::size_t j = 0; j < cfg.n_snapshots; ++j)
        out.snapshot_times[j] = double(tab.snap_at[j]) * tab.dt;
    out.x_terminal.resize(cfg.n_paths);
    out.y_terminal.resize(cfg.n_paths);
    out.jump_count.resize(cfg.n_paths);
    out.cost_integral.resize(cfg.n_paths);
    out.reward_sum.resize(cfg.n_paths);
    out.g_integral.resize(cfg.n_paths);
    out.x_snapshots.resize(cfg.n_paths * cfg.n_snapshots);
    out.ybar_snapshots.resize(cfg.n_paths * cfg.n_snapshots);

    unsigned n_threads = cfg.n_threads ? cfg.n_threads : std::thread::hardware_concurrency();
    if (n_threads <= 1 || cfg.n_paths < 2 * n_threads) {
        detail::run_paths(p, pol, tab, cfg, 0, cfg.n_paths, out);
        return out;
    }
    // Paths write disjoint slots, so partitioning cannot change results.
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    std::size_t chunk = (cfg.n_paths + n_threads - 1) / n_threads;
    for (unsigned w = 0; w < n_threads; ++w) {
        std::size_t first = std::min(cfg.n_paths, std::size_t(w) * chunk);
        std::size_t last = std::min(cfg.n_paths, first + chunk);
        if (first == last) continue;
        workers.emplace_back([&, first, last] {
            try {
                detail::run_paths(p, pol, tab, cfg, first, last, out);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

inline PathEnsemble simulate_equilibrium(const MarketParams& p, const IncentivePolicy& pol,
                                         const AgentPolicy& agent, const MomentFlow& flow,
                                         const SimConfig& cfg) {
    return simulate_policy(p, pol, agent, flow, cfg);
}

inline PathEnsemble simulate_deviation(const MarketParams& p, const IncentivePolicy& pol,
                                       const AgentPolicy& deviated, const MomentFlow& flow,
                                       const SimConfig& cfg) {
    return simulate_policy(p, pol, deviated, flow, cfg);
}

// Empirical snapshot moments of an ensemble, interpolated linearly in
// between snapshots.
inline MomentFlow empirical_moments(const PathEnsemble& ens) {
    MomentFlow flow;
    flow.grid = ens.snapshot_times;
    std::size_t s_count = ens.n_snapshots;
    flow.m.resize(s_count);
    flow.v.resize(s_count);
    flow.q.resize(s_count);
    for (std::size_t j = 0; j < s_count; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ens.n_paths; ++i) sum += ens.x_snap(i, j);
        double mean = sum / double(ens.n_paths);
        double ss = 0.0;
        for (std::size_t i = 0; i < ens.n_paths; ++i) {
            double d = ens.x_snap(i, j) - mean;
            ss += d * d;
        }
        double var = ens.n_paths > 1 ? ss / double(ens.n_paths - 1) : 0.0;
        flow.m[j] = mean;
        flow.v[j] = var;
        flow.q[j] = var + mean * mean;
    }
    return flow;
}

struct PicardResult {
    MomentFlow flow;   // empirical snapshot moments at the fixed point
    int iterations = 0;
    double gap = 0.0;
};

// Fixed-point loop on the law moments: simulate with candidate curves,
// replace them by the empirical snapshot moments, repeat. Common random
// numbers (the seed is reused) keep the gap free of fresh Monte Carlo
// noise.
inline PicardResult picard_meanfield(const MarketParams& p, const IncentivePolicy& pol,
                                     const AgentPolicy& agent, const SimConfig& cfg,
                                     const MomentFlow* initial_guess = nullptr) {
    if (cfg.picard_max_iters < 1)
        throw InvalidParameter("picard_max_iters", "must be >= 1");
    MomentFlow candidate;
    if (initial_guess) {
        candidate = *initial_guess;
    } else {
        candidate.grid = {0.0, p.horizon};
        candidate.m = {p.m0, p.m0};
        candidate.v = {p.v0, p.v0};
        candidate.q = {p.v0 + p.m0 * p.m0, p.v0 + p.m0 * p.m0};
    }
    double gap = 0.0;
    for (int iter = 1; iter <= cfg.picard_max_iters; ++iter) {
        PathEnsemble ens = simulate_policy(p, pol, agent, candidate, cfg);
        MomentFlow next = empirical_moments(ens);
        gap = 0.0;
        for (std::size_t j = 0; j < next.grid.size(); ++j) {
            gap = std::max(gap, std::abs(next.m[j] - candidate.m_at(next.grid[j])));
            gap = std::max(gap, std::abs(next.v[j] - candidate.v_at(next.grid[j])));
        }
        candidate = next;
        if (gap < cfg.picard_tol) return {std::move(candidate), iter, gap};
    }
    throw PicardNoConvergence(gap, cfg.picard_max_iters);
}

}  // namespace mfpa
