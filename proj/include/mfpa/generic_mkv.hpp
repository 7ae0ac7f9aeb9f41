#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "mfpa/errors.hpp"
#include "mfpa/hamiltonian.hpp"
#include "mfpa/incentives.hpp"
#include "mfpa/model.hpp"
#include "mfpa/moments.hpp"
#include "mfpa/rng.hpp"
#include "mfpa/simulator.hpp"

namespace mfpa {

// A model-agnostic run: per-step grid best response instead of closed
// forms. Used to confirm the specialized engine on an independent path.
struct GenericRun {
    GenericModel model;
    IncentivePolicy incentive;
    double gamma = 1.0;
    double horizon = 1.0;
    double x0_mean = 0.0;
    double x0_var = 0.0;
    SimConfig sim;
    // argmax search: first step of each path searches +-cold_half_width
    // around `center`, later steps warm-start at the previous optimum.
    ControlPoint center;
    double cold_half_width = 1.0;
    double warm_half_width = 0.1;
    std::size_t n_axis = 9;
    double target_step = 0.004;
};

struct GenericResult {
    PathEnsemble ensemble;
    MomentFlow empirical;
    int iterations = 0;
    double gap = 0.0;
};

namespace detail {

inline void run_generic_paths(const GenericRun& run, const MomentFlow& candidate,
                              std::size_t first, std::size_t last, PathEnsemble& out) {
    const GenericModel& model = run.model;
    const SimConfig& cfg = run.sim;
    std::size_t n_marks = model.marks.size();
    std::size_t n_snap = cfg.n_snapshots;
    double dt = run.horizon / double(cfg.n_steps);
    double sqrt_dt = std::sqrt(dt);
    double sqrt_v0 = std::sqrt(run.x0_var);
    std::vector<std::size_t> snap_at(n_snap);
    for (std::size_t j = 0; j < n_snap; ++j)
        snap_at[j] = std::size_t(
            std::llround(double(j) * double(cfg.n_steps) / double(n_snap - 1)));

    IncentiveSlice slice;
    slice.u.resize(n_marks);
    for (std::size_t path = first; path < last; ++path) {
        PathRng rng = cfg.antithetic ? PathRng(cfg.seed, path / 2, path % 2 == 1)
                                     : PathRng(cfg.seed, path);
        double x = run.x0_mean + sqrt_v0 * rng.normal();
        double y = run.incentive.y0;
        double cost = 0.0, reward = 0.0;
        unsigned jumps = 0;
        std::size_t snap = 0;
        ControlPoint warm = run.center;
        bool cold = true;
        for (std::size_t i = 0; i <= cfg.n_steps; ++i) {
            while (snap < n_snap && snap_at[snap] == i) {
                out.x_snapshots[path * n_snap + snap] = x;
                out.ybar_snapshots[path * n_snap + snap] = y - cost + reward;
                ++snap;
            }
            if (i == cfg.n_steps) break;
            double t = (double(i) + 0.5) * dt;  // midpoint, as in the specialized engine
            LawMoments law{candidate.m_at(t), candidate.v_at(t)};
            slice.z = run.incentive.z(t);
            for (std::size_t j = 0; j < n_marks; ++j)
                slice.u[j] = run.incentive.u(t, model.marks[j]);
            ControlPoint a = best_response_refined(
                t, x, slice, law, model, run.gamma, warm,
                cold ? run.cold_half_width : run.warm_half_width, run.n_axis, run.target_step);
            warm = a;
            cold = false;
            double b = model.drift(t, x, law.mean, a);
            double vol = model.vol(t, x);
            double g_noise = rng.normal();
            double dx_cont = b * dt + vol * sqrt_dt * g_noise;
            double dx_jump = 0.0, dy_jump = 0.0;
            for (std::size_t j = 0; j < n_marks; ++j) {
                double rate = model.intensity_tilt(t, x, model.marks[j], law, a) *
                              model.base_rates[j];
                unsigned count = rng.poisson(rate * dt);
                if (count > 0) {
                    dx_jump += model.marks[j] * double(count);
                    dy_jump += slice.u[j] * double(count);
                    reward += model.jump_reward(t, x, model.marks[j], law, a) * double(count);
                    jumps += count;
                }
            }
            // time integrals at the midpoint state, as in the specialized
            // engine (the control stays the one chosen at the left endpoint)
            double x_mid = x + 0.5 * (dx_cont + dx_jump);
            double h_val = h_integrand(t, x_mid, slice, law, a, model, run.gamma);
            cost += model.run_cost(t, x_mid, law, a) * dt;
            y += slice.z * dx_cont + dy_jump - h_val * dt;
            x += dx_cont + dx_jump;
            if (!std::isfinite(x) || !std::isfinite(y)) throw NonFiniteState(path, i);
        }
        out.x_terminal[path] = x;
        out.y_terminal[path] = y;
        out.jump_count[path] = jumps;
        out.cost_integral[path] = cost;
        out.reward_sum[path] = reward;
        out.g_integral[path] = 0.0;
    }
}

inline PathEnsemble simulate_generic_once(const GenericRun& run, const MomentFlow& candidate) {
    const SimConfig& cfg = run.sim;
    if (run.model.marks.empty() || run.model.marks.size() != run.model.base_rates.size())
        throw InvalidParameter("marks", "marks and base_rates must be nonempty, same length");
    PathEnsemble out;
    out.n_paths = cfg.n_paths;
    out.n_snapshots = cfg.n_snapshots;
    double dt = run.horizon / double(cfg.n_steps);
    out.snapshot_times.resize(cfg.n_snapshots);
    for (std::size_t j = 0; j < cfg.n_snapshots; ++j)
        out.snapshot_times[j] =
            double(std::llround(double(j) * double(cfg.n_steps) / double(cfg.n_snapshots - 1))) *
            dt;
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
        run_generic_paths(run, candidate, 0, cfg.n_paths, out);
        return out;
    }
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
                run_generic_paths(run, candidate, first, last, out);
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

}  // namespace detail

// Outer Picard loop on empirical moments, same contract as the
// specialized engine's loop. An initial guess (for instance the moment
// ODE solution) shortens the iteration count.
inline GenericResult simulate_generic(const GenericRun& run,
                                      const MomentFlow* initial_guess = nullptr) {
    if (run.sim.picard_max_iters < 1)
        throw InvalidParameter("picard_max_iters", "must be >= 1");
    MomentFlow candidate;
    if (initial_guess) {
        candidate = *initial_guess;
    } else {
        double q0 = run.x0_var + run.x0_mean * run.x0_mean;
        candidate.grid = {0.0, run.horizon};
        candidate.m = {run.x0_mean, run.x0_mean};
        candidate.v = {run.x0_var, run.x0_var};
        candidate.q = {q0, q0};
    }
    GenericResult result;
    for (int iter = 1; iter <= run.sim.picard_max_iters; ++iter) {
        PathEnsemble ens = detail::simulate_generic_once(run, candidate);
        MomentFlow next = empirical_moments(ens);
        double gap = 0.0;
        for (std::size_t j = 0; j < next.grid.size(); ++j) {
            gap = std::max(gap, std::abs(next.m[j] - candidate.m_at(next.grid[j])));
            gap = std::max(gap, std::abs(next.v[j] - candidate.v_at(next.grid[j])));
        }
        candidate = next;
        result.iterations = iter;
        result.gap = gap;
        if (gap < run.sim.picard_tol) {
            result.ensemble = std::move(ens);
            result.empirical = std::move(candidate);
            return result;
        }
    }
    throw PicardNoConvergence(result.gap, run.sim.picard_max_iters);
}

}  // namespace mfpa
