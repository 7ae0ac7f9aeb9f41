#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mfpa/model.hpp"
#include "mfpa/simulator.hpp"

namespace mfpa {

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

namespace detail {

inline MCEstimate estimate_of(const std::vector<double>& sample) {
    MCEstimate e;
    e.n = sample.size();
    if (e.n == 0) return e;
    double sum = 0.0;
    for (double x : sample) sum += x;
    e.mean = sum / double(e.n);
    double ss = 0.0;
    for (double x : sample) {
        double d = x - e.mean;
        ss += d * d;
    }
    if (e.n > 1) e.std_error = std::sqrt(ss / double(e.n - 1) / double(e.n));
    return e;
}

}  // namespace detail

// Per-path realized agent utility -e^{-gamma(Y_T - int c0 + sum c1)}.
inline std::vector<double> agent_utilities(const PathEnsemble& ens, const MarketParams& p) {
    std::vector<double> util(ens.n_paths);
    for (std::size_t i = 0; i < ens.n_paths; ++i) {
        util[i] = -std::exp(-p.gamma *
                            (ens.y_terminal[i] - ens.cost_integral[i] + ens.reward_sum[i]));
    }
    return util;
}

inline MCEstimate agent_value(const PathEnsemble& ens, const MarketParams& p) {
    return detail::estimate_of(agent_utilities(ens, p));
}

// beta E[X_T] - E[xi] - E[int g] - (theta/2) Var(X_T), with a delta-method
// standard error through per-path influence values.
inline MCEstimate principal_value(const PathEnsemble& ens, const MarketParams& p) {
    std::size_t n = ens.n_paths;
    MCEstimate e;
    e.n = n;
    if (n == 0) return e;
    double x_mean = 0.0, lin_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x_mean += ens.x_terminal[i];
        lin_mean += p.beta * ens.x_terminal[i] - ens.y_terminal[i] - ens.g_integral[i];
    }
    x_mean /= double(n);
    lin_mean /= double(n);
    double x_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = ens.x_terminal[i] - x_mean;
        x_var += d * d;
    }
    x_var = n > 1 ? x_var / double(n - 1) : 0.0;
    e.mean = lin_mean - 0.5 * p.theta * x_var;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = ens.x_terminal[i] - x_mean;
        double lin = p.beta * ens.x_terminal[i] - ens.y_terminal[i] - ens.g_integral[i];
        double infl = (lin - lin_mean) - 0.5 * p.theta * (dx * dx - x_var);
        ss += infl * infl;
    }
    if (n > 1) e.std_error = std::sqrt(ss / double(n - 1) / double(n));
    return e;
}

struct DeviationResult {
    std::string description;
    MCEstimate value;
    double paired_gap = 0.0;       // mean of (deviation - optimal) per path
    double paired_std_error = 0.0;
    bool pass = false;
};

struct ICReport {
    MCEstimate optimal_value;
    std::vector<DeviationResult> deviations;
    bool all_pass = true;
};

// Simulates the equilibrium once and each constant-shift deviation
// (a0*+e0, a1*+e1) with the same seed; a deviation passes when its paired
// value gain is within threshold_se standard errors of zero.
inline ICReport ic_verify(const MarketParams& p, const IncentivePolicy& pol,
                          const AgentPolicy& agent, const MomentFlow& flow, const SimConfig& cfg,
                          const std::vector<std::pair<double, double>>& deviation_grid,
                          double threshold_se = 3.0) {
    ICReport report;
    PathEnsemble base = simulate_policy(p, pol, agent, flow, cfg);
    std::vector<double> base_util = agent_utilities(base, p);
    report.optimal_value = detail::estimate_of(base_util);
    for (auto [e0, e1] : deviation_grid) {
        AgentPolicy dev;
        auto a0 = agent.a0;
        auto a1 = agent.a1;
        dev.a0 = [a0, e0 = e0](double t) { return a0(t) + e0; };
        dev.a1 = [a1, e1 = e1](double t) { return a1(t) + e1; };
        PathEnsemble dev_ens = simulate_policy(p, pol, dev, flow, cfg);
        std::vector<double> dev_util = agent_utilities(dev_ens, p);
        std::vector<double> diff(dev_util.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = dev_util[i] - base_util[i];
        MCEstimate paired = detail::estimate_of(diff);
        DeviationResult r;
        r.description = "(" + std::to_string(e0) + "," + std::to_string(e1) + ")";
        r.value = detail::estimate_of(dev_util);
        r.paired_gap = paired.mean;
        r.paired_std_error = paired.std_error;
        r.pass = paired.mean <= threshold_se * paired.std_error;
        report.all_pass = report.all_pass && r.pass;
        report.deviations.push_back(std::move(r));
    }
    return report;
}

struct MartingaleInterval {
    double t_lo = 0.0, t_hi = 0.0;
    double increment = 0.0;   // E[e^{-gamma Ybar_{t+1}}] - E[e^{-gamma Ybar_t}]
    double std_error = 0.0;   // paired, per path
};

struct MartingaleReport {
    std::vector<MartingaleInterval> intervals;
    bool submartingale = true;  // all increments >= -threshold SE
    bool martingale = true;     // all |increments| <= threshold SE
};

// Snapshot increments of E[e^{-gamma Ybar}]: within noise of zero at the
// optimum (martingale), nonnegative in expectation otherwise.
inline MartingaleReport martingale_check(const PathEnsemble& ens, const MarketParams& p,
                                         double threshold_se = 3.0) {
    MartingaleReport report;
    std::size_t s_count = ens.n_snapshots;
    std::vector<double> diff(ens.n_paths);
    for (std::size_t j = 0; j + 1 < s_count; ++j) {
        for (std::size_t i = 0; i < ens.n_paths; ++i) {
            diff[i] = std::exp(-p.gamma * ens.ybar_snap(i, j + 1)) -
                      std::exp(-p.gamma * ens.ybar_snap(i, j));
        }
        MCEstimate e = detail::estimate_of(diff);
        MartingaleInterval interval;
        interval.t_lo = ens.snapshot_times[j];
        interval.t_hi = ens.snapshot_times[j + 1];
        interval.increment = e.mean;
        interval.std_error = e.std_error;
        // Absolute floor absorbs rounding in the degenerate noise-free case.
        double tol = threshold_se * e.std_error + 1e-12;
        report.submartingale = report.submartingale && e.mean >= -tol;
        report.martingale = report.martingale && std::abs(e.mean) <= tol;
        report.intervals.push_back(interval);
    }
    return report;
}

}  // namespace mfpa
