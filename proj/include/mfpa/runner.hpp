#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mfpa/config.hpp"
#include "mfpa/csv.hpp"
#include "mfpa/evaluator.hpp"
#include "mfpa/generic_mkv.hpp"
#include "mfpa/incentives.hpp"
#include "mfpa/moments.hpp"
#include "mfpa/simulator.hpp"
#include "mfpa/svg.hpp"
#include "mfpa/value_ode.hpp"

namespace mfpa {

// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kHorizonError = 3,
    kVerificationFailure = 4,
};

namespace detail {

// Everything the simulation subcommands derive from a validated config.
struct Solved {
    ValueCoefficients coeffs;
    IncentivePolicy pol;
    AgentPolicy agent;
    MomentFlow flow;
};

inline Solved solve_all(const RunConfig& cfg) {
    Solved s;
    s.coeffs = solve_coefficients(cfg.market, cfg.n_grid);
    s.pol = optimal_policy(s.coeffs, cfg.market);
    if (cfg.has_y0_override()) s.pol.y0 = cfg.y0_override;
    if (cfg.z_shift != 0.0) {
        // Corrupt the exposure while keeping the drift compensation at the
        // uncorrupted curve; the resulting contract is no longer
        // self-consistent and the envelope check downstream must notice.
        auto base_z = s.pol.z;
        double shift = cfg.z_shift;
        s.pol.z_comp = base_z;
        s.pol.z = [base_z, shift](double t) { return base_z(t) + shift; };
    }
    s.agent = equilibrium_agent_policy(s.pol, cfg.market);
    s.flow = solve_moments(s.coeffs, cfg.market, cfg.n_grid);
    return s;
}

inline void write_kv(std::ofstream& out, const std::string& key, double value) {
    out << key << '=' << format_real(value) << '\n';
}

inline double predicted_principal_value(const Solved& s, const MarketParams& p) {
    return s.coeffs.h0.front() + s.coeffs.h1.front() * p.m0 + s.coeffs.h2.front() * p.v0 -
           s.pol.y0;
}

inline std::vector<double> sample_curve(const std::function<double(double)>& f,
                                        const std::vector<double>& grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (double t : grid) out.push_back(f(t));
    return out;
}

}  // namespace detail

// solve: coefficient curves, policy curves, moment curves, summary.
inline int run_solve(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    detail::Solved s = detail::solve_all(cfg);
    const auto& c = s.coeffs;
    write_csv(out_dir + "/coefficients.csv", {"t", "h0", "h1", "h2", "h_rate"},
              {c.grid, c.h0, c.h1, c.h2, c.h_rate});
    std::vector<double> z_curve = detail::sample_curve(s.pol.z, c.grid);
    std::vector<double> u_curve =
        detail::sample_curve([&](double t) { return s.pol.u(t, -1.0); }, c.grid);
    std::vector<double> a0_curve = detail::sample_curve(s.agent.a0, c.grid);
    std::vector<double> a1_curve = detail::sample_curve(s.agent.a1, c.grid);
    write_csv(out_dir + "/policy.csv", {"t", "z", "u_minus1", "alpha0", "alpha1", "h_rate"},
              {c.grid, z_curve, u_curve, a0_curve, a1_curve, c.h_rate});
    std::vector<double> intensity(c.grid.size());
    for (std::size_t i = 0; i < c.grid.size(); ++i) intensity[i] = c.h_rate[i] * s.flow.v[i];
    write_csv(out_dir + "/moments.csv", {"t", "m", "v", "q", "intensity"},
              {s.flow.grid, s.flow.m, s.flow.v, s.flow.q, intensity});
    std::ofstream summary(out_dir + "/summary.txt", std::ios::binary);
    detail::write_kv(summary, "h0_0", c.h0.front());
    detail::write_kv(summary, "h1_0", c.h1.front());
    detail::write_kv(summary, "h2_0", c.h2.front());
    detail::write_kv(summary, "reservation_certainty_equivalent", reservation_level(cfg.market));
    detail::write_kv(summary, "y0", s.pol.y0);
    detail::write_kv(summary, "predicted_principal_value",
                     detail::predicted_principal_value(s, cfg.market));
    return kOk;
}

// simulate: equilibrium ensemble, empirical-vs-ODE moment table, plots.
// Exit 4 when the empirical moments stray beyond 3 standard errors.
inline int run_simulate(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir + "/plots");
    detail::Solved s = detail::solve_all(cfg);
    PathEnsemble ens = simulate_equilibrium(cfg.market, s.pol, s.agent, s.flow, cfg.sim);
    MomentFlow emp = empirical_moments(ens);
    std::size_t n = ens.n_paths;

    std::vector<double> m_ode(emp.grid.size()), v_ode(emp.grid.size());
    std::vector<double> m_se(emp.grid.size()), v_se(emp.grid.size());
    bool ok = true;
    for (std::size_t j = 0; j < emp.grid.size(); ++j) {
        double t = emp.grid[j];
        m_ode[j] = s.flow.m_at(t);
        v_ode[j] = s.flow.v_at(t);
        m_se[j] = std::sqrt(emp.v[j] / double(n));
        // moment-based standard error of the sample variance
        double mean = emp.m[j];
        double m4 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = ens.x_snap(i, j) - mean;
            m4 += d * d * d * d;
        }
        m4 /= double(n);
        v_se[j] = std::sqrt(std::max(0.0, m4 - emp.v[j] * emp.v[j]) / double(n));
        if (std::abs(emp.m[j] - m_ode[j]) > 3.0 * m_se[j] + 1e-12) ok = false;
        if (std::abs(emp.v[j] - v_ode[j]) > 3.0 * v_se[j] + 1e-12) ok = false;
    }
    write_csv(out_dir + "/moment_comparison.csv",
              {"t", "m_mc", "m_se", "m_ode", "v_mc", "v_se", "v_ode"},
              {emp.grid, emp.m, m_se, m_ode, emp.v, v_se, v_ode});

    MCEstimate av = agent_value(ens, cfg.market);
    MCEstimate pv = principal_value(ens, cfg.market);
    MCEstimate jumps;
    {
        std::vector<double> jc(n);
        for (std::size_t i = 0; i < n; ++i) jc[i] = double(ens.jump_count[i]);
        jumps = detail::estimate_of(jc);
    }
    std::ofstream summary(out_dir + "/ensemble_summary.txt", std::ios::binary);
    detail::write_kv(summary, "paths", double(n));
    detail::write_kv(summary, "steps", double(cfg.sim.n_steps));
    detail::write_kv(summary, "seed", double(cfg.sim.seed));
    detail::write_kv(summary, "x_terminal_mean", emp.m.back());
    detail::write_kv(summary, "x_terminal_var", emp.v.back());
    detail::write_kv(summary, "agent_value", av.mean);
    detail::write_kv(summary, "agent_value_se", av.std_error);
    detail::write_kv(summary, "principal_value", pv.mean);
    detail::write_kv(summary, "principal_value_se", pv.std_error);
    detail::write_kv(summary, "predicted_principal_value",
                     detail::predicted_principal_value(s, cfg.market));
    detail::write_kv(summary, "mean_jump_count", jumps.mean);
    detail::write_kv(summary, "mean_jump_count_se", jumps.std_error);
    detail::write_kv(summary, "moment_check_passed", ok ? 1.0 : 0.0);

    SvgChart m_chart("state mean: ODE vs Monte Carlo", "t", "m(t)");
    m_chart.add_series("ODE", s.flow.grid, s.flow.m);
    std::vector<double> m_err3(m_se);
    for (double& e : m_err3) e *= 3.0;
    m_chart.add_series("MC +-3se", emp.grid, emp.m, m_err3);
    m_chart.write(out_dir + "/plots/mean.svg");
    SvgChart v_chart("state variance: ODE vs Monte Carlo", "t", "v(t)");
    v_chart.add_series("ODE", s.flow.grid, s.flow.v);
    std::vector<double> v_err3(v_se);
    for (double& e : v_err3) e *= 3.0;
    v_chart.add_series("MC +-3se", emp.grid, emp.v, v_err3);
    v_chart.write(out_dir + "/plots/variance.svg");
    write_histogram_svg(out_dir + "/plots/xi_hist.svg", "terminal compensation xi",
                        ens.y_terminal);
    return ok ? kOk : kVerificationFailure;
}

// verify-ic: constant-shift deviation sweep plus martingale diagnostics.
// Exit 4 when any deviation beats the recommendation or the equilibrium
// value misses the -e^{-gamma Y0} envelope.
inline int run_verify_ic(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    detail::Solved s = detail::solve_all(cfg);
    ICReport report =
        ic_verify(cfg.market, s.pol, s.agent, s.flow, cfg.sim, cfg.deviation_grid);

    std::vector<double> e0s, e1s, means, ses, gaps, gap_ses, passes;
    for (std::size_t i = 0; i < report.deviations.size(); ++i) {
        const auto& d = report.deviations[i];
        e0s.push_back(cfg.deviation_grid[i].first);
        e1s.push_back(cfg.deviation_grid[i].second);
        means.push_back(d.value.mean);
        ses.push_back(d.value.std_error);
        gaps.push_back(d.paired_gap);
        gap_ses.push_back(d.paired_std_error);
        passes.push_back(d.pass ? 1.0 : 0.0);
    }
    write_csv(out_dir + "/ic_report.csv",
              {"eps0", "eps1", "agent_value", "agent_value_se", "paired_gap", "paired_gap_se",
               "pass"},
              {e0s, e1s, means, ses, gaps, gap_ses, passes});

    PathEnsemble eq = simulate_equilibrium(cfg.market, s.pol, s.agent, s.flow, cfg.sim);
    MartingaleReport mart = martingale_check(eq, cfg.market);
    std::vector<double> t_lo, t_hi, inc, inc_se;
    for (const auto& iv : mart.intervals) {
        t_lo.push_back(iv.t_lo);
        t_hi.push_back(iv.t_hi);
        inc.push_back(iv.increment);
        inc_se.push_back(iv.std_error);
    }
    write_csv(out_dir + "/martingale.csv", {"t_lo", "t_hi", "increment", "increment_se"},
              {t_lo, t_hi, inc, inc_se});

    // Envelope check: the recommended policy must realize -e^{-gamma Y0}.
    MCEstimate av = agent_value(eq, cfg.market);
    double envelope = -std::exp(-cfg.market.gamma * s.pol.y0);
    bool envelope_ok = std::abs(av.mean - envelope) <= 3.0 * av.std_error + 1e-12;

    std::ofstream summary(out_dir + "/ic_summary.txt", std::ios::binary);
    detail::write_kv(summary, "equilibrium_agent_value", report.optimal_value.mean);
    detail::write_kv(summary, "equilibrium_agent_value_se", report.optimal_value.std_error);
    detail::write_kv(summary, "envelope_value", envelope);
    detail::write_kv(summary, "envelope_ok", envelope_ok ? 1.0 : 0.0);
    detail::write_kv(summary, "all_deviations_pass", report.all_pass ? 1.0 : 0.0);
    detail::write_kv(summary, "martingale_ok", mart.martingale ? 1.0 : 0.0);
    return (report.all_pass && envelope_ok) ? kOk : kVerificationFailure;
}

// sweep: one row per value of one market parameter; per-value failures
// are recorded in the row and the run continues.
inline int run_sweep(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    if (cfg.sweep_param.empty() || cfg.sweep_values.empty())
        throw ConfigError("sweep requires run.sweep_param and run.sweep_values");
    fs::create_directories(out_dir + "/plots");
    std::vector<double> values, statuses, h0s, predicted, mc_mean, mc_se, expected_jumps,
        jump_mean, jump_se;
    double nan = std::numeric_limits<double>::quiet_NaN();
    SvgChart overlay("state mean under " + cfg.sweep_param + " sweep", "t", "m(t)");
    for (double value : cfg.sweep_values) {
        RunConfig local = cfg;
        double status = kOk;
        double h0 = nan, pred = nan, pv_mean = nan, pv_se = nan;
        double ej = nan, jm = nan, jse = nan;
        try {
            set_market_field(local.market, cfg.sweep_param, value);
            ensure_valid(local.market);
            detail::Solved s = detail::solve_all(local);
            h0 = s.coeffs.h0.front();
            pred = detail::predicted_principal_value(s, local.market);
            // deterministic expected jump count: int h_rate(t) v(t) dt
            ej = 0.0;
            for (std::size_t i = 0; i + 1 < s.coeffs.grid.size(); ++i) {
                double dt = s.coeffs.grid[i + 1] - s.coeffs.grid[i];
                ej += 0.5 * dt *
                      (s.coeffs.h_rate[i] * s.flow.v[i] +
                       s.coeffs.h_rate[i + 1] * s.flow.v[i + 1]);
            }
            PathEnsemble ens =
                simulate_equilibrium(local.market, s.pol, s.agent, s.flow, local.sim);
            MCEstimate pv = principal_value(ens, local.market);
            pv_mean = pv.mean;
            pv_se = pv.std_error;
            std::vector<double> jc(ens.n_paths);
            for (std::size_t i = 0; i < ens.n_paths; ++i) jc[i] = double(ens.jump_count[i]);
            MCEstimate j = detail::estimate_of(jc);
            jm = j.mean;
            jse = j.std_error;
            overlay.add_series(cfg.sweep_param + "=" + format_real(value), s.flow.grid, s.flow.m);
        } catch (const InvalidParameter&) {
            status = kConfigError;
        } catch (const HorizonTooLong&) {
            status = kHorizonError;
        }
        values.push_back(value);
        statuses.push_back(status);
        h0s.push_back(h0);
        predicted.push_back(pred);
        mc_mean.push_back(pv_mean);
        mc_se.push_back(pv_se);
        expected_jumps.push_back(ej);
        jump_mean.push_back(jm);
        jump_se.push_back(jse);
    }
    write_csv(out_dir + "/sweep.csv",
              {"value", "status", "h0_0", "predicted_principal", "mc_principal",
               "mc_principal_se", "expected_jumps", "mc_jumps", "mc_jumps_se"},
              {values, statuses, h0s, predicted, mc_mean, mc_se, expected_jumps, jump_mean,
               jump_se});
    overlay.write(out_dir + "/plots/sweep_mean.svg");
    return kOk;
}

// simulate-generic: the explicit instance pushed through the
// model-agnostic engine, reported next to the specialized results.
inline int run_simulate_generic(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    detail::Solved s = detail::solve_all(cfg);
    GenericRun run;
    run.model = example_model(cfg.market);
    run.incentive = s.pol;
    run.gamma = cfg.market.gamma;
    run.horizon = cfg.market.horizon;
    run.x0_mean = cfg.market.m0;
    run.x0_var = cfg.market.v0;
    run.sim = cfg.sim;
    run.center = best_response_closed(
        IncentiveSlice{s.pol.z(0.0), {s.pol.u(0.0, -1.0)}}, cfg.market);
    GenericResult gen = simulate_generic(run, &s.flow);
    MomentFlow emp = gen.empirical;
    MCEstimate av = agent_value(gen.ensemble, cfg.market);
    std::ofstream summary(out_dir + "/generic_summary.txt", std::ios::binary);
    detail::write_kv(summary, "picard_iterations", double(gen.iterations));
    detail::write_kv(summary, "picard_gap", gen.gap);
    detail::write_kv(summary, "m_T", emp.m.back());
    detail::write_kv(summary, "v_T", emp.v.back());
    detail::write_kv(summary, "m_T_ode", s.flow.m.back());
    detail::write_kv(summary, "v_T_ode", s.flow.v.back());
    detail::write_kv(summary, "agent_value", av.mean);
    detail::write_kv(summary, "agent_value_se", av.std_error);
    return kOk;
}

}  // namespace mfpa
