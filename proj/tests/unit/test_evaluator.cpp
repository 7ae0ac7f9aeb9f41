#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfpa/evaluator.hpp"
#include "mfpa/incentives.hpp"
#include "mfpa/moments.hpp"
#include "mfpa/simulator.hpp"
#include "mfpa/value_ode.hpp"

using namespace mfpa;

namespace {

struct Setup {
    MarketParams p;
    ValueCoefficients coeffs;
    IncentivePolicy pol;
    AgentPolicy agent;
    MomentFlow flow;
};

Setup make_setup(const MarketParams& p) {
    Setup s;
    s.p = p;
    if (p.sigma > 0.0) {
        s.coeffs = solve_coefficients(p, 201);
    } else {
        s.coeffs.params = p;
    }
    s.pol = optimal_policy(s.coeffs, p);
    s.agent = equilibrium_agent_policy(s.pol, p);
    s.flow = solve_moments(s.coeffs, p, 201);
    return s;
}

SimConfig cfg_paths(std::size_t n) {
    SimConfig cfg;
    cfg.n_paths = n;
    cfg.n_steps = 200;
    cfg.seed = 42;
    return cfg;
}

}  // namespace

TEST_CASE("agent value at the reservation level") {
    MarketParams p;
    Setup s = make_setup(p);
    PathEnsemble ens = simulate_equilibrium(p, s.pol, s.agent, s.flow, cfg_paths(20000));
    MCEstimate av = agent_value(ens, p);
    // Y0 = reservation certainty equivalent 0, so the value is R0 = -1;
    // allow a small Euler-bias cushion on top of the statistical band
    CHECK(std::abs(av.mean - (-1.0)) <= 3.0 * av.std_error + 0.004);
    CHECK(av.std_error > 0.0);
    CHECK(av.n == 20000);
}

TEST_CASE("agent value tracks a shifted starting certainty equivalent") {
    MarketParams p;
    Setup s = make_setup(p);
    s.pol.y0 += 0.3;
    PathEnsemble ens = simulate_equilibrium(p, s.pol, s.agent, s.flow, cfg_paths(20000));
    MCEstimate av = agent_value(ens, p);
    CHECK(std::abs(av.mean - (-std::exp(-0.3))) <= 3.0 * av.std_error + 0.004);
}

TEST_CASE("deterministic ensemble has exact agent value") {
    MarketParams p;
    p.sigma = 0.0;
    p.v0 = 0.0;
    Setup s = make_setup(p);
    PathEnsemble ens = simulate_equilibrium(p, s.pol, s.agent, s.flow, cfg_paths(4));
    MCEstimate av = agent_value(ens, p);
    CHECK(av.std_error == 0.0);
    CHECK(av.mean == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("principal value reduces to -E[xi] when beta = theta = 0 and g = 0") {
    MarketParams p;
    p.beta = 0.0;
    p.theta = 0.0;
    p.delta = 0.0;
    p.f_slope = 0.0;  // g = f = 0
    Setup s = make_setup(p);
    PathEnsemble ens = simulate_equilibrium(p, s.pol, s.agent, s.flow, cfg_paths(3000));
    MCEstimate pv = principal_value(ens, p);
    double xi_mean = 0.0;
    for (double y : ens.y_terminal) xi_mean += y;
    xi_mean /= double(ens.n_paths);
    CHECK(pv.mean == doctest::Approx(-xi_mean).epsilon(1e-12));
}

TEST_CASE("principal value is consistent with the value coefficients") {
    MarketParams p;
    Setup s = make_setup(p);
    PathEnsemble ens = simulate_equilibrium(p, s.pol, s.agent, s.flow, cfg_paths(20000));
    MCEstimate pv = principal_value(ens, p);
    double predicted = s.coeffs.h0.front() + s.coeffs.h1.front() * p.m0 +
                       s.coeffs.h2.front() * p.v0 - s.pol.y0;
    CHECK(std::abs(pv.mean - predicted) <= 3.0 * pv.std_error + 0.01);
}

TEST_CASE("splitting f and g differently leaves the principal value unchanged") {
    // f enters the contract through H while g enters the cost; with
    // f - g = delta x fixed, the difference cancels path by path.
    MarketParams base;
    base.f_slope = 0.0;
    Setup s0 = make_setup(base);
    PathEnsemble e0 = simulate_equilibrium(base, s0.pol, s0.agent, s0.flow, cfg_paths(3000));
    double v0 = principal_value(e0, base).mean;
    for (double f1 : {base.delta, 1.0}) {
        MarketParams p = base;
        p.f_slope = f1;
        Setup s = make_setup(p);
        PathEnsemble e = simulate_equilibrium(p, s.pol, s.agent, s.flow, cfg_paths(3000));
        CHECK(principal_value(e, p).mean == doctest::Approx(v0).epsilon(1e-9));
    }
}

TEST_CASE("ic verification") {
    MarketParams p;
    Setup s = make_setup(p);
    SimConfig cfg = cfg_paths(10000);

    SUBCASE("null deviation passes with zero gap") {
        ICReport r = ic_verify(p, s.pol, s.agent, s.flow, cfg, {{0.0, 0.0}});
        REQUIRE(r.deviations.size() == 1);
        CHECK(r.deviations[0].paired_gap == 0.0);
        CHECK(r.deviations[0].pass);
        CHECK(r.all_pass);
    }
    SUBCASE("constant-shift deviations lose") {
        std::vector<std::pair<double, double>> grid = {
            {0.5, 0.0}, {-0.5, 0.0}, {0.0, 0.5}, {0.0, -0.5}, {0.25, 0.25}};
        ICReport r = ic_verify(p, s.pol, s.agent, s.flow, cfg, grid);
        CHECK(r.all_pass);
        // the big shifts are strict losses, well past the noise band
        CHECK(r.deviations[0].paired_gap < -3.0 * r.deviations[0].paired_std_error);
    }
}

TEST_CASE("corrupted exposure breaks the value envelope") {
    MarketParams p;
    Setup s = make_setup(p);
    // contract pays exposure z* + 0.3 but compensates drift at z*; the
    // agent best-responds to the corrupted exposure
    auto base_z = s.pol.z;
    s.pol.z_comp = base_z;
    s.pol.z = [base_z](double t) { return base_z(t) + 0.3; };
    AgentPolicy agent = equilibrium_agent_policy(s.pol, p);
    PathEnsemble ens = simulate_equilibrium(p, s.pol, agent, s.flow, cfg_paths(20000));
    MCEstimate av = agent_value(ens, p);
    double envelope = -std::exp(-p.gamma * s.pol.y0);
    CHECK(std::abs(av.mean - envelope) > 3.0 * av.std_error + 1e-12);
}

TEST_CASE("martingale diagnostic flags profitable drift deviations") {
    MarketParams p;
    Setup s = make_setup(p);
    SimConfig cfg = cfg_paths(20000);
    PathEnsemble eq = simulate_equilibrium(p, s.pol, s.agent, s.flow, cfg);
    MartingaleReport at_opt = martingale_check(eq, p);
    CHECK(at_opt.martingale);
    CHECK(at_opt.submartingale);

    AgentPolicy dev = s.agent;
    auto a0 = s.agent.a0;
    dev.a0 = [a0](double t) { return a0(t) + 0.5; };
    PathEnsemble shifted = simulate_deviation(p, s.pol, dev, s.flow, cfg);
    MartingaleReport under_dev = martingale_check(shifted, p);
    CHECK_FALSE(under_dev.martingale);
    bool some_positive = false;
    for (const auto& iv : under_dev.intervals)
        some_positive = some_positive || iv.increment > 3.0 * iv.std_error;
    CHECK(some_positive);
}
