#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfpa/model.hpp"
#include "mfpa/value_ode.hpp"
#include "oracles.hpp"

using namespace mfpa;

TEST_CASE("h1 closed form") {
    MarketParams p;
    CHECK(h1_closed(p.horizon, p) == doctest::Approx(1.0).epsilon(1e-15));

    MarketParams q = p;
    q.k1 = 0.0;  // removable singularity: h1 = beta + delta (T - t)
    CHECK(h1_closed(0.0, q) == doctest::Approx(1.2).epsilon(1e-14));
    q.k1 = 1e-13;  // below the threshold, same limit
    CHECK(h1_closed(0.0, q) == doctest::Approx(1.2).epsilon(1e-12));

    // frozen value at the canonical set: 1.4 e^{0.5} - 0.4
    CHECK(h1_closed(0.0, p) == doctest::Approx(1.9082097789801795).epsilon(1e-12));
}

TEST_CASE("h2 closed form") {
    MarketParams p;
    CHECK(h2_closed(p.horizon, p) == doctest::Approx(-0.25).epsilon(1e-14));

    MarketParams tiny = p;
    tiny.theta = 0.0;
    tiny.horizon = 1e-8;
    CHECK(std::abs(h2_closed(0.0, tiny)) < 1e-7);
}

TEST_CASE("closed forms agree with a backward RK4 oracle") {
    MarketParams p;
    oracle::CoeffTable tab = oracle::rk4_backward_coeffs(p, 10000);
    double worst0 = 0.0, worst1 = 0.0, worst2 = 0.0;
    for (std::size_t i = 0; i < tab.t.size(); i += 100) {
        double t = tab.t[i];
        worst1 = std::max(worst1, std::abs(h1_closed(t, p) - tab.h1[i]));
        worst2 = std::max(worst2, std::abs(h2_closed(t, p) - tab.h2[i]));
        worst0 = std::max(worst0, std::abs(h0_quadrature(t, p) - tab.h0[i]));
    }
    CHECK(worst1 <= 1e-6);
    CHECK(worst2 <= 1e-6);
    CHECK(worst0 <= 1e-6);
}

TEST_CASE("h0 quadrature against a trapezoid oracle") {
    MarketParams p;
    CHECK(h0_quadrature(p.horizon, p) == doctest::Approx(0.0).epsilon(1e-15));
    double ref = oracle::trapezoid_h0(
        p, 0.0, [&](double s) { return h1_closed(s, p); },
        [&](double s) { return h2_closed(s, p); }, 100000);
    CHECK(std::abs(h0_quadrature(0.0, p) - ref) <= 1e-8);
}

TEST_CASE("solve_coefficients invariants at the canonical set") {
    MarketParams p;
    ValueCoefficients c = solve_coefficients(p, 201);
    REQUIRE(c.grid.size() == 201);
    CHECK(c.grid.front() == 0.0);
    CHECK(c.grid.back() == p.horizon);
    // terminal pins are exact
    CHECK(c.h1.back() == p.beta);
    CHECK(c.h2.back() == -0.5 * p.theta);
    CHECK(c.h0.back() == 0.0);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        CHECK(c.h_rate[i] > 0.0);
        CHECK(c.h2[i] >= -0.5 * p.theta - 1e-12);
        double expected = tilt_constant(p) * std::exp(-p.gamma / (p.gamma + p.k2) -
                                                      p.k2 * c.h1[i] + p.k2 * c.h2[i]);
        CHECK(c.h_rate[i] == doctest::Approx(expected).epsilon(1e-12));
        // h2' < 0, so h2 strictly decreases toward its terminal value -theta/2
        if (i > 0) CHECK(c.h2[i] < c.h2[i - 1]);
    }
    CHECK_THROWS_AS(solve_coefficients(p, 1), InvalidParameter);
}

TEST_CASE("large theta keeps the horizon valid") {
    MarketParams p;
    p.theta = 50.0;
    p.horizon = 5.0;
    CHECK_NOTHROW(solve_coefficients(p, 101));
}

TEST_CASE("horizon validity failure is reported") {
    MarketParams p;
    p.beta = -2.0;
    p.horizon = 10.0;
    CHECK_THROWS_AS(h2_closed(0.0, p), HorizonTooLong);
    try {
        solve_coefficients(p, 51);
        FAIL("expected HorizonTooLong");
    } catch (const HorizonTooLong& e) {
        CHECK(e.earliest_invalid_time() >= 0.0);
        CHECK(e.earliest_invalid_time() < p.horizon);
    }
}

TEST_CASE("HJB residual") {
    MarketParams p;
    ValueCoefficients c = solve_coefficients(p, 201);
    std::vector<LawMoments> samples;
    for (double m : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (double v : {0.0, 0.25, 0.5, 1.0, 2.0}) samples.push_back({m, v});

    CHECK(hjb_residual(c, p, samples) <= 1e-6);
    // the m = v = 0 sample isolates the h0 equation
    CHECK(hjb_residual(c, p, {{0.0, 0.0}}) <= 1e-6);

    // corrupting h2 by +0.01 must blow the residual past 1e-3
    double corrupted = hjb_residual_curves(
        p, c.grid, [&](double t) { return c.h0_eval(t); },
        [&](double t) { return c.h1_eval(t); }, [&](double t) { return c.h2_eval(t) + 0.01; },
        samples);
    CHECK(corrupted > 1e-3);
}
