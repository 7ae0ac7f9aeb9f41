#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mfpa/errors.hpp"

namespace mfpa {

// First two moments of the state law at a fixed time.
struct LawMoments {
    double mean = 0.0;
    double var = 0.0;
};

// Two-dimensional consumer effort: alpha0 steers the drift, alpha1
// mitigates the accident intensity.
struct ControlPoint {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
};

// Scalar parameters of the demand-response model.
//
// The running rebate f and the producer cost g are affine in x with the
// same intercept; their difference is pinned to delta*x, so g is derived
// as g(t,x) = f0 + (f1 - delta)*x.  Defaults are the canonical
// desk-scale configuration used throughout the test suite.
struct MarketParams {
    double gamma = 1.0;        // consumer risk aversion, > 0
    double sigma = 0.5;        // diffusion volatility, > 0
    double k1 = 0.5;           // synergy coefficient
    double k2 = 1.0;           // accident-mitigation coefficient, > 0
    double delta = 0.2;        // slope of f - g
    double beta = 1.0;         // producer terminal reward slope
    double theta = 0.5;        // producer variance penalty, >= 0
    double horizon = 1.0;      // terminal time T, > 0
    double reservation = -1.0; // reservation utility R0, < 0
    double m0 = 0.0;           // initial mean of the state law
    double v0 = 0.0;           // initial variance, >= 0
    double f_slope = 0.2;      // f1 in f(t,x) = f0 + f1*x
    double f_intercept = 0.0;  // f0

    double f(double /*t*/, double x) const { return f_intercept + f_slope * x; }
    double g(double /*t*/, double x) const { return f_intercept + (f_slope - delta) * x; }
};

struct ParamIssue {
    std::string name;
    std::string reason;
};

inline std::vector<ParamIssue> validate_params(const MarketParams& p) {
    std::vector<ParamIssue> issues;
    auto require = [&](bool ok, const char* name, const char* reason) {
        if (!ok) issues.push_back({name, reason});
    };
    auto finite = [](double x) { return std::isfinite(x); };
    require(finite(p.gamma) && p.gamma > 0.0, "gamma", "must be > 0");
    require(finite(p.sigma) && p.sigma > 0.0, "sigma", "must be > 0");
    require(finite(p.k1), "k1", "must be finite");
    require(finite(p.k2) && p.k2 > 0.0, "k2", "must be > 0");
    require(finite(p.delta), "delta", "must be finite");
    require(finite(p.beta), "beta", "must be finite");
    require(finite(p.theta) && p.theta >= 0.0, "theta", "must be >= 0");
    require(finite(p.horizon) && p.horizon > 0.0, "horizon", "must be > 0");
    require(finite(p.reservation) && p.reservation < 0.0, "reservation",
            "must be < 0 so that -log(-R0)/gamma is defined");
    require(finite(p.m0), "m0", "must be finite");
    require(finite(p.v0) && p.v0 >= 0.0, "v0", "must be >= 0");
    require(finite(p.f_slope), "f_slope", "must be finite");
    require(finite(p.f_intercept), "f_intercept", "must be finite");
    return issues;
}

// Throws InvalidParameter for the first violated invariant.
inline void ensure_valid(const MarketParams& p) {
    auto issues = validate_params(p);
    if (!issues.empty()) throw InvalidParameter(issues.front().name, issues.front().reason);
}

// Model coefficients in the generic interface: drift b, volatility sigma,
// running cost c0, jump reward c1, intensity tilt K, and the finite mark
// measure lambda0 given by (marks, base_rates).
struct GenericModel {
    std::function<double(double t, double x, double mean, const ControlPoint&)> drift;
    std::function<double(double t, double x)> vol;
    std::function<double(double t, double x, const LawMoments&, const ControlPoint&)> run_cost;
    std::function<double(double t, double x, double mark, const LawMoments&, const ControlPoint&)>
        jump_reward;
    std::function<double(double t, double x, double mark, const LawMoments&, const ControlPoint&)>
        intensity_tilt;
    std::vector<double> marks;
    std::vector<double> base_rates;
};

// The explicit demand-response instance: drift alpha0 + k1*mean, constant
// volatility, quadratic effort cost less the rebate f, unit down-jumps
// whose intensity is e^{-k2*alpha1} times the law variance.
inline GenericModel example_model(const MarketParams& p) {
    ensure_valid(p);
    GenericModel m;
    m.drift = [p](double, double, double mean, const ControlPoint& a) {
        return a.alpha0 + p.k1 * mean;
    };
    m.vol = [p](double, double) { return p.sigma; };
    m.run_cost = [p](double t, double x, const LawMoments&, const ControlPoint& a) {
        return 0.5 * a.alpha0 * a.alpha0 - p.f(t, x);
    };
    m.jump_reward = [](double, double, double, const LawMoments&, const ControlPoint& a) {
        return a.alpha1;
    };
    m.intensity_tilt = [p](double, double, double, const LawMoments& law, const ControlPoint& a) {
        return std::exp(-p.k2 * a.alpha1) * law.var;
    };
    m.marks = {-1.0};
    m.base_rates = {1.0};
    return m;
}

}  // namespace mfpa
