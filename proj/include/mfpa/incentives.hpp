#pragma once

#include <cmath>
#include <functional>

#include "mfpa/hamiltonian.hpp"
#include "mfpa/model.hpp"
#include "mfpa/value_ode.hpp"

namespace mfpa {

// Certainty equivalent of the reservation utility: -log(-R0)/gamma.
inline double reservation_level(const MarketParams& p) {
    if (!(p.reservation < 0.0))
        throw InvalidParameter("reservation", "must be < 0");
    return -std::log(-p.reservation) / p.gamma;
}

// Deterministic contract parameters (Y0, Z, U). In the explicit model the
// optimal exposures depend on time only.
//
// z_comp is the exposure used in the drift compensation -H(z,...) of the
// contract dynamics; it equals z unless deliberately decoupled to study
// mis-specified contracts.
struct IncentivePolicy {
    double y0 = 0.0;
    std::function<double(double t)> z;
    std::function<double(double t, double mark)> u;
    std::function<double(double t)> z_comp;

    double z_for_compensation(double t) const { return z_comp ? z_comp(t) : z(t); }
};

// Induced consumer efforts per unit time.
struct AgentPolicy {
    std::function<double(double t)> a0;
    std::function<double(double t)> a1;
};

// Z*(t) = h1(t)/(1+gamma sigma^2),
// U*(t,-1) = 1/(gamma+k2) - h1(t) + h2(t) - 1/k2,
// Y0 = certainty equivalent of R0 (the reservation constraint binds).
inline IncentivePolicy optimal_policy(const ValueCoefficients& coeffs, const MarketParams& p) {
    IncentivePolicy pol;
    pol.y0 = reservation_level(p);
    double denom = 1.0 + p.gamma * p.sigma * p.sigma;
    pol.z = [coeffs, denom](double t) { return coeffs.h1_eval(t) / denom; };
    pol.u = [coeffs, p](double t, double /*mark*/) {
        return 1.0 / (p.gamma + p.k2) - coeffs.h1_eval(t) + coeffs.h2_eval(t) - 1.0 / p.k2;
    };
    return pol;
}

// Best response to the optimal policy: a0 = Z*, and
// a1(t) = (1/gamma) log(1+gamma/k2) - 1/(gamma+k2) + h1(t) - h2(t) + 1/k2.
inline AgentPolicy equilibrium_agent_policy(const IncentivePolicy& pol, const MarketParams& p) {
    AgentPolicy agent;
    agent.a0 = pol.z;
    auto u = pol.u;
    double log_term = std::log1p(p.gamma / p.k2) / p.gamma;
    agent.a1 = [u, log_term](double t) { return log_term - u(t, -1.0); };
    return agent;
}

}  // namespace mfpa
