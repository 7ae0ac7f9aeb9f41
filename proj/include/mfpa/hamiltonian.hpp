#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mfpa/errors.hpp"
#include "mfpa/model.hpp"

namespace mfpa {

// Contract exposures at one instant: z is the sensitivity to the
// continuous part of X, u the sensitivity per jump mark (aligned with
// GenericModel::marks).
struct IncentiveSlice {
    double z = 0.0;
    std::vector<double> u;  // one entry per mark
};

// The pointwise payoff rate of the agent:
//   sum_marks (1/gamma)(1 - e^{-gamma(u + c1)}) K lambda0  + b z
//   - (gamma/2) sigma^2 z^2 - c0.
inline double h_integrand(double t, double x, const IncentiveSlice& s, const LawMoments& law,
                          const ControlPoint& a, const GenericModel& model, double gamma) {
    double jump = 0.0;
    for (std::size_t i = 0; i < model.marks.size(); ++i) {
        double mark = model.marks[i];
        double c1 = model.jump_reward(t, x, mark, law, a);
        double tilt = model.intensity_tilt(t, x, mark, law, a);
        jump += (1.0 - std::exp(-gamma * (s.u[i] + c1))) / gamma * tilt * model.base_rates[i];
    }
    double b = model.drift(t, x, law.mean, a);
    double vol = model.vol(t, x);
    double c0 = model.run_cost(t, x, law, a);
    double value = jump + b * s.z - 0.5 * gamma * vol * vol * s.z * s.z - c0;
    if (!std::isfinite(value)) throw NonFiniteValue("h integrand is not finite");
    return value;
}

// Closed-form maximizer of h for the explicit model:
//   alpha0* = z,  alpha1* = (1/gamma) log(1 + gamma/k2) - u(-1).
inline ControlPoint best_response_closed(const IncentiveSlice& s, const MarketParams& p) {
    double u_minus1 = s.u.empty() ? 0.0 : s.u.front();
    return {s.z, std::log1p(p.gamma / p.k2) / p.gamma - u_minus1};
}

// Axis grids for the exhaustive product-grid argmax.
struct ControlGrid {
    std::vector<double> alpha0;
    std::vector<double> alpha1;

    static ControlGrid centered(const ControlPoint& center, double half_width, std::size_t n_axis) {
        ControlGrid g;
        g.alpha0.reserve(n_axis);
        g.alpha1.reserve(n_axis);
        double step = n_axis > 1 ? 2.0 * half_width / double(n_axis - 1) : 0.0;
        for (std::size_t i = 0; i < n_axis; ++i) {
            g.alpha0.push_back(center.alpha0 - half_width + step * double(i));
            g.alpha1.push_back(center.alpha1 - half_width + step * double(i));
        }
        return g;
    }
};

// Exhaustive argmax of h over the product grid; ties resolve to the
// lexicographically smallest (alpha0, alpha1).
inline ControlPoint best_response_grid(double t, double x, const IncentiveSlice& s,
                                       const LawMoments& law, const GenericModel& model,
                                       double gamma, const ControlGrid& grid) {
    if (grid.alpha0.empty() || grid.alpha1.empty()) throw EmptyGrid();
    ControlPoint best;
    double best_value = -std::numeric_limits<double>::infinity();
    for (double a0 : grid.alpha0) {
        for (double a1 : grid.alpha1) {
            ControlPoint a{a0, a1};
            double value = h_integrand(t, x, s, law, a, model, gamma);
            if (value > best_value) {
                best_value = value;
                best = a;
            }
        }
    }
    return best;
}

// Coarse-to-fine argmax: repeated product-grid searches, each stage
// zooming onto the previous winner. Reaches step <= target_step without
// an infeasibly large single grid. Intended for unimodal h.
inline ControlPoint best_response_refined(double t, double x, const IncentiveSlice& s,
                                          const LawMoments& law, const GenericModel& model,
                                          double gamma, ControlPoint center, double half_width,
                                          std::size_t n_axis, double target_step) {
    if (n_axis < 3) throw EmptyGrid();
    ControlPoint best = center;
    double hw = half_width;
    double step = 2.0 * hw / double(n_axis - 1);
    while (true) {
        best = best_response_grid(t, x, s, law, model, gamma,
                                  ControlGrid::centered(best, hw, n_axis));
        if (step <= target_step) break;
        hw = 1.5 * step;  // overlap neighbouring cells when zooming
        step = 2.0 * hw / double(n_axis - 1);
    }
    return best;
}

// The maximized Hamiltonian H = sup_alpha h for the explicit model,
// including the rebate f (H - g equals the delta*x form):
//   H = f(t,x) + (1 - gamma sigma^2) z^2 / 2 + z k1 mean
//       + (1/(gamma+k2)) ((gamma+k2)/k2)^{-k2/gamma} e^{k2 u(-1)} var.
inline double H_sup(double t, double x, const IncentiveSlice& s, const LawMoments& law,
                    const MarketParams& p) {
    double u_minus1 = s.u.empty() ? 0.0 : s.u.front();
    double tilt_const = std::pow((p.gamma + p.k2) / p.k2, -p.k2 / p.gamma);
    double jump = tilt_const * std::exp(p.k2 * u_minus1) * law.var / (p.gamma + p.k2);
    return p.f(t, x) + 0.5 * (1.0 - p.gamma * p.sigma * p.sigma) * s.z * s.z +
           s.z * p.k1 * law.mean + jump;
}

}  // namespace mfpa
