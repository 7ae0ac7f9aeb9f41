#pragma once

#include <cmath>
#include <functional>

namespace mfpa {

namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double rel_tol, double abs_floor, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double err = left + right - whole;
    double tol = rel_tol * std::abs(left + right);
    if (tol < abs_floor) tol = abs_floor;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) {
        return left + right + err / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, rel_tol, abs_floor, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, rel_tol, abs_floor, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature. Relative tolerance with an absolute floor,
// suitable for the smooth positive integrands of this model.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                 double abs_floor = 1e-14) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol, abs_floor, 48);
}

}  // namespace mfpa
