#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace raman::detail {

struct Dopri5Stats {
    int accepted = 0;
    int rejected = 0;
};

// Dormand-Prince 5(4) with PI-free step control. State is any Eigen dense type;
// rhs(t, y, dydt) writes the derivative into dydt.
template <class State, class Rhs>
Dopri5Stats dopri5(Rhs&& rhs, State& y, double t0, double t1, double h0, double rtol, double atol,
                   int max_steps = 2000000) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    Dopri5Stats st;
    if (t1 <= t0) return st;
    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, ynew = y;
    double t = t0;
    double h = std::min(h0, t1 - t0);
    rhs(t, y, k1);
    for (int n = 0; n < max_steps && t < t1; ++n) {
        h = std::min(h, t1 - t);
        tmp = y + h * a21 * k1;
        rhs(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, tmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);
        tmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale = atol + rtol * std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
        const double err = tmp.cwiseAbs().maxCoeff() / scale;
        if (err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;
            ++st.accepted;
        } else {
            ++st.rejected;
        }
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= fac;
        if (h < 1e-14 * (t1 - t0)) throw std::runtime_error("dopri5: step size underflow");
    }
    if (t < t1) throw std::runtime_error("dopri5: step budget exhausted");
    return st;
}

}  // namespace raman::detail
