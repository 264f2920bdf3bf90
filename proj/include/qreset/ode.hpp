#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "qreset/errors.hpp"

namespace qreset {

struct OdeOptions {
    double tol = 1e-8;          // local error tolerance per step (abs and rel)
    double first_step = 0.0;    // 0 -> automatic
    std::uint64_t max_steps = 50'000'000;
};

struct OdeStats {
    std::uint64_t steps = 0;
    std::uint64_t rejected = 0;
};

/// Dormand-Prince 5(4) embedded pair with FSAL and PI-free step control.
/// Integrates y' = rhs(t, y) in place from t0 to t1. State must support
/// Eigen-style arithmetic (VectorXcd / MatrixXcd both work).
template <class State, class Rhs>
OdeStats integrate_adaptive(Rhs&& rhs, State& y, double t0, double t1,
                            const OdeOptions& opt = {}) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // difference between the 5th and the embedded 4th order weights
    static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                            e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                            e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    OdeStats stats;
    if (t1 <= t0) return stats;

    const double span = t1 - t0;
    double t = t0;
    double h = opt.first_step > 0 ? opt.first_step : span / 100.0;
    h = std::min(h, span);

    State k1 = rhs(t, y);
    State k2, k3, k4, k5, k6, k7, ytmp, y5;

    while (t < t1) {
        if (stats.steps + stats.rejected > opt.max_steps)
            throw IntegrationFailure("integrate_adaptive: step budget exhausted at t = " +
                                     std::to_string(t));
        h = std::min(h, t1 - t);
        if (!(t + h > t))
            throw IntegrationFailure("integrate_adaptive: step size underflow at t = " +
                                     std::to_string(t));

        ytmp = y + h * (a21 * k1);
        k2 = rhs(t + c2 * h, ytmp);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        k3 = rhs(t + c3 * h, ytmp);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = rhs(t + c4 * h, ytmp);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = rhs(t + c5 * h, ytmp);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = rhs(t + h, ytmp);
        y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = rhs(t + h, y5);

        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double ymag = std::max(y.cwiseAbs().maxCoeff(), y5.cwiseAbs().maxCoeff());
        const double scale = opt.tol * std::max(1.0, ymag);
        const double errnorm = err.cwiseAbs().maxCoeff() / scale;

        if (errnorm <= 1.0) {
            t += h;
            y.swap(y5);
            k1.swap(k7);  // FSAL
            ++stats.steps;
            const double grow = errnorm > 0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            ++stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
        }
    }
    return stats;
}

}  // namespace qreset
