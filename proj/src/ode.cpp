#include "dyadic/ode.hpp"

#include <cmath>

namespace dyadic {

void RkWorkspace::resize(size_t n) {
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    k4.resize(n);
    k5.resize(n);
    k6.resize(n);
    k7.resize(n);
    ytmp.resize(n);
}

bool all_finite(std::span<const double> y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

double euclidean_norm(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

void rk4_step(const OdeRhs& f, double t, double dt, std::span<const double> y,
              std::span<double> y_out, RkWorkspace& ws) {
    const size_t n = y.size();
    ws.resize(n);
    f(t, y, ws.k1);
    for (size_t i = 0; i < n; ++i) ws.ytmp[i] = y[i] + 0.5 * dt * ws.k1[i];
    f(t + 0.5 * dt, ws.ytmp, ws.k2);
    for (size_t i = 0; i < n; ++i) ws.ytmp[i] = y[i] + 0.5 * dt * ws.k2[i];
    f(t + 0.5 * dt, ws.ytmp, ws.k3);
    for (size_t i = 0; i < n; ++i) ws.ytmp[i] = y[i] + dt * ws.k3[i];
    f(t + dt, ws.ytmp, ws.k4);
    for (size_t i = 0; i < n; ++i)
        y_out[i] = y[i] + dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

namespace {

// Dormand-Prince 5(4) tableau (Hairer, Norsett & Wanner, DOPRI5).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
// 5th-order weights (also the a7* row; stage 7 is evaluated at the new point).
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between 5th- and 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

double dopri5_step(const OdeRhs& f, double t, double dt, std::span<const double> y,
                   std::span<double> y_out, RkWorkspace& ws) {
    const size_t n = y.size();
    ws.resize(n);
    f(t, y, ws.k1);
    for (size_t i = 0; i < n; ++i) ws.ytmp[i] = y[i] + dt * a21 * ws.k1[i];
    f(t + c2 * dt, ws.ytmp, ws.k2);
    for (size_t i = 0; i < n; ++i) ws.ytmp[i] = y[i] + dt * (a31 * ws.k1[i] + a32 * ws.k2[i]);
    f(t + c3 * dt, ws.ytmp, ws.k3);
    for (size_t i = 0; i < n; ++i)
        ws.ytmp[i] = y[i] + dt * (a41 * ws.k1[i] + a42 * ws.k2[i] + a43 * ws.k3[i]);
    f(t + c4 * dt, ws.ytmp, ws.k4);
    for (size_t i = 0; i < n; ++i)
        ws.ytmp[i] =
            y[i] + dt * (a51 * ws.k1[i] + a52 * ws.k2[i] + a53 * ws.k3[i] + a54 * ws.k4[i]);
    f(t + c5 * dt, ws.ytmp, ws.k5);
    for (size_t i = 0; i < n; ++i)
        ws.ytmp[i] = y[i] + dt * (a61 * ws.k1[i] + a62 * ws.k2[i] + a63 * ws.k3[i] +
                                  a64 * ws.k4[i] + a65 * ws.k5[i]);
    f(t + dt, ws.ytmp, ws.k6);
    for (size_t i = 0; i < n; ++i)
        y_out[i] = y[i] + dt * (b1 * ws.k1[i] + b3 * ws.k3[i] + b4 * ws.k4[i] + b5 * ws.k5[i] +
                                b6 * ws.k6[i]);
    f(t + dt, y_out, ws.k7);
    double err2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double e = dt * (e1 * ws.k1[i] + e3 * ws.k3[i] + e4 * ws.k4[i] + e5 * ws.k5[i] +
                               e6 * ws.k6[i] + e7 * ws.k7[i]);
        err2 += e * e;
    }
    return std::sqrt(err2);
}

}  // namespace dyadic
