#pragma once

// Explicit Runge-Kutta kernels on flat coefficient vectors: the classical
// 4-stage scheme and the Dormand-Prince 5(4) embedded pair. The embedded pair
// propagates the 5th-order solution and reports the Euclidean norm of the
// 4th/5th difference as the local error estimate.

#include <functional>
#include <span>
#include <vector>

namespace dyadic {

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct RkWorkspace {
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, ytmp;
    void resize(size_t n);
};

void rk4_step(const OdeRhs& f, double t, double dt, std::span<const double> y,
              std::span<double> y_out, RkWorkspace& ws);

// Returns the embedded error-estimate norm; y_out receives the 5th-order
// solution. y_out must not alias y.
double dopri5_step(const OdeRhs& f, double t, double dt, std::span<const double> y,
                   std::span<double> y_out, RkWorkspace& ws);

bool all_finite(std::span<const double> y);
double euclidean_norm(std::span<const double> y);

}  // namespace dyadic
