#pragma once

// Explicit steady-state families of the forced systems and their numerical
// cross-checks. With forcing f = (f0, 0, ...), the stationary profiles are
//   a_j = A0 lambda^{theta/6} f0^{1/2} lambda_j^{-theta/3},
//   b_j = B0 lambda^{theta/6} f0^{1/2} lambda_j^{-theta/3},
// with A0^2 + B0^2 = 1 (uni-directional cascade), A0^2 - B0^2 = 1
// (bi-directional cascade) or B0 = 0, A0 = +/-1 (Euler). These satisfy the
// truncated system exactly on interior shells; the boundary shell carries a
// truncation defect which is reported, never hidden.

#include <vector>

#include "dyadic/model.hpp"

namespace dyadic {

struct FixedPoint {
    ModelKind kind = ModelKind::Euler;
    double A0 = 1.0, B0 = 0.0;
    double f0 = 1.0;
    double lambda = 2.0, theta = 1.0;
    std::vector<double> a_bar, b_bar;
};

// Parameterization: MhdForward -> (A0, B0) = (cos param, sin param);
// MhdBidirectional -> (branch_sign * cosh param, sinh param);
// Euler -> A0 = sign of param (param >= 0 gives +1), B0 = 0.
FixedPoint fixed_point(ModelKind kind, double lambda, double theta, double f0, double param,
                       int n_shells, int branch_sign = 1);

ShellState fixed_point_state(const FixedPoint& fp);
// Model spec carrying the matching forcing (f0, 0, ...).
ModelSpec fixed_point_spec(const FixedPoint& fp, int n_shells);

struct ResidualReport {
    std::vector<double> da, db;       // rhs at the candidate, shell by shell
    double max_interior_abs = 0.0;    // max |residual| over shells j <= k-1
    double boundary_defect_a = 0.0;   // rhs at the boundary shell k
    double boundary_defect_b = 0.0;
};

ResidualReport residual(const ModelSpec& spec, const ShellState& candidate);

struct ShellRatios {
    std::vector<double> a_ratios, b_ratios;  // rescaled-sequence ratios, j = 0..k-1
    std::vector<int> undefined_a, undefined_b;  // shells with a zero rescaled entry
};

// Ratios of the rescaled sequences lambda_j^{theta/3} a_j (and b_j); every
// ratio equals 1 for an admissible bounded fixed point.
ShellRatios shell_ratios(const ModelSpec& spec, const ShellState& candidate);
ShellRatios shell_ratios(const FixedPoint& fp);

struct NewtonOptions {
    double tol = 1e-12;     // on the Euclidean norm of the interior residual
    int max_iter = 60;
    bool fd_jacobian = false;  // verification mode: forward-difference Jacobian
};

struct NewtonResult {
    ShellState state;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;    // interior residual at the returned state
    double condition_estimate = 0.0;
};

// Damped Gauss-Newton (minimum-norm steps) on the interior stationarity
// system da_j = 0 (j <= k-1) and db_j = 0 (j <= k-1, MHD kinds), closed by
// the flat-profile boundary rows lambda^{theta/3} a_k = a_{k-1} (same for b).
// The full truncated system admits no exact equilibrium for the
// forward-cascade kinds (the boundary equation da_k = lambda_{k-1}^theta
// (a_{k-1}^2 + b_{k-1}^2) + f_k forces a zero cascade), so the boundary
// equation is excluded and the defect there is reported via residual().
// residual_norm covers the interior rows only.
NewtonResult newton_steady(const ModelSpec& spec, const ShellState& guess,
                           const NewtonOptions& opts = {});

}  // namespace dyadic
