#pragma once

// Scalar functionals of shell states: energy, cross helicity, Sobolev norms,
// the weak distance, the weighted Lyapunov pair (phi, psi) of the rescaled
// variables w_j = lambda_j^theta a_j, z_j = lambda_j^theta b_j, the Riccati
// coefficient and blow-up time bound, and trajectory monitors.

#include <optional>
#include <span>
#include <vector>

#include "dyadic/integrator.hpp"
#include "dyadic/model.hpp"

namespace dyadic {

// E = 1/2 sum_j (a_j^2 + b_j^2)
double energy(const ShellState& state);

// H^c = sum_j a_j b_j
double cross_helicity(const ShellState& state);

// ||u||_s = sqrt(sum_j lambda_j^{2s} u_j^2), shells indexed from 0
double sobolev_norm(std::span<const double> u, double s, double lambda);

// sum_n lambda^{-n^2} |u_n - v_n| / (1 + |u_n - v_n|); sequences zero-padded
double weak_distance(std::span<const double> u, std::span<const double> v, double lambda);

struct LyapunovParams {
    double s = 0.5;    // Sobolev index the bound certifies
    double gamma = 1;  // weight exponent
    double c0 = 0.1;   // mixing constant in (0, 1)
};

// Parameter window of the blow-up argument:
//   2 theta - gamma <= 2 s   and   lambda^{theta-gamma} - (1+2c0) lambda^{gamma/2-theta} > 0
bool lyapunov_params_valid(const LyapunovParams& p, double lambda, double theta);

// K = (1 - lambda^{-gamma}) / (2 c0^2) * (lambda^{theta-gamma} - (1+2c0) lambda^{gamma/2-theta})
double riccati_coefficient(const LyapunovParams& p, double lambda, double theta);

struct LyapunovReport {
    double phi = 0.0;  // sum lambda_j^{-gamma} (w_j^2 + z_j^2)
    double psi = 0.0;  // sum lambda_j^{-gamma} (w_j + c0 z_j)
    double K = 0.0;
    bool valid = false;
    std::optional<double> t_upper;  // blow-up time bound, when applicable
};

LyapunovReport lyapunov(const ShellState& state, const ModelSpec& spec, const LyapunovParams& p);

// psi^2 <= 2 max(1, c0^2) / (1 - lambda^{-gamma}) * phi, checked with 1e-12
// relative slack. The constant differs from the raw Cauchy-Schwarz chain,
// which under-weights the velocity sum when c0 < 1 (see README).
bool psi_squared_bound_check(const ShellState& state, const ModelSpec& spec,
                             const LyapunovParams& p);

// t_upper = integral from psi0 to infinity of d psi / (K psi^2 + f0).
// Requires K > 0 and f0 > 0, or f0 = 0 with psi0 > 0.
double riccati_blowup_bound(double psi0, double K, double f0);

struct MonitorOptions {
    double monotone_rel_tol = 1e-12;
};

struct MonitorReport {
    std::vector<double> min_a;  // per sample
    std::vector<double> min_b;
    std::optional<double> first_positivity_loss;  // earliest sample with a non-positive shell
    std::vector<bool> rescaled_monotone;  // lambda_j^{theta/3} a_j non-increasing in j
};

MonitorReport monitors(const Trajectory& traj, const ModelSpec& spec,
                       const MonitorOptions& opts = {});

// Sampled check of the Riccati differential inequality along a trajectory:
//   d psi/dt + boundary_flux + slack >= K psi^2 + forcing_term       (K form)
//   d psi/dt + boundary_flux + slack >= C_pos phi + forcing_term     (phi form)
// where boundary_flux = lambda^{theta-gamma} lambda_k^{-gamma} (w_k^2 + z_k^2)
// is the positive term the truncation drops, C_pos = lambda^{theta-gamma} -
// (1+2c0) lambda^{gamma/2-theta}, and d psi/dt is a centered difference on
// uniform sample triples. The K form is restricted to samples whose
// neighborhood has all shells strictly positive; the phi form holds for any
// signs and is checked everywhere.
struct RiccatiCheck {
    int checked_riccati = 0;  // K-form sample count (positive segments)
    int violations_riccati = 0;
    int checked_flux = 0;  // phi-form sample count
    int violations_flux = 0;
    double max_shortfall = 0.0;  // worst K-form deficit observed
    double K = 0.0;
    double forcing_term = 0.0;  // sum_j lambda_j^{theta-gamma} f_j
    bool params_valid = false;
};

RiccatiCheck riccati_check(const Trajectory& traj, const ModelSpec& spec,
                           const LyapunovParams& p);

}  // namespace dyadic
