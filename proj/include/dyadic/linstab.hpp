#pragma once

// Perturbation dynamics about the explicit steady states and the discrete
// eigenproblems of the linearized systems. The velocity channel obeys a
// three-term recursion whose constant-coefficient limit has characteristic
// roots lambda^{-theta/3} (decaying) and -2 lambda^{-theta/3} (dominant);
// an eigenvalue is admissible when the dominant-mode amplitude of the
// solution pinned by c_{-1} = 0, c_0 = 1 vanishes, leaving the
// lambda_j^{-theta/3} decay that lies in H^s for s < theta/3. The magnetic
// channel is a first-order product recursion solvable for every real rate.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dyadic/model.hpp"

namespace dyadic {

struct LinearizationBase {
    double A0 = 1.0, B0 = 0.0;
    double lambda = 2.0, theta = 1.0;
};

struct PerturbationState {
    std::vector<double> omega, zeta;
    double epsilon = 0.0;  // 0 selects the linearized system
};

// Perturbation equations about the steady profile (A0, B0) of the chosen
// system kind, truncated with omega_{-1} = zeta_{-1} = omega_{n+1} =
// zeta_{n+1} = 0. Returns (omega', zeta').
Derivative perturbation_rhs(const LinearizationBase& base, ModelKind kind,
                            const PerturbationState& state);

enum class EigenChannel { Velocity, Magnetic };
enum class EigenClass { DecayingHs, Growing, Degenerate, Inconclusive };

std::string to_string(EigenClass cls);

struct EigenProblem {
    EigenChannel channel = EigenChannel::Velocity;
    double value = 0.0;  // p (velocity) or q (magnetic)
    double lambda = 2.0, theta = 1.0;
    int a0_sign = 1;  // +1: linearization about A0 = +1; -1: about A0 = -1
    std::vector<double> coeffs;  // c_j or d_j, j = 0..n
    std::vector<double> alphas;  // alpha_j, j = 0..n-1
    EigenClass classification = EigenClass::Growing;
    // velocity: signed dominant-mode amplitude lim c_n (-2 lambda^{-theta/3})^{-n};
    // magnetic: lim d_j / lambda_j^{-theta/3}
    double dominant_amplitude = 0.0;
    double stabilization_delta = 0.0;  // late-tail variation of the amplitude
    double tail_ratio = 0.0;           // c_n / c_{n-1} (or d_n / d_{n-1})
    double root_decay = 0.0;           // lambda^{-theta/3}
    double root_dominant = 0.0;        // -2 lambda^{-theta/3}
    double s_max = 0.0;                // theta/3 when classification is DecayingHs
    int degenerate_index = -1;         // first shell with alpha_j = 0, magnetic channel
    bool time_unstable = false;        // magnetic channel: q > 0
};

// Three-term recursion c_{j+1} = -(a0_sign * p lambda_j^{-2theta/3} +
// lambda^{-theta/3}) c_j + 2 lambda^{-2theta/3} c_{j-1}, c_{-1} = 0, c_0 = 1.
EigenProblem velocity_eigenvector(double p, double lambda, double theta, int n, int a0_sign = 1);

// Product recursion d_{j+1} = alpha_j d_j with alpha_j = a0_sign * q
// lambda_j^{-2theta/3} + lambda^{-theta/3}, d_0 = 1.
EigenProblem magnetic_eigenvector(double q, double lambda, double theta, int n, int a0_sign = 1);

// First-order product ansatz c_j = lambda^{-theta/3} *
// prod_{i=1}^{j-1} (p lambda_i^{-2theta/3} + lambda^{-theta/3}), sometimes
// quoted for this problem; kept for comparison against the three-term
// recursion, which it does not satisfy.
std::vector<double> velocity_product_sequence(double p, double lambda, double theta, int n,
                                              int a0_sign = 1);

struct CfResult {
    double value = 0.0;
    double delta = 0.0;               // |value(depth) - value(depth-1)|
    int zero_denominator_level = -1;  // first level with a vanishing denominator
};

// Truncated continued fraction 1 / (A alpha_1 + A / (A alpha_2 + ...)) with a
// zero tail below `depth`. alpha[i] supplies alpha_{i+1}.
CfResult continued_fraction(std::span<const double> alpha, double A, int depth);
CfResult continued_fraction(const std::function<double(int)>& alpha, double A, int depth);

// Fixed point of the constant-alpha continued fraction:
// 2 / (A alpha + sqrt(A^2 alpha^2 + 4 A)).
double cf_constant_closed_form(double alpha, double A);

struct ScanRow {
    double value = 0.0;
    double growth = 0.0;  // velocity: |dominant amplitude|; magnetic: profile limit
    bool admissible = false;
    EigenClass classification = EigenClass::Growing;
    bool time_unstable = false;
};

struct ScanReport {
    EigenChannel channel = EigenChannel::Velocity;
    int a0_sign = 1;
    std::vector<ScanRow> rows;
    std::vector<double> admissible_values;  // bisection-refined roots (velocity)
    bool any_in_forbidden_halfline = false;  // p >= 0 for A0 = +1, p <= 0 for A0 = -1
    bool inconclusive = false;               // dominant amplitude failed to stabilize
    double requested_s = 0.0;
};

// Velocity channel: locates admissible eigenvalues as sign changes of the
// signed dominant-mode amplitude over the grid, refined by bisection.
// Magnetic channel: every grid value is admissible; rows carry the profile
// limit and the time-growth sign.
ScanReport eigen_scan(EigenChannel channel, double lo, double hi, double step, double lambda,
                      double theta, double s, int n, int a0_sign = 1);

}  // namespace dyadic
