#pragma once

// Dyadic shell systems: the forced Euler cascade model and the two ideal-MHD
// variants (uni-directional and bi-directional energy cascade), truncated to
// shells 0..k with the nearest-neighbor boundary convention a_{-1} = b_{-1} =
// a_{k+1} = b_{k+1} = 0.

#include <span>
#include <string>
#include <vector>

namespace dyadic {

enum class ModelKind { Euler, MhdForward, MhdBidirectional };

std::string to_string(ModelKind kind);

// Intermittency-dimension parameterization theta = (5 - delta) / 2.
double theta_from_delta(double delta);

struct ModelSpec {
    ModelKind kind = ModelKind::Euler;
    double lambda = 2.0;  // shell spacing; lambda_j = lambda^j, lambda_0 = 1
    double theta = 1.0;   // nonlinearity exponent
    int n_shells = 1;     // truncation index k; shells 0..k
    std::vector<double> forcing;           // f_j, length k+1
    std::vector<double> lambda_pow_theta;  // cached lambda_j^theta

    int shell_count() const { return n_shells + 1; }
    bool has_magnetic() const { return kind != ModelKind::Euler; }
    // lambda_j^exponent for shell j
    double lambda_pow(double exponent, int j) const;
    // flat vector length used by the time integrator:
    // [a_0..a_k] for Euler, [a_0..a_k, b_0..b_k] otherwise
    int packed_size() const { return has_magnetic() ? 2 * shell_count() : shell_count(); }
};

// Validates lambda > 1, theta > 0, n_shells >= 1 and finite forcing; the
// forcing sequence may be shorter than k+1 and is zero-padded.
ModelSpec make_model(ModelKind kind, double lambda, double theta, int n_shells,
                     std::vector<double> forcing = {});
// Same, but theta derived from the intermittency dimension delta in [0, 3].
ModelSpec make_model_from_delta(ModelKind kind, double lambda, double delta, int n_shells,
                                std::vector<double> forcing = {});

struct ShellState {
    std::vector<double> a;  // velocity shell coefficients
    std::vector<double> b;  // magnetic shell coefficients (all zero for Euler)
    double t = 0.0;
};

// Builds a state matching the model dimensions; b may be omitted (zeros),
// and must be all-zero for the Euler kind.
ShellState make_state(const ModelSpec& spec, std::vector<double> a,
                      std::vector<double> b = {}, double t = 0.0);

bool state_finite(const ShellState& state);

struct Derivative {
    std::vector<double> da;
    std::vector<double> db;
};

// Right-hand side of the truncated system at the given state.
Derivative rhs(const ModelSpec& spec, const ShellState& state);

// Allocation-free right-hand side on the packed layout (used by the stepper).
void rhs_packed(const ModelSpec& spec, std::span<const double> y, std::span<double> dy);

void pack_state(const ModelSpec& spec, const ShellState& state, std::span<double> y);
ShellState unpack_state(const ModelSpec& spec, std::span<const double> y, double t);

enum class FluxVariant { Forward, Signed };

struct FluxProfile {
    std::vector<double> values;  // Pi_j (or signed Pi~_j), j = 0..k-1
    FluxVariant variant = FluxVariant::Forward;
};

// Energy flux past each shell: lambda_j^theta (a_j^2 + b_j^2) a_{j+1} for the
// forward-cascade kinds, lambda_j^theta (a_j^2 - b_j^2) a_{j+1} for the
// bi-directional kind.
FluxProfile flux(const ModelSpec& spec, const ShellState& state);

struct RescaledState {
    std::vector<double> a;
    std::vector<double> b;
    bool overflow = false;  // some entry overflowed to +/-inf
};

// (lambda_j^exponent a_j, lambda_j^exponent b_j)
RescaledState rescale(const ModelSpec& spec, const ShellState& state, double exponent);

}  // namespace dyadic
