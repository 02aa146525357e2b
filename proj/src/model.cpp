#include "dyadic/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dyadic {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Euler: return "euler";
        case ModelKind::MhdForward: return "mhd_forward";
        case ModelKind::MhdBidirectional: return "mhd_bidirectional";
    }
    return "unknown";
}

double theta_from_delta(double delta) {
    if (!(delta >= 0.0 && delta <= 3.0))
        throw std::invalid_argument("intermittency dimension delta must lie in [0, 3], got " +
                                    std::to_string(delta));
    return 0.5 * (5.0 - delta);
}

double ModelSpec::lambda_pow(double exponent, int j) const {
    return std::pow(lambda, exponent * static_cast<double>(j));
}

ModelSpec make_model(ModelKind kind, double lambda, double theta, int n_shells,
                     std::vector<double> forcing) {
    if (!(lambda > 1.0))
        throw std::invalid_argument("shell spacing lambda must satisfy lambda > 1, got " +
                                    std::to_string(lambda));
    if (!(theta > 0.0))
        throw std::invalid_argument("exponent theta must satisfy theta > 0, got " +
                                    std::to_string(theta));
    if (n_shells < 0)
        throw std::invalid_argument("n_shells must be >= 0, got " + std::to_string(n_shells));
    const int count = n_shells + 1;
    if (static_cast<int>(forcing.size()) > count)
        throw std::invalid_argument("forcing sequence longer than n_shells + 1");
    for (double f : forcing)
        if (!std::isfinite(f)) throw std::invalid_argument("forcing entries must be finite");
    forcing.resize(count, 0.0);

    ModelSpec spec;
    spec.kind = kind;
    spec.lambda = lambda;
    spec.theta = theta;
    spec.n_shells = n_shells;
    spec.forcing = std::move(forcing);
    spec.lambda_pow_theta.resize(count);
    double lam_j = 1.0;  // lambda_0 = 1
    const double lam_theta = std::pow(lambda, theta);
    for (int j = 0; j < count; ++j) {
        spec.lambda_pow_theta[j] = lam_j;
        lam_j *= lam_theta;
    }
    return spec;
}

ModelSpec make_model_from_delta(ModelKind kind, double lambda, double delta, int n_shells,
                                std::vector<double> forcing) {
    return make_model(kind, lambda, theta_from_delta(delta), n_shells, std::move(forcing));
}

ShellState make_state(const ModelSpec& spec, std::vector<double> a, std::vector<double> b,
                      double t) {
    const size_t count = static_cast<size_t>(spec.shell_count());
    if (a.size() != count)
        throw std::invalid_argument("state a has length " + std::to_string(a.size()) +
                                    ", expected " + std::to_string(count));
    if (b.empty()) b.assign(count, 0.0);
    if (b.size() != count)
        throw std::invalid_argument("state b has length " + std::to_string(b.size()) +
                                    ", expected " + std::to_string(count));
    if (!spec.has_magnetic())
        for (double v : b)
            if (v != 0.0)
                throw std::invalid_argument("Euler states must have b identically zero");
    ShellState state{std::move(a), std::move(b), t};
    if (!state_finite(state)) throw std::invalid_argument("state entries must be finite");
    return state;
}

bool state_finite(const ShellState& state) {
    for (double v : state.a)
        if (!std::isfinite(v)) return false;
    for (double v : state.b)
        if (!std::isfinite(v)) return false;
    return std::isfinite(state.t);
}

namespace {

// Core kernel shared by all three kinds. The a-terms are computed identically
// for every kind so that an MHD evaluation with b == 0 reproduces the Euler
// evaluation bit for bit.
inline void rhs_kernel(const ModelSpec& spec, const double* a, const double* b, double* da,
                       double* db) {
    const int k = spec.n_shells;
    const double* lt = spec.lambda_pow_theta.data();
    const double* f = spec.forcing.data();
    const bool magnetic = spec.has_magnetic();
    const double bsign = (spec.kind == ModelKind::MhdBidirectional) ? -1.0 : 1.0;

    for (int j = 0; j <= k; ++j) {
        const double am1 = (j > 0) ? a[j - 1] : 0.0;
        const double ap1 = (j < k) ? a[j + 1] : 0.0;
        const double ltm = (j > 0) ? lt[j - 1] : 0.0;
        const double a_part = -(lt[j] * a[j] * ap1 - ltm * am1 * am1) + f[j];
        if (!magnetic) {
            da[j] = a_part;
            continue;
        }
        const double bm1 = (j > 0) ? b[j - 1] : 0.0;
        const double bp1 = (j < k) ? b[j + 1] : 0.0;
        const double b_part = -bsign * (lt[j] * b[j] * bp1 - ltm * bm1 * bm1);
        da[j] = a_part + b_part;
        db[j] = bsign * lt[j] * (a[j] * bp1 - b[j] * ap1);
    }
}

}  // namespace

Derivative rhs(const ModelSpec& spec, const ShellState& state) {
    const size_t count = static_cast<size_t>(spec.shell_count());
    if (state.a.size() != count || state.b.size() != count)
        throw std::invalid_argument("state dimensions do not match the model spec");
    if (!state_finite(state)) throw std::invalid_argument("rhs requires a finite state");
    Derivative d;
    d.da.assign(count, 0.0);
    d.db.assign(count, 0.0);
    rhs_kernel(spec, state.a.data(), state.b.data(), d.da.data(), d.db.data());
    return d;
}

void rhs_packed(const ModelSpec& spec, std::span<const double> y, std::span<double> dy) {
    const int count = spec.shell_count();
    if (spec.has_magnetic()) {
        rhs_kernel(spec, y.data(), y.data() + count, dy.data(), dy.data() + count);
    } else {
        rhs_kernel(spec, y.data(), nullptr, dy.data(), nullptr);
    }
}

void pack_state(const ModelSpec& spec, const ShellState& state, std::span<double> y) {
    const int count = spec.shell_count();
    for (int j = 0; j < count; ++j) y[j] = state.a[j];
    if (spec.has_magnetic())
        for (int j = 0; j < count; ++j) y[count + j] = state.b[j];
}

ShellState unpack_state(const ModelSpec& spec, std::span<const double> y, double t) {
    const int count = spec.shell_count();
    ShellState state;
    state.t = t;
    state.a.assign(y.begin(), y.begin() + count);
    if (spec.has_magnetic())
        state.b.assign(y.begin() + count, y.begin() + 2 * count);
    else
        state.b.assign(count, 0.0);
    return state;
}

FluxProfile flux(const ModelSpec& spec, const ShellState& state) {
    const size_t count = static_cast<size_t>(spec.shell_count());
    if (state.a.size() != count || state.b.size() != count)
        throw std::invalid_argument("state dimensions do not match the model spec");
    FluxProfile profile;
    profile.variant = (spec.kind == ModelKind::MhdBidirectional) ? FluxVariant::Signed
                                                                 : FluxVariant::Forward;
    profile.values.resize(spec.n_shells);
    const double sign = (profile.variant == FluxVariant::Signed) ? -1.0 : 1.0;
    for (int j = 0; j < spec.n_shells; ++j) {
        const double en = state.a[j] * state.a[j] + sign * state.b[j] * state.b[j];
        profile.values[j] = spec.lambda_pow_theta[j] * en * state.a[j + 1];
    }
    return profile;
}

RescaledState rescale(const ModelSpec& spec, const ShellState& state, double exponent) {
    if (!std::isfinite(exponent)) throw std::invalid_argument("rescale exponent must be finite");
    const int count = spec.shell_count();
    RescaledState out;
    out.a.resize(count);
    out.b.resize(count);
    for (int j = 0; j < count; ++j) {
        const double w = spec.lambda_pow(exponent, j);
        out.a[j] = w * state.a[j];
        out.b[j] = w * state.b[j];
        if (!std::isfinite(out.a[j]) || !std::isfinite(out.b[j])) out.overflow = true;
    }
    return out;
}

}  // namespace dyadic
