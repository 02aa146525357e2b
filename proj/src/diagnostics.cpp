#include "dyadic/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dyadic {

double energy(const ShellState& state) {
    double sum = 0.0;
    for (double v : state.a) sum += v * v;
    for (double v : state.b) sum += v * v;
    return 0.5 * sum;
}

double cross_helicity(const ShellState& state) {
    double sum = 0.0;
    const size_t n = std::min(state.a.size(), state.b.size());
    for (size_t j = 0; j < n; ++j) sum += state.a[j] * state.b[j];
    return sum;
}

double sobolev_norm(std::span<const double> u, double s, double lambda) {
    const double ratio = std::pow(lambda, 2.0 * s);
    double sum = 0.0;
    double w = 1.0;
    for (double v : u) {
        sum += w * v * v;
        w *= ratio;
    }
    return std::sqrt(sum);
}

double weak_distance(std::span<const double> u, std::span<const double> v, double lambda) {
    const size_t n = std::max(u.size(), v.size());
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
        const double uj = j < u.size() ? u[j] : 0.0;
        const double vj = j < v.size() ? v[j] : 0.0;
        const double d = std::abs(uj - vj);
        const double w = std::pow(lambda, -static_cast<double>(j) * static_cast<double>(j));
        sum += w * d / (1.0 + d);
    }
    return sum;
}

namespace {

double positive_coefficient(const LyapunovParams& p, double lambda, double theta) {
    return std::pow(lambda, theta - p.gamma) -
           (1.0 + 2.0 * p.c0) * std::pow(lambda, 0.5 * p.gamma - theta);
}

}  // namespace

bool lyapunov_params_valid(const LyapunovParams& p, double lambda, double theta) {
    if (!(p.gamma > 0.0) || !(p.c0 > 0.0) || !(p.c0 < 1.0)) return false;
    if (2.0 * theta - p.gamma > 2.0 * p.s + 1e-14) return false;
    return positive_coefficient(p, lambda, theta) > 0.0;
}

double riccati_coefficient(const LyapunovParams& p, double lambda, double theta) {
    return (1.0 - std::pow(lambda, -p.gamma)) / (2.0 * p.c0 * p.c0) *
           positive_coefficient(p, lambda, theta);
}

LyapunovReport lyapunov(const ShellState& state, const ModelSpec& spec, const LyapunovParams& p) {
    LyapunovReport rep;
    const int count = spec.shell_count();
    const double wexp = spec.theta - p.gamma;  // lambda_j^{-gamma} w_j = lambda_j^{theta-gamma} a_j
    double phi = 0.0, psi = 0.0;
    for (int j = 0; j < count; ++j) {
        const double weight = spec.lambda_pow(-p.gamma, j);
        const double w = spec.lambda_pow(spec.theta, j) * state.a[j];
        const double z = spec.lambda_pow(spec.theta, j) * state.b[j];
        phi += weight * (w * w + z * z);
        psi += spec.lambda_pow(wexp, j) * (state.a[j] + p.c0 * state.b[j]);
    }
    rep.phi = phi;
    rep.psi = psi;
    rep.K = riccati_coefficient(p, spec.lambda, spec.theta);
    rep.valid = lyapunov_params_valid(p, spec.lambda, spec.theta);
    const double f0 = spec.forcing.empty() ? 0.0 : spec.forcing[0];
    if (rep.valid && psi > 0.0 && f0 >= 0.0 && rep.K > 0.0)
        rep.t_upper = riccati_blowup_bound(psi, rep.K, f0);
    return rep;
}

bool psi_squared_bound_check(const ShellState& state, const ModelSpec& spec,
                             const LyapunovParams& p) {
    const LyapunovReport rep = lyapunov(state, spec, p);
    const double geom = 1.0 / (1.0 - std::pow(spec.lambda, -p.gamma));
    const double bound = 2.0 * std::max(1.0, p.c0 * p.c0) * geom * rep.phi;
    return rep.psi * rep.psi <= bound * (1.0 + 1e-12) + 1e-300;
}

double riccati_blowup_bound(double psi0, double K, double f0) {
    if (!(K > 0.0)) throw std::invalid_argument("riccati_blowup_bound requires K > 0");
    if (f0 < 0.0) throw std::invalid_argument("riccati_blowup_bound requires f0 >= 0");
    if (f0 == 0.0) {
        if (!(psi0 > 0.0))
            throw std::invalid_argument("riccati_blowup_bound with f0 = 0 requires psi0 > 0");
        return 1.0 / (K * psi0);
    }
    const double r = std::sqrt(K / f0);
    return (std::numbers::pi / 2.0 - std::atan(psi0 * r)) / std::sqrt(K * f0);
}

MonitorReport monitors(const Trajectory& traj, const ModelSpec& spec,
                       const MonitorOptions& opts) {
    if (traj.samples.empty()) throw std::invalid_argument("monitors requires a non-empty trajectory");
    MonitorReport rep;
    const int count = spec.shell_count();
    const double exp3 = spec.theta / 3.0;
    for (const ShellState& s : traj.samples) {
        double ma = s.a[0], mb = s.b[0];
        for (int j = 1; j < count; ++j) {
            ma = std::min(ma, s.a[j]);
            mb = std::min(mb, s.b[j]);
        }
        rep.min_a.push_back(ma);
        rep.min_b.push_back(mb);
        const double watched = spec.has_magnetic() ? std::min(ma, mb) : ma;
        if (!rep.first_positivity_loss && watched <= 0.0) rep.first_positivity_loss = s.t;

        bool monotone = true;
        double prev = s.a[0];  // lambda_0 = 1
        for (int j = 1; j < count && monotone; ++j) {
            const double cur = spec.lambda_pow(exp3, j) * s.a[j];
            if (cur > prev + opts.monotone_rel_tol * (std::abs(prev) + 1.0)) monotone = false;
            prev = cur;
        }
        rep.rescaled_monotone.push_back(monotone);
    }
    return rep;
}

RiccatiCheck riccati_check(const Trajectory& traj, const ModelSpec& spec,
                           const LyapunovParams& p) {
    RiccatiCheck chk;
    chk.K = riccati_coefficient(p, spec.lambda, spec.theta);
    chk.params_valid = lyapunov_params_valid(p, spec.lambda, spec.theta);
    const int count = spec.shell_count();
    const int k = spec.n_shells;
    for (int j = 0; j < count; ++j)
        chk.forcing_term += spec.lambda_pow(spec.theta - p.gamma, j) * spec.forcing[j];

    const size_t m = traj.samples.size();
    if (m < 3) return chk;

    std::vector<double> psi(m), phi(m), bflux(m);
    std::vector<bool> positive(m);
    const double bf_weight =
        std::pow(spec.lambda, spec.theta - p.gamma) * spec.lambda_pow(2.0 * spec.theta - p.gamma, k);
    for (size_t i = 0; i < m; ++i) {
        const LyapunovReport rep = lyapunov(traj.samples[i], spec, p);
        psi[i] = rep.psi;
        phi[i] = rep.phi;
        const double ak = traj.samples[i].a[k];
        const double bk = traj.samples[i].b[k];
        bflux[i] = bf_weight * (ak * ak + bk * bk);
        bool pos = true;
        for (int j = 0; j < count && pos; ++j) {
            if (traj.samples[i].a[j] <= 0.0) pos = false;
            if (spec.has_magnetic() && traj.samples[i].b[j] <= 0.0) pos = false;
        }
        positive[i] = pos;
    }

    const double c_pos = positive_coefficient(p, spec.lambda, spec.theta);
    for (size_t i = 1; i + 1 < m; ++i) {
        const double h1 = traj.samples[i].t - traj.samples[i - 1].t;
        const double h2 = traj.samples[i + 1].t - traj.samples[i].t;
        if (std::abs(h1 - h2) > 1e-9 * std::max(h1, h2)) continue;  // uniform triples only
        const double h = 0.5 * (h1 + h2);
        const double dpsi = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
        // centered-difference truncation error ~ h^2/6 |psi'''|
        double d3 = 0.0;
        if (i + 2 < m) {
            const double h3 = traj.samples[i + 2].t - traj.samples[i + 1].t;
            if (std::abs(h3 - h) <= 1e-9 * h)
                d3 = (psi[i + 2] - 3.0 * psi[i + 1] + 3.0 * psi[i] - psi[i - 1]) / (h * h * h);
        }
        if (d3 == 0.0 && i >= 2) {
            const double h0 = traj.samples[i - 1].t - traj.samples[i - 2].t;
            if (std::abs(h0 - h) <= 1e-9 * h)
                d3 = (psi[i + 1] - 3.0 * psi[i] + 3.0 * psi[i - 1] - psi[i - 2]) / (h * h * h);
        }
        const double rhs_k = chk.K * psi[i] * psi[i] + chk.forcing_term;
        const double rhs_phi = c_pos * phi[i] + chk.forcing_term;
        const double slack = h * h / 6.0 * std::abs(d3) * 4.0 +
                             1e-7 * (std::abs(rhs_k) + std::abs(dpsi) + bflux[i] + 1.0);
        const double lhs = dpsi + bflux[i] + slack;

        chk.checked_flux++;
        if (lhs < rhs_phi) chk.violations_flux++;
        if (positive[i - 1] && positive[i] && positive[i + 1]) {
            chk.checked_riccati++;
            if (lhs < rhs_k) {
                chk.violations_riccati++;
                chk.max_shortfall = std::max(chk.max_shortfall, rhs_k - lhs);
            }
        }
    }
    return chk;
}

}  // namespace dyadic
