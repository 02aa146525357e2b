#include "dyadic/steady.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dyadic/dense.hpp"

namespace dyadic {

FixedPoint fixed_point(ModelKind kind, double lambda, double theta, double f0, double param,
                       int n_shells, int branch_sign) {
    if (!(f0 > 0.0)) throw std::invalid_argument("fixed_point requires f0 > 0");
    if (!(lambda > 1.0) || !(theta > 0.0))
        throw std::invalid_argument("fixed_point requires lambda > 1 and theta > 0");
    if (n_shells < 1) throw std::invalid_argument("fixed_point requires n_shells >= 1");

    FixedPoint fp;
    fp.kind = kind;
    fp.lambda = lambda;
    fp.theta = theta;
    fp.f0 = f0;
    switch (kind) {
        case ModelKind::MhdForward:
            fp.A0 = std::cos(param);
            fp.B0 = std::sin(param);
            break;
        case ModelKind::MhdBidirectional:
            fp.A0 = (branch_sign < 0 ? -1.0 : 1.0) * std::cosh(param);
            fp.B0 = std::sinh(param);
            break;
        case ModelKind::Euler:
            fp.A0 = (param < 0.0) ? -1.0 : 1.0;
            fp.B0 = 0.0;
            break;
    }
    const double scale = std::pow(lambda, theta / 6.0) * std::sqrt(f0);
    const int count = n_shells + 1;
    fp.a_bar.resize(count);
    fp.b_bar.resize(count);
    for (int j = 0; j < count; ++j) {
        const double profile = scale * std::pow(lambda, -theta / 3.0 * j);
        fp.a_bar[j] = fp.A0 * profile;
        fp.b_bar[j] = fp.B0 * profile;
    }
    return fp;
}

ShellState fixed_point_state(const FixedPoint& fp) {
    return ShellState{fp.a_bar, fp.b_bar, 0.0};
}

ModelSpec fixed_point_spec(const FixedPoint& fp, int n_shells) {
    return make_model(fp.kind, fp.lambda, fp.theta, n_shells, {fp.f0});
}

ResidualReport residual(const ModelSpec& spec, const ShellState& candidate) {
    Derivative d = rhs(spec, candidate);
    ResidualReport rep;
    rep.max_interior_abs = 0.0;
    for (int j = 0; j < spec.n_shells; ++j) {
        rep.max_interior_abs = std::max(rep.max_interior_abs, std::abs(d.da[j]));
        rep.max_interior_abs = std::max(rep.max_interior_abs, std::abs(d.db[j]));
    }
    rep.boundary_defect_a = d.da[spec.n_shells];
    rep.boundary_defect_b = d.db[spec.n_shells];
    rep.da = std::move(d.da);
    rep.db = std::move(d.db);
    return rep;
}

namespace {

ShellRatios ratios_impl(double lambda, double theta, const std::vector<double>& a,
                        const std::vector<double>& b) {
    ShellRatios r;
    const int count = static_cast<int>(a.size());
    const double step = std::pow(lambda, theta / 3.0);  // rescaled ratio = step * u_{j+1}/u_j
    for (int j = 0; j + 1 < count; ++j) {
        if (a[j] == 0.0) {
            r.undefined_a.push_back(j);
            r.a_ratios.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            r.a_ratios.push_back(step * a[j + 1] / a[j]);
        }
        if (b[j] == 0.0) {
            r.undefined_b.push_back(j);
            r.b_ratios.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            r.b_ratios.push_back(step * b[j + 1] / b[j]);
        }
    }
    return r;
}

}  // namespace

ShellRatios shell_ratios(const ModelSpec& spec, const ShellState& candidate) {
    return ratios_impl(spec.lambda, spec.theta, candidate.a, candidate.b);
}

ShellRatios shell_ratios(const FixedPoint& fp) {
    return ratios_impl(fp.lambda, fp.theta, fp.a_bar, fp.b_bar);
}

namespace {

// Interior stationarity residual da_0..da_{k-1} (and db_0..db_{k-1} for the
// MHD kinds), closed by the boundary ratio rows
//   lambda^{theta/3} a_k - a_{k-1} = 0   (and the same for b),
// which pin the rescaled profile to be flat across the last pair of shells.
// Without the closure the interior system carries a boundary-localized null
// direction on top of the steady-state family itself, and the solver would
// return points smeared off the family. The closure rows are scaled by a
// characteristic interior rate so both blocks share units.
std::vector<double> interior_residual(const ModelSpec& spec, const std::vector<double>& x) {
    const int count = spec.shell_count();
    const int k = spec.n_shells;
    ShellState s;
    s.a.assign(x.begin(), x.begin() + count);
    s.b = spec.has_magnetic() ? std::vector<double>(x.begin() + count, x.end())
                              : std::vector<double>(count, 0.0);
    Derivative d = rhs(spec, s);
    std::vector<double> F(d.da.begin(), d.da.begin() + k);
    if (spec.has_magnetic()) F.insert(F.end(), d.db.begin(), d.db.begin() + k);
    const double step = std::pow(spec.lambda, spec.theta / 3.0);
    F.push_back(step * s.a[k] - s.a[k - 1]);
    if (spec.has_magnetic()) F.push_back(step * s.b[k] - s.b[k - 1]);
    return F;
}

DenseMatrix interior_jacobian(const ModelSpec& spec, const std::vector<double>& x) {
    const int count = spec.shell_count();
    const int k = spec.n_shells;
    const bool mag = spec.has_magnetic();
    const double bsign = (spec.kind == ModelKind::MhdBidirectional) ? -1.0 : 1.0;
    const int rows = (mag ? 2 * k : k) + (mag ? 2 : 1);
    const int cols = mag ? 2 * count : count;
    DenseMatrix J(rows, cols);
    const double* a = x.data();
    const double* b = mag ? x.data() + count : nullptr;
    const auto lt = [&](int j) { return spec.lambda_pow_theta[j]; };

    for (int j = 0; j < k; ++j) {
        // row da_j
        if (j >= 1) J(j, j - 1) += 2.0 * lt(j - 1) * a[j - 1];
        J(j, j) += -lt(j) * a[j + 1];
        J(j, j + 1) += -lt(j) * a[j];
        if (mag) {
            const int bc = count;  // column offset of b
            if (j >= 1) J(j, bc + j - 1) += bsign * 2.0 * lt(j - 1) * b[j - 1];
            J(j, bc + j) += bsign * -lt(j) * b[j + 1];
            J(j, bc + j + 1) += bsign * -lt(j) * b[j];
            // row db_j
            const int r = k + j;
            J(r, j) += bsign * lt(j) * b[j + 1];
            J(r, j + 1) += bsign * -lt(j) * b[j];
            J(r, bc + j) += bsign * -lt(j) * a[j + 1];
            J(r, bc + j + 1) += bsign * lt(j) * a[j];
        }
    }
    const double step = std::pow(spec.lambda, spec.theta / 3.0);
    const int rc = mag ? 2 * k : k;  // closure rows
    J(rc, k) = step;
    J(rc, k - 1) = -1.0;
    if (mag) {
        J(rc + 1, count + k) = step;
        J(rc + 1, count + k - 1) = -1.0;
    }
    return J;
}

DenseMatrix fd_jacobian(const ModelSpec& spec, const std::vector<double>& x) {
    const std::vector<double> F0 = interior_residual(spec, x);
    DenseMatrix J(F0.size(), x.size());
    std::vector<double> xp = x;
    for (size_t c = 0; c < x.size(); ++c) {
        const double h = 1e-7 * (1.0 + std::abs(x[c]));
        xp[c] = x[c] + h;
        const std::vector<double> F1 = interior_residual(spec, xp);
        xp[c] = x[c];
        for (size_t r = 0; r < F0.size(); ++r) J(r, c) = (F1[r] - F0[r]) / h;
    }
    return J;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

}  // namespace

NewtonResult newton_steady(const ModelSpec& spec, const ShellState& guess,
                           const NewtonOptions& opts) {
    if (!state_finite(guess)) throw std::invalid_argument("newton_steady requires a finite guess");
    const int count = spec.shell_count();
    std::vector<double> x(spec.packed_size());
    pack_state(spec, guess, x);

    NewtonResult result;
    bool jittered = false;
    std::vector<double> F = interior_residual(spec, x);
    double fnorm = norm2(F);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        result.iterations = iter;
        if (fnorm <= opts.tol) {
            result.converged = true;
            break;
        }
        DenseMatrix J = opts.fd_jacobian ? fd_jacobian(spec, x) : interior_jacobian(spec, x);

        // minimum-norm Gauss-Newton step: delta = J^T u, (J J^T + mu I) u = -F
        const size_t m = J.rows;
        DenseMatrix JJt(m, m);
        for (size_t r = 0; r < m; ++r)
            for (size_t c = r; c < m; ++c) {
                double s = 0.0;
                for (size_t j = 0; j < J.cols; ++j) s += J(r, j) * J(c, j);
                JJt(r, c) = s;
                JJt(c, r) = s;
            }
        double trace = 0.0;
        for (size_t r = 0; r < m; ++r) trace += JJt(r, r);
        const double mu = 1e-14 * (trace / static_cast<double>(m)) + 1e-300;
        for (size_t r = 0; r < m; ++r) JJt(r, r) += mu;

        LuFactors f = lu_factor(JJt);
        if (f.singular) {
            result.condition_estimate = std::numeric_limits<double>::infinity();
            break;
        }
        result.condition_estimate = condition_estimate(JJt, f);
        std::vector<double> rhs_vec(m);
        for (size_t r = 0; r < m; ++r) rhs_vec[r] = -F[r];
        const std::vector<double> u = lu_solve(f, std::move(rhs_vec));
        std::vector<double> delta(x.size(), 0.0);
        for (size_t c = 0; c < J.cols; ++c) {
            double s = 0.0;
            for (size_t r = 0; r < m; ++r) s += J(r, c) * u[r];
            delta[c] = s;
        }

        const double dnorm = norm2(delta);
        if (dnorm <= 1e-14 * (norm2(x) + 1.0)) {
            // stationary point of the merit function (e.g. the zero state,
            // where the quadratic rhs has a vanishing Jacobian); nudge once
            // along the decaying profile and retry
            if (jittered) break;
            jittered = true;
            const double f0 = spec.forcing.empty() ? 1.0 : std::max(std::abs(spec.forcing[0]), 1.0);
            const double scale = 0.1 * std::sqrt(f0);
            for (int j = 0; j < count; ++j)
                x[j] += scale * spec.lambda_pow(-spec.theta / 3.0, j);
            F = interior_residual(spec, x);
            fnorm = norm2(F);
            continue;
        }

        // backtracking line search on 1/2 ||F||^2
        double sigma = 1.0;
        bool moved = false;
        std::vector<double> x_try(x.size());
        for (int ls = 0; ls < 30; ++ls) {
            for (size_t i = 0; i < x.size(); ++i) x_try[i] = x[i] + sigma * delta[i];
            const std::vector<double> F_try = interior_residual(spec, x_try);
            const double fn_try = norm2(F_try);
            if (fn_try <= (1.0 - 1e-4 * sigma) * fnorm) {
                x = x_try;
                F = F_try;
                fnorm = fn_try;
                moved = true;
                break;
            }
            sigma *= 0.5;
        }
        if (!moved) break;
    }

    if (fnorm <= opts.tol) result.converged = true;
    // report the interior stationarity residual, without the closure rows
    const size_t n_closure = spec.has_magnetic() ? 2 : 1;
    double interior2 = 0.0;
    for (size_t i = 0; i + n_closure < F.size(); ++i) interior2 += F[i] * F[i];
    result.residual_norm = std::sqrt(interior2);
    ShellState out;
    out.t = guess.t;
    out.a.assign(x.begin(), x.begin() + count);
    out.b = spec.has_magnetic() ? std::vector<double>(x.begin() + count, x.end())
                                : std::vector<double>(count, 0.0);
    result.state = std::move(out);
    return result;
}

}  // namespace dyadic
