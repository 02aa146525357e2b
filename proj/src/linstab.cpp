#include "dyadic/linstab.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dyadic {

std::string to_string(EigenClass cls) {
    switch (cls) {
        case EigenClass::DecayingHs: return "decaying_hs";
        case EigenClass::Growing: return "growing";
        case EigenClass::Degenerate: return "degenerate";
        case EigenClass::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

Derivative perturbation_rhs(const LinearizationBase& base, ModelKind kind,
                            const PerturbationState& state) {
    const size_t n = state.omega.size();
    if (state.zeta.size() != n)
        throw std::invalid_argument("omega and zeta must have equal length");
    const double lam = base.lambda;
    const double th = base.theta;
    const double r13 = std::pow(lam, -th / 3.0);
    const double r23 = std::pow(lam, -2.0 * th / 3.0);
    // sign of the magnetic contributions: +1 for the uni-directional system,
    // -1 for the bi-directional one
    const double ms = (kind == ModelKind::MhdBidirectional) ? -1.0 : 1.0;
    const double eps = state.epsilon;

    Derivative d;
    d.da.assign(n, 0.0);
    d.db.assign(n, 0.0);
    const auto om = [&](long j) { return (j >= 0 && j < static_cast<long>(n)) ? state.omega[j] : 0.0; };
    const auto ze = [&](long j) { return (j >= 0 && j < static_cast<long>(n)) ? state.zeta[j] : 0.0; };

    for (long j = 0; j < static_cast<long>(n); ++j) {
        const double l23 = std::pow(lam, 2.0 * th / 3.0 * static_cast<double>(j));  // lambda_j^{2theta/3}
        const double lt = std::pow(lam, th * static_cast<double>(j));               // lambda_j^theta
        const double ltm = (j > 0) ? std::pow(lam, th * static_cast<double>(j - 1)) : 0.0;

        const double wlin = l23 * (2.0 * r23 * om(j - 1) - r13 * om(j) - om(j + 1));
        const double zlin_w = l23 * (2.0 * r23 * ze(j - 1) - r13 * ze(j) - ze(j + 1));
        double domega = base.A0 * wlin + ms * base.B0 * zlin_w;
        if (kind != ModelKind::Euler) {
            domega += eps * (-lt * om(j) * om(j + 1) + ltm * om(j - 1) * om(j - 1)) +
                      ms * eps * (-lt * ze(j) * ze(j + 1) + ltm * ze(j - 1) * ze(j - 1));
        } else {
            domega += eps * (-lt * om(j) * om(j + 1) + ltm * om(j - 1) * om(j - 1));
        }
        d.da[j] = domega;

        if (kind == ModelKind::Euler) continue;
        const double zvel = l23 * (r13 * om(j) - om(j + 1));
        const double zmag = l23 * (r13 * ze(j) - ze(j + 1));
        d.db[j] = ms * (base.B0 * zvel - base.A0 * zmag) +
                  ms * eps * lt * (om(j) * ze(j + 1) - ze(j) * om(j + 1));
    }
    return d;
}

namespace {

constexpr double kStabilizationTol = 1e-9;
constexpr double kDecayTol = 1e-10;

}  // namespace

EigenProblem velocity_eigenvector(double p, double lambda, double theta, int n, int a0_sign) {
    if (n < 2) throw std::invalid_argument("velocity_eigenvector requires n >= 2");
    if (!std::isfinite(p)) throw std::invalid_argument("p must be finite");
    EigenProblem ep;
    ep.channel = EigenChannel::Velocity;
    ep.value = p;
    ep.lambda = lambda;
    ep.theta = theta;
    ep.a0_sign = a0_sign;
    const double r13 = std::pow(lambda, -theta / 3.0);
    ep.root_decay = r13;
    ep.root_dominant = -2.0 * r13;

    // normalized iteration u_j = c_j (-2 lambda^{-theta/3})^{-j}, bounded for
    // every p; u_{j+1} = (beta_j / (2 r13)) u_j + u_{j-1} / 2
    const double sp = (a0_sign < 0) ? -p : p;
    std::vector<double> u(n + 1);
    double um1 = 0.0;
    u[0] = 1.0;
    double r23j = 1.0;  // lambda_j^{-2theta/3}
    const double r23 = std::pow(lambda, -2.0 * theta / 3.0);
    for (int j = 0; j < n; ++j) {
        const double beta = sp * r23j + r13;
        u[j + 1] = beta / (2.0 * r13) * u[j] + 0.5 * um1;
        um1 = u[j];
        r23j *= r23;
    }

    ep.coeffs.resize(n + 1);
    ep.alphas.resize(n);
    double pw = 1.0;
    bool overflow = false;
    for (int j = 0; j <= n; ++j) {
        ep.coeffs[j] = u[j] * pw;
        if (!std::isfinite(ep.coeffs[j])) overflow = true;
        pw *= ep.root_dominant;
    }
    r23j = 1.0;
    for (int j = 0; j < n; ++j) {
        ep.alphas[j] = sp * r23j + r13;
        r23j *= r23;
    }

    double umax = 0.0;
    for (int j = std::max(0, n - 10); j <= n; ++j) umax = std::max(umax, std::abs(u[j]));
    ep.dominant_amplitude = u[n];
    ep.stabilization_delta =
        std::max(std::abs(u[n] - u[n - 1]), std::abs(u[n - 1] - u[n - 2]));
    ep.tail_ratio = (u[n - 1] != 0.0) ? ep.coeffs[n] / ep.coeffs[n - 1] : 0.0;

    if (overflow) {
        ep.classification = EigenClass::Growing;
    } else if (ep.stabilization_delta > kStabilizationTol * std::max(1.0, umax)) {
        ep.classification = EigenClass::Inconclusive;
    } else if (std::abs(u[n]) <= kDecayTol * std::max(1.0, umax)) {
        ep.classification = EigenClass::DecayingHs;
        ep.s_max = theta / 3.0;
    } else {
        ep.classification = EigenClass::Growing;
    }
    return ep;
}

EigenProblem magnetic_eigenvector(double q, double lambda, double theta, int n, int a0_sign) {
    if (n < 1) throw std::invalid_argument("magnetic_eigenvector requires n >= 1");
    if (!std::isfinite(q)) throw std::invalid_argument("q must be finite");
    EigenProblem ep;
    ep.channel = EigenChannel::Magnetic;
    ep.value = q;
    ep.lambda = lambda;
    ep.theta = theta;
    ep.a0_sign = a0_sign;
    const double r13 = std::pow(lambda, -theta / 3.0);
    const double r23 = std::pow(lambda, -2.0 * theta / 3.0);
    ep.root_decay = r13;
    ep.root_dominant = -2.0 * r13;
    ep.time_unstable = q > 0.0;

    const double sq = (a0_sign < 0) ? -q : q;
    ep.coeffs.resize(n + 1);
    ep.alphas.resize(n);
    ep.coeffs[0] = 1.0;
    double profile_ratio = 1.0;  // d_j / lambda_j^{-theta/3}
    double r23j = 1.0;
    for (int j = 0; j < n; ++j) {
        const double alpha = sq * r23j + r13;
        ep.alphas[j] = alpha;
        if (ep.degenerate_index < 0 &&
            std::abs(alpha) <= 1e-12 * (std::abs(sq) * r23j + r13))
            ep.degenerate_index = j;
        ep.coeffs[j + 1] = alpha * ep.coeffs[j];
        profile_ratio *= alpha / r13;
        r23j *= r23;
    }
    ep.dominant_amplitude = profile_ratio;
    ep.tail_ratio = (ep.coeffs[n - 1] != 0.0) ? ep.coeffs[n] / ep.coeffs[n - 1] : 0.0;
    // tail variation of the profile ratio: |d_n/l_n - d_{n-1}/l_{n-1}|
    if (n >= 2 && ep.coeffs[n - 1] != 0.0) {
        const double prev = profile_ratio / (ep.alphas[n - 1] / r13);
        ep.stabilization_delta = std::abs(profile_ratio - prev);
    }
    if (ep.degenerate_index >= 0) {
        ep.classification = EigenClass::Degenerate;
    } else {
        ep.classification = EigenClass::DecayingHs;
        ep.s_max = theta / 3.0;
    }
    return ep;
}

std::vector<double> velocity_product_sequence(double p, double lambda, double theta, int n,
                                              int a0_sign) {
    const double r13 = std::pow(lambda, -theta / 3.0);
    const double r23 = std::pow(lambda, -2.0 * theta / 3.0);
    const double sp = (a0_sign < 0) ? -p : p;
    std::vector<double> c(n + 1);
    c[0] = 1.0;
    if (n >= 1) c[1] = r13;
    double r23i = r23;  // lambda_1^{-2theta/3}
    for (int j = 2; j <= n; ++j) {
        c[j] = c[j - 1] * (sp * r23i + r13);
        r23i *= r23;
    }
    return c;
}

CfResult continued_fraction(std::span<const double> alpha, double A, int depth) {
    if (depth < 1) throw std::invalid_argument("continued_fraction requires depth >= 1");
    if (static_cast<int>(alpha.size()) < depth)
        throw std::invalid_argument("alpha sequence shorter than requested depth");
    const auto eval = [&](int d, int* bad_level) -> double {
        double v = 0.0;
        for (int i = d; i >= 1; --i) {
            const double denom = A * alpha[i - 1] + A * v;
            if (denom == 0.0 || !std::isfinite(denom)) {
                if (bad_level) *bad_level = i;
                return std::numeric_limits<double>::quiet_NaN();
            }
            v = 1.0 / denom;
        }
        return v;
    };
    CfResult res;
    int bad = -1;
    res.value = eval(depth, &bad);
    res.zero_denominator_level = bad;
    if (bad < 0 && depth >= 2) {
        int bad2 = -1;
        const double prev = eval(depth - 1, &bad2);
        if (bad2 < 0) res.delta = std::abs(res.value - prev);
    }
    return res;
}

CfResult continued_fraction(const std::function<double(int)>& alpha, double A, int depth) {
    std::vector<double> seq(depth);
    for (int i = 1; i <= depth; ++i) seq[i - 1] = alpha(i);
    return continued_fraction(seq, A, depth);
}

double cf_constant_closed_form(double alpha, double A) {
    return 2.0 / (A * alpha + std::sqrt(A * A * alpha * alpha + 4.0 * A));
}

namespace {

double signed_amplitude(double p, double lambda, double theta, int n, int a0_sign,
                        EigenClass* cls) {
    const EigenProblem ep = velocity_eigenvector(p, lambda, theta, n, a0_sign);
    if (cls) *cls = ep.classification;
    return ep.dominant_amplitude;
}

}  // namespace

ScanReport eigen_scan(EigenChannel channel, double lo, double hi, double step, double lambda,
                      double theta, double s, int n, int a0_sign) {
    if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad scan range");
    ScanReport report;
    report.channel = channel;
    report.a0_sign = a0_sign;
    report.requested_s = s;
    const int n_points = static_cast<int>(std::lround((hi - lo) / step)) + 1;

    if (channel == EigenChannel::Magnetic) {
        for (int i = 0; i < n_points; ++i) {
            const double q = lo + step * static_cast<double>(i);
            const EigenProblem ep = magnetic_eigenvector(q, lambda, theta, n, a0_sign);
            ScanRow row;
            row.value = q;
            row.growth = ep.dominant_amplitude;
            row.admissible = true;  // every real q solves the product recursion
            row.classification = ep.classification;
            row.time_unstable = ep.time_unstable;
            report.rows.push_back(row);
        }
        return report;
    }

    std::vector<double> amps(n_points);
    std::vector<EigenClass> cls(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double p = lo + step * static_cast<double>(i);
        amps[i] = signed_amplitude(p, lambda, theta, n, a0_sign, &cls[i]);
        ScanRow row;
        row.value = p;
        row.growth = std::abs(amps[i]);
        row.classification = cls[i];
        report.rows.push_back(row);
        if (cls[i] == EigenClass::Inconclusive) report.inconclusive = true;
    }
    for (int i = 0; i + 1 < n_points; ++i) {
        if (cls[i] == EigenClass::Inconclusive || cls[i + 1] == EigenClass::Inconclusive)
            continue;
        double fa = amps[i], fb = amps[i + 1];
        double a = lo + step * i, b = lo + step * (i + 1);
        double root;
        if (fa == 0.0) {
            root = a;
        } else if (fb == 0.0 && i + 2 < n_points) {
            continue;  // handled as the left endpoint of the next interval
        } else if (fb == 0.0) {
            root = b;
        } else if ((fa < 0.0) != (fb < 0.0)) {
            for (int it = 0; it < 100 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = signed_amplitude(mid, lambda, theta, n, a0_sign, nullptr);
                if (fm == 0.0) { a = b = mid; break; }
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            root = 0.5 * (a + b);
        } else {
            continue;
        }
        report.admissible_values.push_back(root);
        report.rows[i].admissible = true;
        report.rows[i].classification = EigenClass::DecayingHs;
    }
    for (double root : report.admissible_values) {
        if (a0_sign >= 0 ? root >= 0.0 : root <= 0.0) report.any_in_forbidden_halfline = true;
    }
    return report;
}

}  // namespace dyadic
