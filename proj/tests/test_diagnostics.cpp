#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dyadic/diagnostics.hpp"
#include "dyadic/integrator.hpp"
#include "dyadic/model.hpp"
#include "dyadic/rng.hpp"

using namespace dyadic;

namespace {

// Composite-Simpson quadrature oracle for the blow-up time integral
//   int_{psi0}^{inf} d psi / (K psi^2 + f0)  =  int_0^{1/psi0} du / (K + f0 u^2)
double quadrature_blowup_time(double psi0, double K, double f0) {
    const double upper = 1.0 / psi0;
    const int n = 20000;  // even
    const double h = upper / n;
    auto g = [&](double u) { return 1.0 / (K + f0 * u * u); };
    double sum = g(0.0) + g(upper);
    for (int i = 1; i < n; ++i) sum += g(h * i) * ((i % 2) ? 4.0 : 2.0);
    return sum * h / 3.0;
}

ShellState random_state(const ModelSpec& spec, SplitMix64& rng) {
    std::vector<double> a(spec.shell_count()), b(spec.shell_count(), 0.0);
    for (int j = 0; j < spec.shell_count(); ++j) {
        a[j] = 2.0 * rng.uniform() - 1.0;
        if (spec.has_magnetic()) b[j] = 2.0 * rng.uniform() - 1.0;
    }
    return make_state(spec, std::move(a), std::move(b));
}

}  // namespace

TEST_CASE("energy and cross helicity") {
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 1);
    CHECK(energy(make_state(spec, {3.0, 4.0}, {0.0, 0.0})) == doctest::Approx(12.5));
    CHECK(energy(make_state(spec, {0.0, 0.0})) == 0.0);
    CHECK(energy(make_state(spec, {1.0, 1.0}, {1.0, 0.0})) == doctest::Approx(1.5));
    CHECK(cross_helicity(make_state(spec, {1.0, 2.0}, {3.0, 4.0})) == doctest::Approx(11.0));
    CHECK(cross_helicity(make_state(spec, {1.0, 2.0})) == 0.0);
    CHECK(cross_helicity(make_state(spec, {1.0, 1.0}, {1.0, 1.0})) == doctest::Approx(2.0));
}

TEST_CASE("sobolev norm") {
    const std::vector<double> u{1.0, 1.0};
    CHECK(sobolev_norm(u, 0.5, 2.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(sobolev_norm(u, 1.0, 2.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    const std::vector<double> v{3.0, 4.0};
    CHECK(sobolev_norm(v, 0.0, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
    // consistency: E = (||a||_0^2 + ||b||_0^2) / 2
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 1);
    const ShellState s = make_state(spec, {1.5, -2.0}, {0.5, 0.25});
    const double na = sobolev_norm(s.a, 0.0, 2.0);
    const double nb = sobolev_norm(s.b, 0.0, 2.0);
    CHECK(energy(s) == doctest::Approx(0.5 * (na * na + nb * nb)).epsilon(1e-15));
}

TEST_CASE("weak distance") {
    const std::vector<double> zero{0.0, 0.0, 0.0};
    const std::vector<double> e0{1.0, 0.0, 0.0};
    CHECK(weak_distance(e0, e0, 2.0) == 0.0);
    CHECK(weak_distance(e0, zero, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    SplitMix64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> u(6), v(4);
        for (double& x : u) x = 4.0 * rng.uniform() - 2.0;
        for (double& x : v) x = 4.0 * rng.uniform() - 2.0;
        const double duv = weak_distance(u, v, 2.0);
        CHECK(duv == weak_distance(v, u, 2.0));
        CHECK(duv >= 0.0);
        double bound = 0.0;
        for (int n = 0; n < 6; ++n) bound += std::pow(2.0, -double(n) * n);
        CHECK(duv < bound);
    }
}

TEST_CASE("lyapunov pair and Riccati coefficient") {
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 1, {1.0});
    const LyapunovParams p{0.5, 1.0, 0.1};
    const ShellState s = make_state(spec, {1.0, 1.0});
    const LyapunovReport rep = lyapunov(s, spec, p);
    // w = (1, 2): phi = 1 + 4/2 = 3, psi = 1 + 2/2 = 2
    CHECK(rep.phi == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(rep.psi == doctest::Approx(2.0).epsilon(1e-14));
    const double k_expected = 25.0 * (1.0 - 1.2 * std::pow(2.0, -0.5));
    CHECK(rep.K == doctest::Approx(k_expected).epsilon(1e-14));
    CHECK(rep.K == doctest::Approx(3.7868).epsilon(1e-4));
    CHECK(rep.valid);
    REQUIRE(rep.t_upper.has_value());

    const ShellState zero = make_state(spec, {0.0, 0.0});
    const LyapunovReport rz = lyapunov(zero, spec, p);
    CHECK(rz.phi == 0.0);
    CHECK(rz.psi == 0.0);
}

TEST_CASE("phi is positive definite and psi positive on positive states") {
    SplitMix64 rng(5);
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 9);
    const LyapunovParams p{0.5, 1.0, 0.1};
    for (int trial = 0; trial < 12; ++trial) {
        const ShellState s = random_state(spec, rng);
        const LyapunovReport rep = lyapunov(s, spec, p);
        CHECK(rep.phi >= 0.0);
        bool zero_state = true;
        for (int j = 0; j <= 9; ++j)
            if (s.a[j] != 0.0 || s.b[j] != 0.0) zero_state = false;
        if (!zero_state) CHECK(rep.phi > 0.0);
    }
    std::vector<double> a(10), b(10);
    for (int j = 0; j < 10; ++j) {
        a[j] = rng.uniform_pos();
        b[j] = rng.uniform_pos();
    }
    const LyapunovReport rep = lyapunov(make_state(spec, a, b), spec, p);
    CHECK(rep.psi > 0.0);
}

TEST_CASE("lyapunov parameter window") {
    CHECK(lyapunov_params_valid({0.5, 1.0, 0.1}, 2.0, 1.0));
    // gamma beyond 4 theta / 3 leaves no room for c0
    CHECK_FALSE(lyapunov_params_valid({2.0, 1.4, 0.1}, 2.0, 1.0));
    // c0 above (lambda^{2 theta - 3 gamma / 2} - 1) / 2 = 0.207...
    CHECK_FALSE(lyapunov_params_valid({0.5, 1.0, 0.25}, 2.0, 1.0));
    // 2 theta - gamma > 2 s
    CHECK_FALSE(lyapunov_params_valid({0.4, 1.0, 0.1}, 2.0, 1.0));
    // invalid params still produce phi/psi, with valid = false
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 2, {1.0});
    const LyapunovReport rep =
        lyapunov(make_state(spec, {1.0, 1.0, 1.0}), spec, {0.4, 1.0, 0.1});
    CHECK_FALSE(rep.valid);
    CHECK(rep.phi > 0.0);
    CHECK_FALSE(rep.t_upper.has_value());
}

TEST_CASE("psi^2 bound uses the corrected constant") {
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 1, {1.0});
    const LyapunovParams p{0.5, 1.0, 0.1};
    const ShellState s = make_state(spec, {1.0, 1.0});
    const LyapunovReport rep = lyapunov(s, spec, p);
    // with the 2 c0^2 / (1 - lambda^{-gamma}) prefactor the inequality fails
    // for b = 0 states; the sharp constant replaces c0^2 by max(1, c0^2)
    const double raw_constant = 2.0 * p.c0 * p.c0 / (1.0 - 0.5);
    CHECK(rep.psi * rep.psi > raw_constant * rep.phi);
    CHECK(psi_squared_bound_check(s, spec, p));

    SplitMix64 rng(17);
    const ModelSpec spec9 = make_model(ModelKind::MhdBidirectional, 2.0, 1.0, 9);
    for (int trial = 0; trial < 20; ++trial)
        CHECK(psi_squared_bound_check(random_state(spec9, rng), spec9, p));
    const ShellState zero = make_state(spec, {0.0, 0.0});
    CHECK(psi_squared_bound_check(zero, spec, p));
}

TEST_CASE("riccati blow-up bound closed forms against quadrature") {
    CHECK(riccati_blowup_bound(1.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(riccati_blowup_bound(2.0, 0.5, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    const double K = 25.0 * (1.0 - 1.2 * std::pow(2.0, -0.5));
    const double closed = riccati_blowup_bound(2.0, K, 1.0);
    CHECK(closed == doctest::Approx(quadrature_blowup_time(2.0, K, 1.0)).epsilon(1e-9));
    CHECK(closed == doctest::Approx(0.1292).epsilon(2e-3));
    // monotone decrease in psi0
    double prev = riccati_blowup_bound(0.5, K, 1.0);
    for (double psi0 : {1.0, 2.0, 4.0, 8.0, 64.0}) {
        const double t = riccati_blowup_bound(psi0, K, 1.0);
        CHECK(t < prev);
        prev = t;
    }
    CHECK_THROWS_AS(riccati_blowup_bound(1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(riccati_blowup_bound(1.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(riccati_blowup_bound(0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(riccati_blowup_bound(1.0, 1.0, -0.5), std::invalid_argument);
}

TEST_CASE("monitors: rescaled monotone flag and positivity loss") {
    const ModelSpec spec = make_model(ModelKind::Euler, 2.0, 1.5, 4, {1.0});
    // fixed-point profile: rescaled sequence constant -> monotone
    std::vector<double> prof(5);
    for (int j = 0; j <= 4; ++j) prof[j] = spec.lambda_pow(-spec.theta / 3.0, j);
    Trajectory traj;
    traj.samples.push_back(make_state(spec, prof));
    // strictly decreasing rescaled sequence -> monotone
    std::vector<double> dec(5);
    for (int j = 0; j <= 4; ++j) dec[j] = spec.lambda_pow(-spec.theta, j);
    traj.samples.back().t = 0.0;
    ShellState s2 = make_state(spec, dec, {}, 1.0);
    traj.samples.push_back(s2);
    // one negative entry -> positivity loss flagged at that sample
    std::vector<double> neg = prof;
    neg[2] = -0.01;
    ShellState s3 = make_state(spec, neg, {}, 2.0);
    traj.samples.push_back(s3);
    // rescaled increasing somewhere -> not monotone
    std::vector<double> inc(5, 1.0);
    ShellState s4 = make_state(spec, inc, {}, 3.0);
    traj.samples.push_back(s4);

    const MonitorReport rep = monitors(traj, spec);
    REQUIRE(rep.min_a.size() == 4);
    CHECK(rep.rescaled_monotone[0]);
    CHECK(rep.rescaled_monotone[1]);
    CHECK_FALSE(rep.rescaled_monotone[3]);
    CHECK(rep.min_a[2] == doctest::Approx(-0.01));
    REQUIRE(rep.first_positivity_loss.has_value());
    CHECK(*rep.first_positivity_loss == doctest::Approx(2.0));
}

TEST_CASE("riccati check: flux form holds along a blow-up run") {
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 16, {1.0});
    std::vector<double> a(17), b(17);
    for (int j = 0; j <= 16; ++j) a[j] = b[j] = spec.lambda_pow(-2.0 / 3.0, j);
    const ShellState s0 = make_state(spec, a, b);
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.sample_every = 1e-3;
    cfg.abs_tol = cfg.rel_tol = 1e-10;
    const Trajectory traj = integrate(spec, s0, cfg);
    const LyapunovParams p{0.5, 1.0, 0.1};
    const RiccatiCheck chk = riccati_check(traj, spec, p);
    CHECK(chk.params_valid);
    CHECK(chk.checked_flux > 100);
    // the phi-form inequality is derivable for the truncated dynamics without
    // any positivity assumption, so sampled violations indicate a bug
    CHECK(chk.violations_flux == 0);
    CHECK(chk.forcing_term == doctest::Approx(1.0));
    CHECK(chk.checked_riccati <= chk.checked_flux);
}

TEST_CASE("forced energy balance along a short run") {
    const ModelSpec spec = make_model(ModelKind::MhdForward, 2.0, 1.0, 10, {1.0});
    std::vector<double> a(11), b(11);
    for (int j = 0; j <= 10; ++j) a[j] = b[j] = spec.lambda_pow(-1.0, j);
    const ShellState s0 = make_state(spec, a, b);
    IntegratorConfig cfg;
    cfg.t_end = 0.5;
    cfg.sample_every = 5e-4;
    cfg.abs_tol = cfg.rel_tol = 1e-10;
    const Trajectory traj = integrate(spec, s0, cfg);
    REQUIRE(traj.terminated_by == TerminationReason::TimeEnd);
    double work = 0.0;
    for (size_t i = 1; i < traj.samples.size(); ++i) {
        const double h = traj.samples[i].t - traj.samples[i - 1].t;
        double p0 = 0.0, p1 = 0.0;
        for (int j = 0; j <= 10; ++j) {
            p0 += spec.forcing[j] * traj.samples[i - 1].a[j];
            p1 += spec.forcing[j] * traj.samples[i].a[j];
        }
        work += 0.5 * h * (p0 + p1);
    }
    const double e0 = energy(traj.samples.front());
    const double e1 = energy(traj.samples.back());
    CHECK(std::abs(e1 - e0 - work) <= 1e-6 * (1.0 + e0));
}
