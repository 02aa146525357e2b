#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dyadic/config.hpp"
#include "dyadic/experiments.hpp"

using namespace dyadic;
using namespace dyadic::cli;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "dyadlab_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("flat config parsing with delta mapping") {
    const std::string text =
        "model=mhd_forward\nlambda=2\ndelta=3\nshells=24\nf0=1\ninitial=power:0.667\nt_end=2\n";
    const RunConfig c = parse_config(text);
    CHECK(c.model == "mhd_forward");
    CHECK(c.lambda == 2.0);
    CHECK(c.resolved_theta() == doctest::Approx(1.0));
    CHECK(c.shells == 24);
    CHECK(c.resolved_f0() == 1.0);
    CHECK(c.initial.kind == InitialKind::Power);
    CHECK(c.initial.power_alpha == doctest::Approx(0.667));
    CHECK(c.t_end == 2.0);
    // documented defaults
    CHECK(c.seed == 0);
    CHECK_FALSE(c.sample_every.has_value());
}

TEST_CASE("config rejects lambda <= 1 naming the constraint and the line") {
    try {
        parse_config("model=euler\nlambda=1\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& err) {
        const std::string what = err.what();
        CHECK(what.find("lambda > 1") != std::string::npos);
        CHECK(what.find("line 2") != std::string::npos);
    }
}

TEST_CASE("config error diagnostics") {
    CHECK_THROWS_AS(parse_config("bogus_key=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model=euler\nmodel=euler\n"), ConfigError);  // duplicate
    CHECK_THROWS_AS(parse_config("theta=1\ndelta=3\n"), ConfigError);          // exclusive
    CHECK_THROWS_AS(parse_config("shells=0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("t_end=-1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("initial=power\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("initial=weird:1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lyapunov=0.5,1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("norm_limit=10\n"), ConfigError);  // needs norm_s
    CHECK_THROWS_AS(parse_config("method=euler\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
}

TEST_CASE("f0 auto resolves to lambda^{-theta/3}") {
    const RunConfig c = parse_config("model=mhd_forward\ntheta=1\nf0=auto\n");
    CHECK(c.resolved_f0() == doctest::Approx(std::pow(2.0, -1.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("JSON config equivalence and unknown-key rejection") {
    const std::string flat = "model=mhd_bidirectional\nlambda=2.5\ntheta=1.5\nshells=8\n"
                             "f0=0.25\ninitial=fixedpoint:1,0\nt_end=0.5\nseed=7\n"
                             "diagnostics=0.5,1\n";
    const std::string json = R"({
      "model": "mhd_bidirectional", "lambda": 2.5, "theta": 1.5, "shells": 8,
      "f0": 0.25, "initial": "fixedpoint:1,0", "t_end": 0.5, "seed": 7,
      "diagnostics": [0.5, 1]
    })";
    const RunConfig a = parse_config(flat);
    const RunConfig b = parse_config(json);
    CHECK(a.model == b.model);
    CHECK(a.lambda == b.lambda);
    CHECK(a.resolved_theta() == b.resolved_theta());
    CHECK(a.shells == b.shells);
    CHECK(a.resolved_f0() == b.resolved_f0());
    CHECK(a.initial.raw == b.initial.raw);
    CHECK(a.seed == b.seed);
    REQUIRE(a.diagnostics_s.size() == b.diagnostics_s.size());
    CHECK(a.diagnostics_s[0] == b.diagnostics_s[0]);
    CHECK_THROWS_AS(parse_config(R"({"model": "euler", "bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("serialize/parse round trip") {
    RunConfig c = parse_config(
        "model=mhd_forward\nlambda=2\ndelta=3\nshells=12\nf0=auto\n"
        "initial=fixedpoint+noise:0.6,0.8,0.01,42\nt_end=1.5\nmethod=rk4\ndt=0.001\n"
        "abs_tol=1e-9\nrel_tol=1e-8\ndt_min=1e-13\ndt_max=0.5\nsample_every=0.01\n"
        "max_steps=100000\ndiagnostics=0.5,1\nlyapunov=0.5,1,0.1\nnorm_s=0.5\n"
        "norm_limit=1e8\npositivity_watch=false\noutput_dir=out\nseed=3\n"
        "channel=magnetic\na0=-1\nscan_min=-2\nscan_max=2\nscan_step=0.1\nscan_n=150\n"
        "newton=true\nnewton_tol=1e-11\n");
    const RunConfig r = parse_config(serialize_config(c));
    CHECK(serialize_config(r) == serialize_config(c));
    CHECK(r.delta.has_value());
    CHECK(r.f0_auto);
    CHECK(r.initial.noise_seed == 42);
    CHECK(r.lyapunov->c0 == 0.1);
    CHECK(r.max_steps == 100000);
    CHECK(r.a0_sign == -1);
}

TEST_CASE("overrides reuse the key setters") {
    RunConfig c = parse_config("model=euler\ntheta=1\nshells=4\n");
    apply_override(c, "shells", "6");
    CHECK(c.shells == 6);
    apply_override(c, "f0", "auto");
    CHECK(c.f0_auto);
    CHECK_THROWS_AS(apply_override(c, "lambda", "0.5"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "nonsense", "1"), ConfigError);
}

TEST_CASE("initial state construction") {
    RunConfig c = parse_config("model=mhd_forward\ntheta=1\nshells=3\ninitial=power:0.5\n");
    const ModelSpec spec = build_model(c);
    const ShellState s = build_initial_state(c, spec);
    for (int j = 0; j <= 3; ++j) {
        CHECK(s.a[j] == doctest::Approx(std::pow(2.0, -0.5 * j)).epsilon(1e-15));
        CHECK(s.b[j] == s.a[j]);
    }

    RunConfig ce = parse_config(
        "model=mhd_forward\ntheta=1\nshells=2\ninitial=explicit:1,0.5,0.25/0.1,0.2,0.3\n");
    const ShellState se = build_initial_state(ce, build_model(ce));
    CHECK(se.a[1] == 0.5);
    CHECK(se.b[2] == 0.3);
    RunConfig bad = parse_config("model=euler\ntheta=1\nshells=4\ninitial=explicit:1,2\n");
    CHECK_THROWS_AS(build_initial_state(bad, build_model(bad)), ConfigError);

    // fixedpoint constraint validation per kind
    RunConfig fp_bad =
        parse_config("model=mhd_forward\ntheta=1\nshells=4\nf0=1\ninitial=fixedpoint:1,1\n");
    CHECK_THROWS_AS(build_initial_state(fp_bad, build_model(fp_bad)), ConfigError);
    RunConfig fp_ok = parse_config(
        "model=mhd_bidirectional\ntheta=1\nshells=4\nf0=auto\ninitial=fixedpoint:1.25,0.75\n");
    const ShellState sfp = build_initial_state(fp_ok, build_model(fp_ok));
    CHECK(sfp.a[0] == doctest::Approx(1.25).epsilon(1e-12));

    // noise is seeded and deterministic
    RunConfig n1 = parse_config(
        "model=mhd_forward\ntheta=1\nshells=6\nf0=auto\ninitial=fixedpoint+noise:1,0,0.01,5\n");
    const ShellState sn1 = build_initial_state(n1, build_model(n1));
    const ShellState sn2 = build_initial_state(n1, build_model(n1));
    CHECK(sn1.a == sn2.a);
    RunConfig n3 = parse_config(
        "model=mhd_forward\ntheta=1\nshells=6\nf0=auto\ninitial=fixedpoint+noise:1,0,0.01,6\n");
    const ShellState sn3 = build_initial_state(n3, build_model(n3));
    CHECK(sn1.a != sn3.a);

    // without an explicit noise seed, the top-level seed key applies
    RunConfig n4 = parse_config(
        "model=mhd_forward\ntheta=1\nshells=6\nf0=auto\ninitial=fixedpoint+noise:0.01\nseed=5\n");
    const ShellState sn4 = build_initial_state(n4, build_model(n4));
    RunConfig n5 = parse_config(
        "model=mhd_forward\ntheta=1\nshells=6\nf0=auto\ninitial=fixedpoint+noise:0.01,5\n");
    const ShellState sn5 = build_initial_state(n5, build_model(n5));
    CHECK(sn4.a == sn5.a);
    apply_override(n4, "seed", "9");
    const ShellState sn6 = build_initial_state(n4, build_model(n4));
    CHECK(sn4.a != sn6.a);
}

TEST_CASE("simulate writes deterministic well-formed files") {
    const auto dir = fresh_dir("simulate");
    RunConfig c = parse_config(
        "model=mhd_forward\ntheta=1\nshells=8\nf0=1\ninitial=power:0.667\nt_end=0.2\n"
        "sample_every=0.02\ndiagnostics=0.5\nlyapunov=0.5,1,0.1\nseed=0\n");
    c.output_dir = dir.string();
    REQUIRE(run_simulate(c) == 0);
    const std::string traj = read_file(dir / "trajectory.csv");
    const std::string diag = read_file(dir / "diagnostics.csv");
    const std::string summary = read_file(dir / "summary.json");
    CHECK(traj.rfind("t,a_0", 0) == 0);
    CHECK(traj.find(",b_8") != std::string::npos);
    CHECK(diag.rfind("t,E,Hc,Hs_0.5,phi,psi,min_a,min_b,monotone_flag", 0) == 0);
    CHECK(summary.find("\"terminated_by\": \"time_end\"") != std::string::npos);
    CHECK(summary.find("\"riccati\"") != std::string::npos);
    // 11 samples + header
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 12);

    // byte-identical rerun
    REQUIRE(run_simulate(c) == 0);
    CHECK(read_file(dir / "trajectory.csv") == traj);
    CHECK(read_file(dir / "diagnostics.csv") == diag);
    CHECK(read_file(dir / "summary.json") == summary);
}

TEST_CASE("euler trajectory omits b columns") {
    const auto dir = fresh_dir("euler_csv");
    RunConfig c = parse_config(
        "model=euler\ntheta=1\nshells=4\nf0=1\ninitial=power:0.667\nt_end=0.1\n"
        "sample_every=0.05\n");
    c.output_dir = dir.string();
    REQUIRE(run_simulate(c) == 0);
    const std::string traj = read_file(dir / "trajectory.csv");
    CHECK(traj.find("b_0") == std::string::npos);
}

TEST_CASE("steady subcommand reports residual split") {
    const auto dir = fresh_dir("steady");
    RunConfig c = parse_config(
        "model=mhd_forward\ntheta=1\nshells=16\nf0=auto\ninitial=fixedpoint:0.6,0.8\n"
        "newton=true\n");
    c.output_dir = dir.string();
    REQUIRE(run_steady(c) == 0);
    const std::string out = read_file(dir / "steady.json");
    CHECK(out.find("\"max_interior_residual\"") != std::string::npos);
    CHECK(out.find("\"boundary_defect_a\"") != std::string::npos);
    CHECK(out.find("\"newton\"") != std::string::npos);
    // interior residual printed as a tiny number
    const auto pos = out.find("\"max_interior_residual\": ");
    const double v = std::strtod(out.c_str() + pos + 26, nullptr);
    CHECK(v <= 1e-12);
}

TEST_CASE("linstab subcommand writes the scan") {
    const auto dir = fresh_dir("linstab");
    RunConfig c = parse_config(
        "model=mhd_forward\ntheta=1\nchannel=velocity\na0=1\nscan_min=0\nscan_max=2\n"
        "scan_step=0.5\nscan_n=150\n");
    c.output_dir = dir.string();
    REQUIRE(run_linstab(c) == 0);
    const std::string scan = read_file(dir / "scan.csv");
    CHECK(scan.rfind("value,growth_functional,admissible,classification", 0) == 0);
    CHECK(std::count(scan.begin(), scan.end(), '\n') == 6);  // header + 5 rows
    const std::string summary = read_file(dir / "scan_summary.json");
    CHECK(summary.find("\"admissible_values\": []") != std::string::npos);
}

TEST_CASE("blowup requires lyapunov parameters") {
    RunConfig c = parse_config("model=mhd_forward\ntheta=1\nshells=6\nf0=1\n");
    CHECK(run_blowup(c) == 1);
}

TEST_CASE("blowup writes the riccati block and psi crossing") {
    const auto dir = fresh_dir("blowup");
    RunConfig c = parse_config(
        "model=mhd_forward\ntheta=1\nshells=12\nf0=1\ninitial=power:0.667\nt_end=4\n"
        "sample_every=0.01\nlyapunov=0.5,1,0.1\nnorm_s=0.5\nnorm_limit=1e4\n");
    c.output_dir = dir.string();
    REQUIRE(run_blowup(c) == 0);
    const std::string summary = read_file(dir / "summary.json");
    CHECK(summary.find("\"riccati\"") != std::string::npos);
    CHECK(summary.find("\"t_psi_10x\"") != std::string::npos);
    CHECK(summary.find("\"flux_form_violations\": 0") != std::string::npos);
    CHECK(summary.find("norm_threshold") != std::string::npos);
}

TEST_CASE("run exits zero on step underflow near blow-up") {
    const auto dir = fresh_dir("underflow");
    RunConfig c = parse_config(
        "model=mhd_forward\ntheta=1\nshells=10\nf0=1\ninitial=power:0.3\nt_end=50\n"
        "sample_every=0.5\ndt_min=1e-3\nabs_tol=1e-12\nrel_tol=1e-12\n");
    c.output_dir = dir.string();
    CHECK(run_simulate(c) == 0);
    const std::string summary = read_file(dir / "summary.json");
    CHECK(summary.find("step_underflow") != std::string::npos);
}
