#include "dyadic/experiments.hpp"

#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dyadic/diagnostics.hpp"
#include "dyadic/linstab.hpp"
#include "dyadic/steady.hpp"

namespace dyadic::cli {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Small stream-backed JSON writer with fixed formatting; nlohmann's dump()
// prints shortest round-trip doubles, while the file contract asks for 17
// significant digits throughout.
class JsonWriter {
  public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    void begin() { os_ << "{"; depth_ = 1; first_.assign(1, true); }
    void end() { os_ << "\n}\n"; }

    void key(const std::string& k) {
        if (!first_.back()) os_ << ",";
        first_.back() = false;
        os_ << "\n" << indent() << "\"" << escape(k) << "\": ";
    }
    void value(double v) {
        if (std::isfinite(v)) os_ << fmt(v);
        else os_ << "null";
    }
    void value(const std::string& s) { os_ << "\"" << escape(s) << "\""; }
    void value(bool b) { os_ << (b ? "true" : "false"); }
    void value(std::uint64_t v) { os_ << v; }
    void value(int v) { os_ << v; }

    void begin_object() { os_ << "{"; depth_++; first_.push_back(true); }
    void end_object() {
        depth_--;
        os_ << "\n" << indent() << "}";
        first_.pop_back();
    }
    void begin_array() { os_ << "["; array_first_ = true; }
    void array_sep() {
        if (!array_first_) os_ << ", ";
        array_first_ = false;
    }
    void end_array() { os_ << "]"; }

  private:
    std::string indent() const { return std::string(2 * depth_, ' '); }
    static std::string escape(const std::string& s) {
        std::string out;
        for (char ch : s) {
            if (ch == '"' || ch == '\\') out += '\\';
            out += ch;
        }
        return out;
    }
    std::ostream& os_;
    int depth_ = 0;
    bool array_first_ = true;
    std::vector<bool> first_;
};

std::ofstream open_output(const RunConfig& config, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    const fs::path path = fs::path(config.output_dir) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + path.string());
    return os;
}

double trapezoid_forcing_work(const Trajectory& traj, const ModelSpec& spec) {
    double work = 0.0;
    auto power = [&spec](const ShellState& s) {
        double p = 0.0;
        for (int j = 0; j < spec.shell_count(); ++j) p += spec.forcing[j] * s.a[j];
        return p;
    };
    for (size_t i = 1; i < traj.samples.size(); ++i) {
        const double h = traj.samples[i].t - traj.samples[i - 1].t;
        work += 0.5 * h * (power(traj.samples[i]) + power(traj.samples[i - 1]));
    }
    return work;
}

struct SimulationArtifacts {
    ModelSpec spec;
    ShellState initial;
    Trajectory traj;
};

SimulationArtifacts run_integration(const RunConfig& config) {
    SimulationArtifacts art{build_model(config), {}, {}};
    art.initial = build_initial_state(config, art.spec);
    art.traj = integrate(art.spec, art.initial, build_integrator_config(config),
                         build_event_spec(config));
    return art;
}

void write_trajectory_csv(const RunConfig& config, const ModelSpec& spec,
                          const Trajectory& traj) {
    std::ofstream os = open_output(config, "trajectory.csv");
    os << "t";
    for (int j = 0; j <= spec.n_shells; ++j) os << ",a_" << j;
    if (spec.has_magnetic())
        for (int j = 0; j <= spec.n_shells; ++j) os << ",b_" << j;
    os << "\n";
    for (const ShellState& s : traj.samples) {
        os << fmt(s.t);
        for (double v : s.a) os << "," << fmt(v);
        if (spec.has_magnetic())
            for (double v : s.b) os << "," << fmt(v);
        os << "\n";
    }
}

void write_diagnostics_csv(const RunConfig& config, const ModelSpec& spec,
                           const Trajectory& traj, const MonitorReport& mon) {
    std::ofstream os = open_output(config, "diagnostics.csv");
    os << "t,E,Hc";
    for (double s : config.diagnostics_s) os << ",Hs_" << fmt(s);
    if (config.lyapunov) os << ",phi,psi";
    os << ",min_a,min_b,monotone_flag\n";
    for (size_t i = 0; i < traj.samples.size(); ++i) {
        const ShellState& s = traj.samples[i];
        os << fmt(s.t) << "," << fmt(energy(s)) << "," << fmt(cross_helicity(s));
        for (double si : config.diagnostics_s) {
            const double na = sobolev_norm(s.a, si, spec.lambda);
            const double nb = sobolev_norm(s.b, si, spec.lambda);
            os << "," << fmt(std::sqrt(na * na + nb * nb));
        }
        if (config.lyapunov) {
            const LyapunovReport rep = lyapunov(s, spec, *config.lyapunov);
            os << "," << fmt(rep.phi) << "," << fmt(rep.psi);
        }
        os << "," << fmt(mon.min_a[i]) << "," << fmt(mon.min_b[i]) << ","
           << (mon.rescaled_monotone[i] ? 1 : 0) << "\n";
    }
}

void write_summary_json(const RunConfig& config, const SimulationArtifacts& art,
                        bool blowup_extras) {
    const ModelSpec& spec = art.spec;
    const Trajectory& traj = art.traj;
    std::ofstream os = open_output(config, "summary.json");
    JsonWriter w(os);
    w.begin();
    w.key("model");
    w.value(to_string(spec.kind));
    w.key("terminated_by");
    w.value(to_string(traj.terminated_by));
    w.key("t_final");
    w.value(traj.samples.back().t);
    w.key("n_steps");
    w.value(static_cast<std::uint64_t>(traj.n_steps));
    w.key("n_rejected");
    w.value(static_cast<std::uint64_t>(traj.n_rejected));

    w.key("event_times");
    w.begin_array();
    for (const Event& e : traj.events) {
        w.array_sep();
        w.begin_object();
        w.key("kind");
        w.value(to_string(e.kind));
        w.key("t");
        w.value(e.t);
        w.key("detail");
        w.value(e.detail);
        w.end_object();
    }
    w.end_array();

    const double e0 = energy(traj.samples.front());
    const double e1 = energy(traj.samples.back());
    const double work = trapezoid_forcing_work(traj, spec);
    const bool forced = [&spec] {
        for (double f : spec.forcing)
            if (f != 0.0) return true;
        return false;
    }();
    // unforced: relative conservation defect; forced: balance residual
    // |E(t) - E(0) - int sum f_j a_j dt| relative to 1 + E(0)
    const double drift = forced ? std::abs(e1 - e0 - work) / (1.0 + std::abs(e0))
                                : std::abs(e1 - e0) / (1.0 + std::abs(e0));
    w.key("energy_initial");
    w.value(e0);
    w.key("energy_final");
    w.value(e1);
    w.key("forcing_work");
    w.value(work);
    w.key("energy_drift");
    w.value(drift);
    const double h0 = cross_helicity(traj.samples.front());
    const double h1 = cross_helicity(traj.samples.back());
    w.key("helicity_drift");
    w.value(std::abs(h1 - h0) / (1.0 + std::abs(h0)));

    if (config.lyapunov) {
        const LyapunovParams& p = *config.lyapunov;
        const RiccatiCheck chk = riccati_check(traj, spec, p);
        const LyapunovReport rep0 = lyapunov(traj.samples.front(), spec, p);
        w.key("riccati");
        w.begin_object();
        w.key("K");
        w.value(chk.K);
        w.key("valid");
        w.value(chk.params_valid);
        w.key("t_upper");
        if (rep0.t_upper) w.value(*rep0.t_upper);
        else w.value(std::numeric_limits<double>::quiet_NaN());
        w.key("violations");
        w.value(chk.violations_riccati);
        w.key("checked");
        w.value(chk.checked_riccati);
        w.key("flux_form_violations");
        w.value(chk.violations_flux);
        w.key("psi_initial");
        w.value(rep0.psi);
        w.key("phi_initial");
        w.value(rep0.phi);
        if (blowup_extras) {
            double t_cross = std::numeric_limits<double>::quiet_NaN();
            for (const ShellState& s : traj.samples) {
                const LyapunovReport rep = lyapunov(s, spec, p);
                if (rep.psi >= 10.0 * rep0.psi) {
                    t_cross = s.t;
                    break;
                }
            }
            w.key("t_psi_10x");
            w.value(t_cross);
        }
        w.end_object();
    }
    w.end();
}

}  // namespace

int run_simulate(const RunConfig& config) {
    try {
        const SimulationArtifacts art = run_integration(config);
        const MonitorReport mon = monitors(art.traj, art.spec);
        write_trajectory_csv(config, art.spec, art.traj);
        write_diagnostics_csv(config, art.spec, art.traj, mon);
        write_summary_json(config, art, false);
        std::cout << "simulate: " << to_string(art.traj.terminated_by) << " at t="
                  << fmt(art.traj.samples.back().t) << ", " << art.traj.n_steps << " steps, "
                  << art.traj.samples.size() << " samples -> " << config.output_dir << "\n";
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "simulate: error: " << err.what() << "\n";
        return 1;
    }
}

int run_blowup(const RunConfig& config) {
    if (!config.lyapunov) {
        std::cerr << "blowup: error: lyapunov=s,gamma,c0 is required\n";
        return 1;
    }
    RunConfig cfg = config;
    if (!cfg.norm_s) cfg.norm_s = cfg.lyapunov->s;
    if (!cfg.norm_limit) cfg.norm_limit = 1e8;
    try {
        const SimulationArtifacts art = run_integration(cfg);
        const MonitorReport mon = monitors(art.traj, art.spec);
        write_trajectory_csv(cfg, art.spec, art.traj);
        write_diagnostics_csv(cfg, art.spec, art.traj, mon);
        write_summary_json(cfg, art, true);
        std::cout << "blowup: " << to_string(art.traj.terminated_by) << " at t="
                  << fmt(art.traj.samples.back().t) << ", " << art.traj.n_steps << " steps -> "
                  << cfg.output_dir << "\n";
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "blowup: error: " << err.what() << "\n";
        return 1;
    }
}

int run_steady(const RunConfig& config) {
    try {
        const ModelSpec spec = build_model(config);
        if (!(config.resolved_f0() > 0.0))
            throw ConfigError("steady: requires f0 > 0 (or f0=auto)");
        if (config.initial.kind != InitialKind::FixedPoint &&
            config.initial.kind != InitialKind::FixedPointNoise)
            throw ConfigError("steady: initial must be fixedpoint:A0,B0 (optionally +noise)");
        const ShellState candidate = build_initial_state(config, spec);
        const ResidualReport res = residual(spec, candidate);
        const ShellRatios ratios = shell_ratios(spec, candidate);

        double ratio_max_dev = 0.0;
        for (double r : ratios.a_ratios)
            if (std::isfinite(r)) ratio_max_dev = std::max(ratio_max_dev, std::abs(r - 1.0));
        for (double r : ratios.b_ratios)
            if (std::isfinite(r)) ratio_max_dev = std::max(ratio_max_dev, std::abs(r - 1.0));

        // profile identity a_j^2 +/- b_j^2 = lambda^{theta/3} f0 lambda_j^{-2theta/3}
        const double f0 = config.resolved_f0();
        const double sign = (spec.kind == ModelKind::MhdBidirectional) ? -1.0 : 1.0;
        double profile_dev = 0.0;
        for (int j = 0; j <= spec.n_shells; ++j) {
            const double expected = std::pow(spec.lambda, spec.theta / 3.0) * f0 *
                                    spec.lambda_pow(-2.0 * spec.theta / 3.0, j);
            const double got =
                candidate.a[j] * candidate.a[j] + sign * candidate.b[j] * candidate.b[j];
            profile_dev = std::max(profile_dev, std::abs(got - expected) / expected);
        }

        std::ofstream os = open_output(config, "steady.json");
        JsonWriter w(os);
        w.begin();
        w.key("model");
        w.value(to_string(spec.kind));
        w.key("A0");
        w.value(config.initial.A0);
        w.key("B0");
        w.value(config.initial.B0);
        w.key("f0");
        w.value(f0);
        w.key("n_shells");
        w.value(spec.n_shells);
        w.key("max_interior_residual");
        w.value(res.max_interior_abs);
        w.key("boundary_defect_a");
        w.value(res.boundary_defect_a);
        w.key("boundary_defect_b");
        w.value(res.boundary_defect_b);
        w.key("shell_ratio_max_deviation");
        w.value(ratio_max_dev);
        w.key("profile_identity_max_rel_dev");
        w.value(profile_dev);
        if (config.newton) {
            NewtonOptions opts;
            opts.tol = config.newton_tol;
            const NewtonResult nr = newton_steady(spec, candidate, opts);
            w.key("newton");
            w.begin_object();
            w.key("converged");
            w.value(nr.converged);
            w.key("iterations");
            w.value(nr.iterations);
            w.key("residual_norm");
            w.value(nr.residual_norm);
            w.key("condition_estimate");
            w.value(nr.condition_estimate);
            w.end_object();
        }
        w.end();
        std::cout << "steady: max interior residual " << fmt(res.max_interior_abs) << " -> "
                  << config.output_dir << "\n";
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "steady: error: " << err.what() << "\n";
        return 1;
    }
}

int run_linstab(const RunConfig& config) {
    try {
        const double theta = config.resolved_theta();
        const EigenChannel channel =
            (config.channel == "magnetic") ? EigenChannel::Magnetic : EigenChannel::Velocity;
        const double s = config.diagnostics_s.empty() ? theta / 3.0 : config.diagnostics_s[0];
        const ScanReport report = eigen_scan(channel, config.scan_min, config.scan_max,
                                             config.scan_step, config.lambda, theta, s,
                                             config.scan_n, config.a0_sign);
        {
            std::ofstream os = open_output(config, "scan.csv");
            os << "value,growth_functional,admissible,classification\n";
            for (const ScanRow& row : report.rows) {
                std::string cls = to_string(row.classification);
                if (channel == EigenChannel::Magnetic && row.time_unstable) cls += ":unstable";
                os << fmt(row.value) << "," << fmt(row.growth) << ","
                   << (row.admissible ? 1 : 0) << "," << cls << "\n";
            }
        }
        {
            std::ofstream os = open_output(config, "scan_summary.json");
            JsonWriter w(os);
            w.begin();
            w.key("channel");
            w.value(std::string(channel == EigenChannel::Magnetic ? "magnetic" : "velocity"));
            w.key("a0");
            w.value(config.a0_sign);
            w.key("n_grid");
            w.value(static_cast<int>(report.rows.size()));
            w.key("admissible_values");
            w.begin_array();
            for (double v : report.admissible_values) {
                w.array_sep();
                w.value(v);
            }
            w.end_array();
            w.key("any_in_forbidden_halfline");
            w.value(report.any_in_forbidden_halfline);
            w.key("inconclusive");
            w.value(report.inconclusive);
            w.end();
        }
        std::cout << "linstab: " << report.rows.size() << " grid points, "
                  << report.admissible_values.size() << " admissible -> " << config.output_dir
                  << "\n";
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "linstab: error: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace dyadic::cli
