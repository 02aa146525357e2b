#pragma once

// Run configuration for the command-line front end. Configs are flat
// key=value text or a JSON object with the same keys; unknown keys are
// rejected and every diagnostic names the offending key (and line, for the
// flat format).

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/diagnostics.hpp"
#include "dyadic/integrator.hpp"
#include "dyadic/model.hpp"

namespace dyadic::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InitialKind { Explicit, Power, FixedPoint, FixedPointNoise };

struct InitialSpec {
    InitialKind kind = InitialKind::Power;
    double power_alpha = 0.0;                  // power:alpha -> a_j = b_j = lambda_j^{-alpha}
    std::vector<double> explicit_a, explicit_b;  // explicit:a0,a1,.../b0,b1,...
    double A0 = 1.0, B0 = 0.0;                 // fixedpoint[:A0,B0]
    double noise_sigma = 0.0;                  // fixedpoint+noise:[A0,B0,]sigma[,seed]
    std::optional<std::uint64_t> noise_seed;   // absent: the top-level seed key applies
    std::string raw;  // original value, for serialization
};

struct RunConfig {
    std::string model = "mhd_forward";
    double lambda = 2.0;
    std::optional<double> theta;  // exactly one of theta / delta
    std::optional<double> delta;
    int shells = 24;
    std::optional<double> f0;  // absent = unforced; "auto" = lambda^{-theta/3}
    bool f0_auto = false;
    InitialSpec initial;
    double t_end = 1.0;
    std::string method = "rk45";
    double dt = 1e-3;
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double dt_min = 1e-12;
    std::optional<double> dt_max;
    std::optional<double> sample_every;  // default t_end / 500
    std::uint64_t max_steps = 0;         // 0 = unlimited
    std::vector<double> diagnostics_s;   // Sobolev indices for diagnostics.csv
    std::optional<LyapunovParams> lyapunov;
    std::optional<double> norm_s;
    std::optional<double> norm_limit;
    bool positivity_watch = true;
    std::string output_dir = ".";
    std::uint64_t seed = 0;

    // linstab
    std::string channel = "velocity";
    int a0_sign = 1;
    double scan_min = 0.0, scan_max = 10.0, scan_step = 0.01;
    int scan_n = 200;

    // steady
    bool newton = false;
    double newton_tol = 1e-12;

    double resolved_theta() const;  // from theta or delta
    double resolved_f0() const;     // 0 when unforced; auto = lambda^{-theta/3}
};

// Accepts flat key=value text (comments with '#', blank lines ignored) or a
// JSON object when the first non-space character is '{'.
RunConfig parse_config(const std::string& text);

// Flat key=value rendering; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

// Applies "key=value" command-line overrides on top of a parsed config.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

ModelKind parse_model_kind(const std::string& name);

ModelSpec build_model(const RunConfig& config);
ShellState build_initial_state(const RunConfig& config, const ModelSpec& spec);
IntegratorConfig build_integrator_config(const RunConfig& config);
EventSpec build_event_spec(const RunConfig& config);

}  // namespace dyadic::cli
