// dyadlab: batch front end for the dyadic shell-model laboratory.
//
// Subcommands: simulate, steady, linstab, blowup. Each accepts --config PATH
// (flat key=value or JSON) plus per-key override flags with the same names as
// the config keys, e.g. --lambda 2 --shells 24 --initial power:0.667.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyadic/config.hpp"
#include "dyadic/experiments.hpp"

namespace {

const std::vector<std::string> kConfigKeys = {
    "model",      "lambda",     "theta",       "delta",     "shells",
    "f0",         "initial",    "t_end",       "method",    "dt",
    "abs_tol",    "rel_tol",    "dt_min",      "dt_max",    "sample_every",
    "max_steps",  "diagnostics", "lyapunov",   "norm_s",    "norm_limit",
    "positivity_watch", "output_dir", "seed",  "channel",   "a0",
    "scan_min",   "scan_max",   "scan_step",   "scan_n",    "newton",
    "newton_tol",
};

struct SubcommandArgs {
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

void attach_options(CLI::App* sub, SubcommandArgs& args) {
    sub->add_option("--config", args.config_path, "configuration file (key=value or JSON)");
    for (const std::string& key : kConfigKeys)
        sub->add_option("--" + key, args.overrides[key], "override config key '" + key + "'");
}

int load_and_run(const SubcommandArgs& args,
                 int (*runner)(const dyadic::cli::RunConfig&)) {
    try {
        std::string text;
        if (!args.config_path.empty()) {
            std::ifstream in(args.config_path);
            if (!in) {
                std::cerr << "error: cannot read config file '" << args.config_path << "'\n";
                return 2;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        dyadic::cli::RunConfig config = dyadic::cli::parse_config(text);
        for (const auto& [key, value] : args.overrides)
            if (!value.empty()) dyadic::cli::apply_override(config, key, value);
        return runner(config);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadlab: numerical laboratory for dyadic Euler/MHD shell models"};
    app.require_subcommand(1);

    SubcommandArgs sim_args, steady_args, lin_args, blow_args;
    CLI::App* sim = app.add_subcommand("simulate", "integrate a shell system and write time series");
    attach_options(sim, sim_args);
    CLI::App* steady = app.add_subcommand("steady", "construct and verify an explicit fixed point");
    attach_options(steady, steady_args);
    CLI::App* lin = app.add_subcommand("linstab", "eigenvalue scan of a linearized channel");
    attach_options(lin, lin_args);
    CLI::App* blow = app.add_subcommand("blowup", "blow-up run with Lyapunov/Riccati monitoring");
    attach_options(blow, blow_args);

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return load_and_run(sim_args, dyadic::cli::run_simulate);
    if (steady->parsed()) return load_and_run(steady_args, dyadic::cli::run_steady);
    if (lin->parsed()) return load_and_run(lin_args, dyadic::cli::run_linstab);
    if (blow->parsed()) return load_and_run(blow_args, dyadic::cli::run_blowup);
    return 2;
}
