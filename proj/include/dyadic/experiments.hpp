#pragma once

// Batch experiment drivers behind the CLI subcommands. Each run writes only
// inside config.output_dir: time series as CSV, reports as JSON, numbers with
// 17 significant digits so identical configs produce byte-identical files.

#include <string>

#include "dyadic/config.hpp"

namespace dyadic::cli {

// trajectory.csv + diagnostics.csv + summary.json
int run_simulate(const RunConfig& config);

// steady.json (constructed fixed point, residual split, ratios, optional
// Newton cross-check)
int run_steady(const RunConfig& config);

// scan.csv + scan_summary.json
int run_linstab(const RunConfig& config);

// simulate with mandatory Lyapunov parameters; summary.json additionally
// carries the Riccati report and crossing times
int run_blowup(const RunConfig& config);

}  // namespace dyadic::cli
