#pragma once

// Time integration of the truncated shell systems with event detection.
// Fixed-step classical RK4 or the adaptive Dormand-Prince 5(4) pair; events
// (positivity loss, Sobolev-norm threshold) are located by bisection on the
// accepted step bracketing the sign change.

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic/model.hpp"

namespace dyadic {

enum class StepMethod { RK4Fixed, RK45Adaptive };

struct IntegratorConfig {
    StepMethod method = StepMethod::RK45Adaptive;
    double dt = 1e-3;  // fixed-step size
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double dt_min = 1e-12;
    double dt_max = std::numeric_limits<double>::infinity();
    double t_end = 1.0;
    double sample_every = 0.0;  // <= 0 means (t_end - t_start) / 500
    std::uint64_t max_steps = std::numeric_limits<std::uint64_t>::max();
};

struct NormThresholdSpec {
    double s = 0.5;      // Sobolev index
    double limit = 0.0;  // trip when ||a||_s^2 + ||b||_s^2 >= limit
};

struct EventSpec {
    bool positivity_watch = false;
    std::optional<NormThresholdSpec> norm_threshold;
    // non-finite values always terminate the run
};

enum class TerminationReason { TimeEnd, NormThreshold, NonFinite, StepUnderflow, StepBudget };

std::string to_string(TerminationReason reason);

enum class EventKind { PositivityLoss, NormThreshold, NonFinite };

std::string to_string(EventKind kind);

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::PositivityLoss;
    std::string detail;
};

struct Trajectory {
    std::vector<ShellState> samples;  // strictly increasing times; first = initial state
    std::vector<Event> events;
    TerminationReason terminated_by = TerminationReason::TimeEnd;
    std::uint64_t n_steps = 0;
    std::uint64_t n_rejected = 0;
};

struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(int shell, const std::string& what)
        : std::runtime_error(what), shell_index(shell) {}
    int shell_index;
};

// One classical RK4 step; throws NonFiniteError if the result is not finite.
ShellState step_fixed(const ModelSpec& spec, const ShellState& state, double dt);

Trajectory integrate(const ModelSpec& spec, const ShellState& initial,
                     const IntegratorConfig& config, const EventSpec& events = {});

}  // namespace dyadic
