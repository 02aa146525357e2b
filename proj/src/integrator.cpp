#include "dyadic/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "dyadic/ode.hpp"

namespace dyadic {

std::string to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::TimeEnd: return "time_end";
        case TerminationReason::NormThreshold: return "norm_threshold";
        case TerminationReason::NonFinite: return "non_finite";
        case TerminationReason::StepUnderflow: return "step_underflow";
        case TerminationReason::StepBudget: return "step_budget";
    }
    return "unknown";
}

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::PositivityLoss: return "positivity_loss";
        case EventKind::NormThreshold: return "norm_threshold";
        case EventKind::NonFinite: return "non_finite";
    }
    return "unknown";
}

namespace {

int first_non_finite_shell(const ModelSpec& spec, std::span<const double> y) {
    const int count = spec.shell_count();
    for (int i = 0; i < static_cast<int>(y.size()); ++i)
        if (!std::isfinite(y[i])) return i % count;
    return -1;
}

// Smallest watched component; positivity is lost when this reaches zero.
// For the Euler kind only the velocity shells are watched (b is identically
// zero by construction).
double positivity_margin(const ModelSpec& spec, std::span<const double> y, int* arg_shell,
                         bool* arg_is_b) {
    const int count = spec.shell_count();
    double m = y[0];
    int shell = 0;
    bool is_b = false;
    for (int j = 1; j < count; ++j)
        if (y[j] < m) { m = y[j]; shell = j; }
    if (spec.has_magnetic()) {
        for (int j = 0; j < count; ++j)
            if (y[count + j] < m) { m = y[count + j]; shell = j; is_b = true; }
    }
    if (arg_shell) *arg_shell = shell;
    if (arg_is_b) *arg_is_b = is_b;
    return m;
}

double sobolev_square_sum(const ModelSpec& spec, std::span<const double> y, double s) {
    const int count = spec.shell_count();
    const double w_ratio = std::pow(spec.lambda, 2.0 * s);
    double sum = 0.0;
    double w = 1.0;
    for (int j = 0; j < count; ++j) {
        double sq = y[j] * y[j];
        if (spec.has_magnetic()) sq += y[count + j] * y[count + j];
        sum += w * sq;
        w *= w_ratio;
    }
    return sum;
}

struct EventProbe {
    // margin > 0 before the event, <= 0 at/after it
    std::function<double(std::span<const double>)> margin;
};

// Locates the earliest crossing of probe.margin in (t_lo, t_hi] to within
// dt_min by bisection, re-stepping with RK4 from the left bracket state.
double bisect_event(const ModelSpec& spec, const std::vector<double>& y_lo, double t_lo,
                    double t_hi, double dt_min, const EventProbe& probe, RkWorkspace& ws,
                    std::vector<double>& y_event) {
    OdeRhs f = [&spec](double, std::span<const double> y, std::span<double> dy) {
        rhs_packed(spec, y, dy);
    };
    std::vector<double> yl = y_lo;
    std::vector<double> ym(y_lo.size());
    double tl = t_lo, th = t_hi;
    y_event.resize(y_lo.size());
    // keep a state for the right end of the bracket
    {
        rk4_step(f, tl, th - tl, yl, y_event, ws);
    }
    const double width_floor = std::max(dt_min, 1e-14 * (std::abs(t_hi) + 1.0));
    while (th - tl > width_floor) {
        const double tm = 0.5 * (tl + th);
        rk4_step(f, tl, tm - tl, yl, ym, ws);
        if (!all_finite(ym) || probe.margin(ym) <= 0.0) {
            th = tm;
            y_event = ym;
        } else {
            tl = tm;
            yl.swap(ym);
        }
    }
    return th;
}

}  // namespace

ShellState step_fixed(const ModelSpec& spec, const ShellState& state, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_fixed requires dt > 0");
    if (!state_finite(state)) throw std::invalid_argument("step_fixed requires a finite state");
    const size_t n = static_cast<size_t>(spec.packed_size());
    std::vector<double> y(n), y_new(n);
    pack_state(spec, state, y);
    RkWorkspace ws;
    OdeRhs f = [&spec](double, std::span<const double> yy, std::span<double> dy) {
        rhs_packed(spec, yy, dy);
    };
    rk4_step(f, state.t, dt, y, y_new, ws);
    if (!all_finite(y_new))
        throw NonFiniteError(first_non_finite_shell(spec, y_new),
                             "non-finite value produced by RK4 step");
    return unpack_state(spec, y_new, state.t + dt);
}

Trajectory integrate(const ModelSpec& spec, const ShellState& initial,
                     const IntegratorConfig& config, const EventSpec& events) {
    const double t0 = initial.t;
    if (!(config.t_end > t0)) throw std::invalid_argument("t_end must exceed the start time");
    if (config.method == StepMethod::RK4Fixed && !(config.dt > 0.0))
        throw std::invalid_argument("fixed-step integration requires dt > 0");
    if (!(config.abs_tol > 0.0) || !(config.rel_tol >= 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (!(config.dt_min > 0.0) || config.dt_min > config.dt_max)
        throw std::invalid_argument("require 0 < dt_min <= dt_max");
    if (events.norm_threshold && !(events.norm_threshold->limit > 0.0))
        throw std::invalid_argument("norm threshold limit must be > 0");
    if (!state_finite(initial)) throw std::invalid_argument("initial state must be finite");

    const double horizon = config.t_end - t0;
    const double sample_every = config.sample_every > 0.0 ? config.sample_every : horizon / 500.0;

    const size_t n = static_cast<size_t>(spec.packed_size());
    std::vector<double> y(n), y_new(n), y_event(n);
    pack_state(spec, initial, y);
    RkWorkspace ws;
    OdeRhs f = [&spec](double, std::span<const double> yy, std::span<double> dy) {
        rhs_packed(spec, yy, dy);
    };

    Trajectory traj;
    traj.samples.push_back(initial);

    bool positivity_armed = events.positivity_watch;
    EventProbe pos_probe{[&spec](std::span<const double> yy) {
        return positivity_margin(spec, yy, nullptr, nullptr);
    }};
    EventProbe norm_probe{[&spec, &events](std::span<const double> yy) {
        return events.norm_threshold->limit - sobolev_square_sum(spec, yy, events.norm_threshold->s);
    }};

    auto push_sample = [&](double t, std::span<const double> yy) {
        if (!traj.samples.empty() && !(t > traj.samples.back().t)) return;
        traj.samples.push_back(unpack_state(spec, yy, t));
    };

    // events present in the initial state
    if (positivity_armed && pos_probe.margin(y) <= 0.0) {
        int shell = 0;
        bool is_b = false;
        positivity_margin(spec, y, &shell, &is_b);
        traj.events.push_back({t0, EventKind::PositivityLoss,
                               std::string(is_b ? "b" : "a") + "[" + std::to_string(shell) + "]"});
        positivity_armed = false;
    }
    if (events.norm_threshold && norm_probe.margin(y) <= 0.0) {
        traj.events.push_back({t0, EventKind::NormThreshold, "initial state beyond limit"});
        traj.terminated_by = TerminationReason::NormThreshold;
        return traj;
    }

    double t = t0;
    long sample_index = 1;
    double next_sample = t0 + sample_every;
    const double t_eps = 1e-12 * (std::abs(config.t_end) + 1.0);

    // initial adaptive step size guess, refined by rejection
    double dt_ctrl = config.dt;
    if (config.method == StepMethod::RK45Adaptive) {
        ws.resize(n);
        f(t, y, ws.k1);
        const double ynorm = euclidean_norm(y);
        const double fnorm = euclidean_norm(ws.k1);
        double guess = 0.01 * (ynorm + config.abs_tol) / (fnorm + 1e-300);
        dt_ctrl = std::clamp(std::min({horizon, sample_every, guess}), config.dt_min,
                             config.dt_max);
    }

    while (true) {
        if (traj.n_steps >= config.max_steps) {
            traj.terminated_by = TerminationReason::StepBudget;
            push_sample(t, y);
            return traj;
        }
        double t_target = std::min({t + dt_ctrl, next_sample, config.t_end});
        double dt_exec = t_target - t;
        const bool clipped = t_target < t + dt_ctrl - t_eps;

        bool accepted = false;
        if (config.method == StepMethod::RK4Fixed) {
            rk4_step(f, t, dt_exec, y, y_new, ws);
            if (!all_finite(y_new)) {
                const int shell = first_non_finite_shell(spec, y_new);
                traj.events.push_back(
                    {t, EventKind::NonFinite, "shell " + std::to_string(shell)});
                traj.terminated_by = TerminationReason::NonFinite;
                push_sample(t, y);
                return traj;
            }
            accepted = true;
        } else {
            const double err = dopri5_step(f, t, dt_exec, y, y_new, ws);
            const double tol = config.abs_tol + config.rel_tol * euclidean_norm(y);
            const bool finite = all_finite(y_new) && std::isfinite(err);
            if (finite && err <= tol) {
                accepted = true;
                double factor = (err > 0.0) ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
                factor = std::clamp(factor, 0.2, 5.0);
                const double dt_belief = std::clamp(dt_exec * factor, config.dt_min, config.dt_max);
                dt_ctrl = clipped ? std::max(dt_ctrl, dt_belief) : dt_belief;
            } else {
                traj.n_rejected++;
                double factor = finite ? std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 5.0) : 0.2;
                const double dt_shrunk = dt_exec * factor;
                if (dt_shrunk < config.dt_min) {
                    if (!finite) {
                        const int shell = first_non_finite_shell(spec, y_new);
                        traj.events.push_back(
                            {t, EventKind::NonFinite, "shell " + std::to_string(shell)});
                        traj.terminated_by = TerminationReason::NonFinite;
                    } else {
                        traj.terminated_by = TerminationReason::StepUnderflow;
                    }
                    push_sample(t, y);
                    return traj;
                }
                dt_ctrl = dt_shrunk;
                continue;
            }
        }

        traj.n_steps++;
        const double t_new = t_target;

        if (accepted) {
            // norm-threshold event: terminal
            if (events.norm_threshold && norm_probe.margin(y_new) <= 0.0) {
                double te = bisect_event(spec, y, t, t_new, config.dt_min, norm_probe, ws,
                                         y_event);
                // positivity may trip earlier inside the same step
                if (positivity_armed && pos_probe.margin(y_event) <= 0.0) {
                    std::vector<double> y_pos;
                    double tp = bisect_event(spec, y, t, te, config.dt_min, pos_probe, ws, y_pos);
                    int shell = 0;
                    bool is_b = false;
                    positivity_margin(spec, y_pos, &shell, &is_b);
                    traj.events.push_back(
                        {tp, EventKind::PositivityLoss,
                         std::string(is_b ? "b" : "a") + "[" + std::to_string(shell) + "]"});
                    positivity_armed = false;
                }
                traj.events.push_back({te, EventKind::NormThreshold, ""});
                traj.terminated_by = TerminationReason::NormThreshold;
                push_sample(te, y_event);
                return traj;
            }
            if (positivity_armed && pos_probe.margin(y_new) <= 0.0) {
                double te =
                    bisect_event(spec, y, t, t_new, config.dt_min, pos_probe, ws, y_event);
                int shell = 0;
                bool is_b = false;
                positivity_margin(spec, y_event, &shell, &is_b);
                traj.events.push_back(
                    {te, EventKind::PositivityLoss,
                     std::string(is_b ? "b" : "a") + "[" + std::to_string(shell) + "]"});
                positivity_armed = false;
            }

            t = t_new;
            y.swap(y_new);

            if (std::abs(t - next_sample) <= t_eps) {
                push_sample(t, y);
                sample_index++;
                next_sample = t0 + sample_every * static_cast<double>(sample_index);
            }
            if (t >= config.t_end - t_eps) {
                push_sample(t, y);
                traj.terminated_by = TerminationReason::TimeEnd;
                return traj;
            }
        }
    }
}

}  // namespace dyadic
