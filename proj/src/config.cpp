#include "dyadic/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dyadic/rng.hpp"
#include "dyadic/steady.hpp"

namespace dyadic::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& value, const std::string& where) {
    const std::string t = trim(value);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
        throw ConfigError(where + ": expected a finite number, got '" + value + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& value, const std::string& where) {
    const std::string t = trim(value);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        throw ConfigError(where + ": expected a non-negative integer, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& value, const std::string& where) {
    const std::string t = trim(value);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(where + ": expected true/false, got '" + value + "'");
}

std::vector<double> parse_number_list(const std::string& value, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item, where));
    return out;
}

InitialSpec parse_initial(const std::string& value, const std::string& where) {
    InitialSpec init;
    init.raw = trim(value);
    const auto colon = init.raw.find(':');
    const std::string head = colon == std::string::npos ? init.raw : init.raw.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : init.raw.substr(colon + 1);
    if (head == "power") {
        init.kind = InitialKind::Power;
        init.power_alpha = parse_number(args, where + " (power exponent)");
    } else if (head == "explicit") {
        init.kind = InitialKind::Explicit;
        const auto slash = args.find('/');
        init.explicit_a = parse_number_list(
            slash == std::string::npos ? args : args.substr(0, slash), where + " (a list)");
        if (slash != std::string::npos)
            init.explicit_b = parse_number_list(args.substr(slash + 1), where + " (b list)");
        if (init.explicit_a.empty())
            throw ConfigError(where + ": explicit initial state needs at least one entry");
    } else if (head == "fixedpoint") {
        init.kind = InitialKind::FixedPoint;
        const auto parts = parse_number_list(args, where + " (A0,B0)");
        if (parts.size() != 2)
            throw ConfigError(where + ": fixedpoint takes exactly A0,B0");
        init.A0 = parts[0];
        init.B0 = parts[1];
    } else if (head == "fixedpoint+noise") {
        init.kind = InitialKind::FixedPointNoise;
        const auto parts = parse_number_list(args, where + " (noise arguments)");
        // sigma / sigma,seed / A0,B0,sigma / A0,B0,sigma,seed; without an
        // explicit seed the top-level `seed` key applies
        if (parts.size() == 1) {
            init.noise_sigma = parts[0];
        } else if (parts.size() == 2) {
            init.noise_sigma = parts[0];
            init.noise_seed = static_cast<std::uint64_t>(parts[1]);
        } else if (parts.size() == 3) {
            init.A0 = parts[0];
            init.B0 = parts[1];
            init.noise_sigma = parts[2];
        } else if (parts.size() == 4) {
            init.A0 = parts[0];
            init.B0 = parts[1];
            init.noise_sigma = parts[2];
            init.noise_seed = static_cast<std::uint64_t>(parts[3]);
        } else {
            throw ConfigError(where +
                              ": fixedpoint+noise takes sigma[,seed] or A0,B0,sigma[,seed]");
        }
        if (init.noise_sigma < 0.0) throw ConfigError(where + ": noise sigma must be >= 0");
    } else {
        throw ConfigError(where + ": unknown initial kind '" + head +
                          "' (expected power / explicit / fixedpoint / fixedpoint+noise)");
    }
    return init;
}

void set_key(RunConfig& c, const std::string& key, const std::string& value,
             const std::string& where) {
    if (key == "model") {
        c.model = trim(value);
        parse_model_kind(c.model);  // validates
    } else if (key == "lambda") {
        c.lambda = parse_number(value, where);
        if (!(c.lambda > 1.0))
            throw ConfigError(where + ": lambda must satisfy lambda > 1, got " + trim(value));
    } else if (key == "theta") {
        c.theta = parse_number(value, where);
        if (!(*c.theta > 0.0)) throw ConfigError(where + ": theta must be > 0");
    } else if (key == "delta") {
        c.delta = parse_number(value, where);
        if (!(*c.delta >= 0.0 && *c.delta <= 3.0))
            throw ConfigError(where + ": delta must lie in [0, 3]");
    } else if (key == "shells") {
        const double v = parse_number(value, where);
        if (!(v >= 1.0) || v != std::floor(v))
            throw ConfigError(where + ": shells must be an integer >= 1");
        c.shells = static_cast<int>(v);
    } else if (key == "f0") {
        if (trim(value) == "auto") {
            c.f0_auto = true;
            c.f0.reset();
        } else {
            c.f0 = parse_number(value, where);
            c.f0_auto = false;
        }
    } else if (key == "initial") {
        c.initial = parse_initial(value, where);
    } else if (key == "t_end") {
        c.t_end = parse_number(value, where);
        if (!(c.t_end > 0.0)) throw ConfigError(where + ": t_end must be > 0");
    } else if (key == "method") {
        c.method = trim(value);
        if (c.method != "rk45" && c.method != "rk4")
            throw ConfigError(where + ": method must be rk45 or rk4");
    } else if (key == "dt") {
        c.dt = parse_number(value, where);
        if (!(c.dt > 0.0)) throw ConfigError(where + ": dt must be > 0");
    } else if (key == "abs_tol") {
        c.abs_tol = parse_number(value, where);
        if (!(c.abs_tol > 0.0)) throw ConfigError(where + ": abs_tol must be > 0");
    } else if (key == "rel_tol") {
        c.rel_tol = parse_number(value, where);
        if (!(c.rel_tol >= 0.0)) throw ConfigError(where + ": rel_tol must be >= 0");
    } else if (key == "dt_min") {
        c.dt_min = parse_number(value, where);
        if (!(c.dt_min > 0.0)) throw ConfigError(where + ": dt_min must be > 0");
    } else if (key == "dt_max") {
        c.dt_max = parse_number(value, where);
        if (!(*c.dt_max > 0.0)) throw ConfigError(where + ": dt_max must be > 0");
    } else if (key == "sample_every") {
        c.sample_every = parse_number(value, where);
        if (!(*c.sample_every > 0.0)) throw ConfigError(where + ": sample_every must be > 0");
    } else if (key == "max_steps") {
        c.max_steps = parse_unsigned(value, where);
    } else if (key == "diagnostics") {
        c.diagnostics_s = parse_number_list(value, where);
    } else if (key == "lyapunov") {
        const auto parts = parse_number_list(value, where);
        if (parts.size() != 3) throw ConfigError(where + ": lyapunov takes s,gamma,c0");
        LyapunovParams p{parts[0], parts[1], parts[2]};
        if (!(p.gamma > 0.0)) throw ConfigError(where + ": lyapunov gamma must be > 0");
        if (!(p.c0 > 0.0 && p.c0 < 1.0))
            throw ConfigError(where + ": lyapunov c0 must lie in (0, 1)");
        c.lyapunov = p;
    } else if (key == "norm_s") {
        c.norm_s = parse_number(value, where);
    } else if (key == "norm_limit") {
        c.norm_limit = parse_number(value, where);
        if (!(*c.norm_limit > 0.0)) throw ConfigError(where + ": norm_limit must be > 0");
    } else if (key == "positivity_watch") {
        c.positivity_watch = parse_bool(value, where);
    } else if (key == "output_dir") {
        c.output_dir = trim(value);
        if (c.output_dir.empty()) throw ConfigError(where + ": output_dir must not be empty");
    } else if (key == "seed") {
        c.seed = parse_unsigned(value, where);
    } else if (key == "channel") {
        c.channel = trim(value);
        if (c.channel != "velocity" && c.channel != "magnetic")
            throw ConfigError(where + ": channel must be velocity or magnetic");
    } else if (key == "a0") {
        const double v = parse_number(value, where);
        if (v != 1.0 && v != -1.0) throw ConfigError(where + ": a0 must be 1 or -1");
        c.a0_sign = static_cast<int>(v);
    } else if (key == "scan_min") {
        c.scan_min = parse_number(value, where);
    } else if (key == "scan_max") {
        c.scan_max = parse_number(value, where);
    } else if (key == "scan_step") {
        c.scan_step = parse_number(value, where);
        if (!(c.scan_step > 0.0)) throw ConfigError(where + ": scan_step must be > 0");
    } else if (key == "scan_n") {
        const double v = parse_number(value, where);
        if (!(v >= 2.0) || v != std::floor(v))
            throw ConfigError(where + ": scan_n must be an integer >= 2");
        c.scan_n = static_cast<int>(v);
    } else if (key == "newton") {
        c.newton = parse_bool(value, where);
    } else if (key == "newton_tol") {
        c.newton_tol = parse_number(value, where);
        if (!(c.newton_tol > 0.0)) throw ConfigError(where + ": newton_tol must be > 0");
    } else {
        throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

void validate(RunConfig& c) {
    if (c.theta && c.delta)
        throw ConfigError("config: theta and delta are mutually exclusive; give one");
    if (!c.theta && !c.delta) c.theta = 1.0;
    if (c.dt_max && *c.dt_max < c.dt_min)
        throw ConfigError("config: dt_max must be >= dt_min");
    if (c.scan_max < c.scan_min) throw ConfigError("config: scan_max must be >= scan_min");
    if (c.norm_limit && !c.norm_s)
        throw ConfigError("config: norm_limit requires norm_s");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_scalar_to_string(const nlohmann::json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return fmt(v.get<double>());
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!out.empty()) out += ",";
            out += json_scalar_to_string(e, where);
        }
        return out;
    }
    throw ConfigError(where + ": unsupported JSON value type");
}

}  // namespace

double RunConfig::resolved_theta() const {
    if (theta) return *theta;
    if (delta) return theta_from_delta(*delta);
    return 1.0;
}

double RunConfig::resolved_f0() const {
    if (f0_auto) return std::pow(lambda, -resolved_theta() / 3.0);
    return f0.value_or(0.0);
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "euler") return ModelKind::Euler;
    if (name == "mhd_forward") return ModelKind::MhdForward;
    if (name == "mhd_bidirectional") return ModelKind::MhdBidirectional;
    throw ConfigError("config: unknown model '" + name +
                      "' (expected euler / mhd_forward / mhd_bidirectional)");
}

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& err) {
            throw ConfigError(std::string("config: JSON parse failure: ") + err.what());
        }
        if (!doc.is_object()) throw ConfigError("config: JSON root must be an object");
        for (const auto& [key, value] : doc.items())
            set_key(config, key, json_scalar_to_string(value, "key '" + key + "'"),
                    "key '" + key + "'");
        validate(config);
        return config;
    }

    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    std::map<std::string, int> seen;
    while (std::getline(ss, line)) {
        line_no++;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        const std::string where = "line " + std::to_string(line_no);
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key=value, got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = stripped.substr(eq + 1);
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (auto [it, inserted] = seen.emplace(key, line_no); !inserted)
            throw ConfigError(where + ": duplicate key '" + key + "' (first on line " +
                              std::to_string(it->second) + ")");
        set_key(config, key, value, where + " ('" + key + "')");
    }
    validate(config);
    return config;
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
    set_key(config, key, value, "override '" + key + "'");
    validate(config);
}

std::string serialize_config(const RunConfig& c) {
    std::string out;
    const auto kv = [&out](const std::string& k, const std::string& v) {
        out += k + "=" + v + "\n";
    };
    kv("model", c.model);
    kv("lambda", fmt(c.lambda));
    if (c.theta) kv("theta", fmt(*c.theta));
    if (c.delta) kv("delta", fmt(*c.delta));
    kv("shells", std::to_string(c.shells));
    if (c.f0_auto)
        kv("f0", "auto");
    else if (c.f0)
        kv("f0", fmt(*c.f0));
    kv("initial", c.initial.raw.empty() ? "power:0" : c.initial.raw);
    kv("t_end", fmt(c.t_end));
    kv("method", c.method);
    kv("dt", fmt(c.dt));
    kv("abs_tol", fmt(c.abs_tol));
    kv("rel_tol", fmt(c.rel_tol));
    kv("dt_min", fmt(c.dt_min));
    if (c.dt_max) kv("dt_max", fmt(*c.dt_max));
    if (c.sample_every) kv("sample_every", fmt(*c.sample_every));
    if (c.max_steps) kv("max_steps", std::to_string(c.max_steps));
    if (!c.diagnostics_s.empty()) {
        std::string list;
        for (double s : c.diagnostics_s) {
            if (!list.empty()) list += ",";
            list += fmt(s);
        }
        kv("diagnostics", list);
    }
    if (c.lyapunov)
        kv("lyapunov", fmt(c.lyapunov->s) + "," + fmt(c.lyapunov->gamma) + "," +
                           fmt(c.lyapunov->c0));
    if (c.norm_s) kv("norm_s", fmt(*c.norm_s));
    if (c.norm_limit) kv("norm_limit", fmt(*c.norm_limit));
    kv("positivity_watch", c.positivity_watch ? "true" : "false");
    kv("output_dir", c.output_dir);
    kv("seed", std::to_string(c.seed));
    kv("channel", c.channel);
    kv("a0", c.a0_sign == 1 ? "1" : "-1");
    kv("scan_min", fmt(c.scan_min));
    kv("scan_max", fmt(c.scan_max));
    kv("scan_step", fmt(c.scan_step));
    kv("scan_n", std::to_string(c.scan_n));
    kv("newton", c.newton ? "true" : "false");
    kv("newton_tol", fmt(c.newton_tol));
    return out;
}

ModelSpec build_model(const RunConfig& c) {
    const ModelKind kind = parse_model_kind(c.model);
    std::vector<double> forcing;
    const double f0 = c.resolved_f0();
    if (f0 != 0.0) forcing.push_back(f0);
    return make_model(kind, c.lambda, c.resolved_theta(), c.shells, std::move(forcing));
}

ShellState build_initial_state(const RunConfig& c, const ModelSpec& spec) {
    const int count = spec.shell_count();
    const InitialSpec& init = c.initial;
    switch (init.kind) {
        case InitialKind::Power: {
            std::vector<double> a(count), b;
            for (int j = 0; j < count; ++j)
                a[j] = spec.lambda_pow(-init.power_alpha, j);
            if (spec.has_magnetic()) b = a;
            return make_state(spec, std::move(a), std::move(b));
        }
        case InitialKind::Explicit: {
            std::vector<double> a = init.explicit_a;
            std::vector<double> b = init.explicit_b;
            if (static_cast<int>(a.size()) != count)
                throw ConfigError("initial: explicit a list has " + std::to_string(a.size()) +
                                  " entries, expected " + std::to_string(count));
            if (!b.empty() && static_cast<int>(b.size()) != count)
                throw ConfigError("initial: explicit b list has " + std::to_string(b.size()) +
                                  " entries, expected " + std::to_string(count));
            return make_state(spec, std::move(a), std::move(b));
        }
        case InitialKind::FixedPoint:
        case InitialKind::FixedPointNoise: {
            const double f0 = c.resolved_f0();
            if (!(f0 > 0.0))
                throw ConfigError("initial: fixedpoint profiles require f0 > 0 (or f0=auto)");
            const double A0 = init.A0, B0 = init.B0;
            switch (spec.kind) {
                case ModelKind::MhdForward:
                    if (std::abs(A0 * A0 + B0 * B0 - 1.0) > 1e-9)
                        throw ConfigError("initial: fixedpoint for mhd_forward needs A0^2 + B0^2 = 1");
                    break;
                case ModelKind::MhdBidirectional:
                    if (std::abs(A0 * A0 - B0 * B0 - 1.0) > 1e-9)
                        throw ConfigError(
                            "initial: fixedpoint for mhd_bidirectional needs A0^2 - B0^2 = 1");
                    break;
                case ModelKind::Euler:
                    if (B0 != 0.0 || std::abs(std::abs(A0) - 1.0) > 1e-9)
                        throw ConfigError("initial: fixedpoint for euler needs A0 = +/-1, B0 = 0");
                    break;
            }
            const double scale = std::pow(spec.lambda, spec.theta / 6.0) * std::sqrt(f0);
            std::vector<double> a(count), b(count, 0.0);
            for (int j = 0; j < count; ++j) {
                const double profile = scale * spec.lambda_pow(-spec.theta / 3.0, j);
                a[j] = A0 * profile;
                if (spec.has_magnetic()) b[j] = B0 * profile;
            }
            if (init.kind == InitialKind::FixedPointNoise && init.noise_sigma > 0.0) {
                SplitMix64 rng(init.noise_seed.value_or(c.seed));
                for (int j = 0; j < count; ++j) a[j] += init.noise_sigma * rng.normal();
                if (spec.has_magnetic())
                    for (int j = 0; j < count; ++j) b[j] += init.noise_sigma * rng.normal();
            }
            if (!spec.has_magnetic()) b.assign(count, 0.0);
            return make_state(spec, std::move(a), std::move(b));
        }
    }
    throw ConfigError("initial: unsupported initial kind");
}

IntegratorConfig build_integrator_config(const RunConfig& c) {
    IntegratorConfig ic;
    ic.method = (c.method == "rk4") ? StepMethod::RK4Fixed : StepMethod::RK45Adaptive;
    ic.dt = c.dt;
    ic.abs_tol = c.abs_tol;
    ic.rel_tol = c.rel_tol;
    ic.dt_min = c.dt_min;
    if (c.dt_max) ic.dt_max = *c.dt_max;
    ic.t_end = c.t_end;
    ic.sample_every = c.sample_every.value_or(0.0);
    if (c.max_steps > 0) ic.max_steps = c.max_steps;
    return ic;
}

EventSpec build_event_spec(const RunConfig& c) {
    EventSpec ev;
    ev.positivity_watch = c.positivity_watch;
    if (c.norm_s && c.norm_limit) ev.norm_threshold = NormThresholdSpec{*c.norm_s, *c.norm_limit};
    return ev;
}

}  // namespace dyadic::cli
