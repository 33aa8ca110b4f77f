#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "bianchi/constraint.hpp"

namespace bianchi::cli {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "a0", "a_dot0", "b0", "b_dot0", "phi0", "phi_dot0", "rho0", "lambda",
        "method", "abs_tol", "rel_tol", "constraint_warn", "constraint_fail", "t_end", "max_samples",
        "initial_step", "min_step", "max_step", "output_interval", "constraint_mode", "blowup_ceiling",
        "output.csv", "output.physical_csv", "output.report", "output.manifest", "output.diagnostics",
        "picard.horizon", "picard.n_max", "picard.grid_points",
        "sweep.lambda", "sweep.rho0", "sweep.psi0", "sweep.v0",
    };
    return keys;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw Error(ErrorKind::config, "key '" + key + "': expected a boolean");
}

std::size_t parse_count(const io::KeyValueFile& file, const std::string& key, std::size_t fallback) {
    const double value = file.get_double(key, static_cast<double>(fallback));
    if (!(value >= 1.0) || value != std::floor(value) || value > 1e12) {
        throw Error(ErrorKind::config, "key '" + key + "': expected a positive integer");
    }
    return static_cast<std::size_t>(value);
}

}  // namespace

std::vector<double> parse_range(const std::string& key, const std::string& text) {
    std::vector<double> values;
    const std::string_view trimmed = io::trim(text);
    if (trimmed.find(':') != std::string_view::npos) {
        std::vector<double> parts;
        std::size_t start = 0;
        for (;;) {
            const auto pos = trimmed.find(':', start);
            const auto value = io::parse_double(trimmed.substr(start, pos - start));
            if (!value) {
                throw Error(ErrorKind::config, "key '" + key + "': bad range '" + text + "'");
            }
            parts.push_back(*value);
            if (pos == std::string_view::npos) {
                break;
            }
            start = pos + 1;
        }
        if (parts.size() != 3 || !(parts[2] >= 1.0) || parts[2] != std::floor(parts[2])) {
            throw Error(ErrorKind::config, "key '" + key + "': range must be lo:hi:count");
        }
        const auto count = static_cast<std::size_t>(parts[2]);
        for (std::size_t i = 0; i < count; ++i) {
            values.push_back(count == 1 ? parts[0]
                                        : parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) /
                                                         static_cast<double>(count - 1));
        }
        return values;
    }
    if (trimmed.empty()) {
        throw Error(ErrorKind::config, "key '" + key + "': empty range");
    }
    std::size_t start = 0;
    for (;;) {
        const auto pos = trimmed.find(',', start);
        const auto value = io::parse_double(trimmed.substr(start, pos - start));
        if (!value) {
            throw Error(ErrorKind::config, "key '" + key + "': bad value in '" + text + "'");
        }
        values.push_back(*value);
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return values;
}

RunConfig load_run_config(const io::KeyValueFile& file) {
    for (const auto& key : file.keys()) {
        if (!known_keys().contains(key)) {
            throw Error(ErrorKind::config, "unknown key '" + key + "'");
        }
    }

    RunConfig cfg;
    cfg.raw = file;
    InitialData& d = cfg.data;
    d.a0 = file.require_double("a0");
    d.a_dot0 = file.require_double("a_dot0");
    d.b0 = file.require_double("b0");
    d.b_dot0 = file.require_double("b_dot0");
    d.phi0 = file.get_double("phi0", 0.0);
    d.phi_dot0 = file.require_double("phi_dot0");
    d.lambda = file.require_double("lambda");

    const auto rho_text = file.get("rho0");
    if (!rho_text) {
        throw Error(ErrorKind::config, "missing key 'rho0'");
    }
    if (*rho_text == "solve") {
        cfg.rho_solved = true;
        try {
            const ReducedState s = from_physical(d, ScalarPolicy::allow_static);
            d.rho0 = solve_initial_density(s.u, s.v, s.psi, d.lambda);
        } catch (const Error& e) {
            throw Error(ErrorKind::config, std::string("rho0 = solve: ") + e.what());
        }
    } else {
        d.rho0 = file.require_double("rho0");
    }
    try {
        validate(d, ScalarPolicy::allow_static);
    } catch (const Error& e) {
        throw Error(ErrorKind::config, e.what());
    }

    SolverConfig& s = cfg.solver;
    if (const auto method = file.get("method")) {
        if (*method == "adaptive") {
            s.method = Method::adaptive;
        } else if (*method == "fixed_rk4") {
            s.method = Method::fixed_rk4;
        } else {
            throw Error(ErrorKind::config, "method must be adaptive or fixed_rk4");
        }
    }
    if (const auto mode = file.get("constraint_mode")) {
        if (*mode == "monitor") {
            s.constraint_mode = ConstraintMode::monitor;
        } else if (*mode == "project_rho") {
            s.constraint_mode = ConstraintMode::project_rho;
        } else {
            throw Error(ErrorKind::config, "constraint_mode must be monitor or project_rho");
        }
    }
    s.tolerances.abs_tol = file.get_double("abs_tol", s.tolerances.abs_tol);
    s.tolerances.rel_tol = file.get_double("rel_tol", s.tolerances.rel_tol);
    s.tolerances.constraint_warn = file.get_double("constraint_warn", s.tolerances.constraint_warn);
    s.tolerances.constraint_fail = file.get_double("constraint_fail", s.tolerances.constraint_fail);
    s.t_end = file.get_double("t_end", s.t_end);
    s.max_samples = parse_count(file, "max_samples", s.max_samples);
    s.initial_step = file.get_double("initial_step", s.initial_step);
    s.min_step = file.get_double("min_step", s.min_step);
    s.max_step = file.get_double("max_step", s.max_step);
    s.output_interval = file.get_double("output_interval", s.output_interval);
    s.blowup_ceiling = file.get_double("blowup_ceiling", s.blowup_ceiling);
    try {
        s.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::config, e.what());
    }

    OutputOptions& o = cfg.outputs;
    o.csv = file.get("output.csv").value_or(o.csv);
    o.physical_csv = file.get("output.physical_csv").value_or(o.physical_csv);
    o.report = file.get("output.report").value_or(o.report);
    o.manifest = file.get("output.manifest").value_or(o.manifest);
    if (const auto diag = file.get("output.diagnostics")) {
        o.diagnostics = parse_bool("output.diagnostics", *diag);
    }

    if (const auto horizon = file.get("picard.horizon"); horizon && *horizon != "auto") {
        cfg.picard.horizon = file.require_double("picard.horizon");
    }
    cfg.picard.n_max = static_cast<int>(parse_count(file, "picard.n_max", static_cast<std::size_t>(cfg.picard.n_max)));
    cfg.picard.grid_points = parse_count(file, "picard.grid_points", cfg.picard.grid_points);

    for (const char* axis : {"lambda", "rho0", "psi0", "v0"}) {
        const std::string key = std::string("sweep.") + axis;
        if (const auto text = file.get(key)) {
            cfg.sweep.push_back(SweepAxis{axis, parse_range(key, *text)});
        }
    }
    return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::config, "cannot open config '" + path + "'");
    }
    return load_run_config(io::KeyValueFile::parse(in));
}

}  // namespace bianchi::cli
