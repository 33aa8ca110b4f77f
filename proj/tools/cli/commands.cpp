#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "bianchi/bianchi.hpp"

namespace bianchi::cli {

namespace fs = std::filesystem;
using io::format_double;

int exit_code_for(const Error& error) {
    switch (error.kind()) {
        case ErrorKind::invalid_input:
        case ErrorKind::config:
        case ErrorKind::regime_violation:
            return exit_usage;
        case ErrorKind::infeasible:
        case ErrorKind::pole:
        case ErrorKind::degenerate:
        case ErrorKind::divergence:
            return exit_numerical;
    }
    return exit_numerical;
}

namespace {

std::ofstream open_output(const CommonOptions& common, const std::string& name) {
    fs::create_directories(common.out_dir);
    const fs::path path = common.out_dir / name;
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::config, "cannot write '" + path.string() + "'");
    }
    return out;
}

fs::path replace_extension(const std::string& name, const char* extension) {
    fs::path path(name);
    path.replace_extension(extension);
    return path;
}

int termination_exit(const Trajectory& traj) {
    return traj.meta.termination == Termination::completed ? exit_ok : exit_numerical;
}

double max_relative_residual(const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& d : traj.diagnostics) {
        worst = std::max(worst, d.constraint.relative_residual);
    }
    return worst;
}

void write_manifest(std::ostream& out, const RunConfig& config, const Trajectory& traj) {
    out << "# configuration\n";
    config.raw.write(out);
    out << "\n# resolved\n";
    out << "rho0 = " << format_double(config.data.rho0) << (config.rho_solved ? "  # solved" : "") << '\n';
    out << "method = " << to_string(config.solver.method) << '\n';
    out << "constraint_mode = " << to_string(config.solver.constraint_mode) << '\n';
    out << "\n# solver\n";
    out << "solver = " << traj.meta.solver << '\n';
    out << "abs_tol = " << format_double(traj.meta.abs_tol) << '\n';
    out << "rel_tol = " << format_double(traj.meta.rel_tol) << '\n';
    out << "initial_step = " << format_double(traj.meta.initial_step) << '\n';
    out << "min_step = " << format_double(traj.meta.min_step) << '\n';
    out << "max_step = " << format_double(traj.meta.max_step) << '\n';
    out << "accepted_steps = " << traj.meta.stats.accepted << '\n';
    out << "rejected_steps = " << traj.meta.stats.rejected << '\n';
    out << "rhs_evaluations = " << traj.meta.stats.rhs_evals << '\n';
    out << "samples = " << traj.size() << '\n';
    out << "final_time = " << format_double(traj.empty() ? 0.0 : traj.times.back()) << '\n';
    out << "termination = " << to_string(traj.meta.termination) << '\n';
    out << "\n# diagnostics\n";
    out << "max_relative_constraint_residual = " << format_double(max_relative_residual(traj)) << '\n';
    const ConservedDrift d = drift(traj);
    out << "drift.radiation = " << format_double(d.radiation) << '\n';
    out << "drift.scalar = " << format_double(d.scalar) << '\n';
    out << "drift.momentum = " << format_double(d.momentum) << '\n';
}

void write_physical_csv(std::ostream& out, const PhysicalTrajectory& phys) {
    out << "t,a,b,phi,phi_dot,rho,hamiltonian,evolution_a,evolution_b,scalar_wave,radiation,"
           "radiation_alt\n";
    for (std::size_t i = 0; i < phys.size(); ++i) {
        const auto& r = phys.residuals[i];
        const double fields[] = {phys.times[i], phys.a[i],      phys.b[i],          phys.phi[i],
                                 phys.phi_dot[i], phys.rho[i],  r.hamiltonian,      r.evolution_a,
                                 r.evolution_b, r.scalar_wave, r.radiation,        r.radiation_alt};
        for (std::size_t k = 0; k < std::size(fields); ++k) {
            out << (k ? "," : "") << format_double(fields[k]);
        }
        out << '\n';
    }
}

void write_summary(std::ostream& out, const Trajectory& traj, const PhysicalTrajectory& phys) {
    auto worst = [&](auto member) {
        double m = 0.0;
        for (const auto& r : phys.residuals) {
            if (!r.one_sided && std::isfinite(r.*member)) {
                m = std::max(m, std::abs(r.*member));
            }
        }
        return m;
    };
    const std::size_t last = phys.size() - 1;
    out << "Run summary\n";
    out << "  termination: " << to_string(traj.meta.termination) << '\n';
    out << "  final time: " << format_double(phys.times[last]) << '\n';
    out << "  line element at final sample: " << line_element(phys, last).text << '\n';
    out << "  max relative constraint residual: " << format_double(max_relative_residual(traj)) << '\n';
    out << "  interior second-order residuals (max abs):\n";
    out << "    hamiltonian  " << format_double(worst(&SecondOrderResiduals::hamiltonian)) << '\n';
    out << "    evolution_a  " << format_double(worst(&SecondOrderResiduals::evolution_a)) << '\n';
    out << "    evolution_b  " << format_double(worst(&SecondOrderResiduals::evolution_b)) << '\n';
    out << "    scalar_wave  " << format_double(worst(&SecondOrderResiduals::scalar_wave)) << '\n';
    out << "    radiation    " << format_double(worst(&SecondOrderResiduals::radiation)) << '\n';
    out << "    radiation (u+v form, comparison) "
        << format_double(worst(&SecondOrderResiduals::radiation_alt)) << '\n';
}

struct CertifyOutcome {
    Certificate certificate;
    Termination termination = Termination::completed;
};

CertifyOutcome simulate_and_certify(const InitialData& data, const SolverConfig& solver) {
    require_global_regime(data);
    const Trajectory traj = integrate(data, solver);
    CertifyOutcome out;
    out.termination = traj.meta.termination;
    if (out.termination == Termination::completed) {
        out.certificate = certify(traj, data, solver.tolerances);
    }
    return out;
}

void write_certificate_files(const CommonOptions& common, const RunConfig& config, const Certificate& cert) {
    auto report = open_output(common, config.outputs.report);
    io::write_certificate_report(report, cert, config.data);
    auto kv = open_output(common, replace_extension(config.outputs.report, ".kv").string());
    io::write_certificate_kv(kv, cert);
}

int certify_self_test(const std::optional<RunConfig>& config, const CommonOptions& common,
                      const CertifyOptions& options) {
    SolverConfig solver;
    solver.t_end = 20.0;
    if (config) {
        solver = config->solver;
    }
    std::mt19937_64 rng(common.seed);
    auto out = open_output(common, "self_test.csv");
    out << "index,lambda,u0,v0,psi0,rho0,result";
    for (Condition c : all_conditions) {
        out << ',' << key(c);
    }
    out << '\n';
    int code = exit_ok;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < options.count; ++i) {
        const InitialData data = sample_regime_data(rng);
        const ReducedState s = from_physical(data);
        const CertifyOutcome result = simulate_and_certify(data, solver);
        std::string verdict = "pass";
        if (result.termination != Termination::completed) {
            verdict = to_string(result.termination);
            code = exit_numerical;
        } else if (!result.certificate.passed()) {
            verdict = "fail";
            ++failures;
            if (code == exit_ok) {
                code = exit_certificate_failed;
            }
        }
        out << i << ',' << format_double(data.lambda) << ',' << format_double(s.u) << ','
            << format_double(s.v) << ',' << format_double(s.psi) << ',' << format_double(data.rho0) << ','
            << verdict;
        for (const auto& r : result.certificate.records) {
            out << ',' << format_double(result.termination == Termination::completed ? r.worst_margin : NAN);
        }
        out << '\n';
    }
    spdlog::info("self-test: {} of {} certificates failed", failures, options.count);
    return code;
}

struct SweepPoint {
    double lambda = 0.0;
    double rho0 = 0.0;
    double psi0 = 0.0;
    double v0 = 0.0;
};

struct SweepRow {
    SweepPoint point;
    double u0 = NAN;
    std::string status;
    Certificate certificate;
    bool certified = false;
};

SweepRow run_sweep_point(const SweepPoint& p, const SolverConfig& solver) {
    SweepRow row;
    row.point = p;
    try {
        if (!(p.v0 > 0.0) || p.lambda < 0.0 || !(p.rho0 > 0.0) || !(p.psi0 > 0.0)) {
            row.status = "regime violation";
            return row;
        }
        row.u0 = solve_u0(p.lambda, p.rho0, p.psi0, p.v0);
        const InitialData data = make_data(row.u0, p.v0, p.psi0, p.rho0, p.lambda);
        const CertifyOutcome result = simulate_and_certify(data, solver);
        if (result.termination != Termination::completed) {
            row.status = to_string(result.termination);
            return row;
        }
        row.certificate = result.certificate;
        row.certified = true;
        row.status = result.certificate.passed() ? "pass" : "fail";
    } catch (const Error& e) {
        row.status = e.kind() == ErrorKind::regime_violation ? "regime violation" : e.what();
    }
    return row;
}

}  // namespace

double solve_u0(double lambda, double rho0, double psi0, double v0) {
    if (v0 == 0.0) {
        throw Error(ErrorKind::invalid_input, "v0 must be non-zero to solve for u0");
    }
    return (lambda + eight_pi * rho0 + eight_pi * psi0 - v0 * v0) / (2.0 * v0);
}

int cmd_simulate(const RunConfig& config, const CommonOptions& common) {
    const Trajectory traj = integrate(config.data, config.solver);
    {
        auto csv = open_output(common, config.outputs.csv);
        io::write_trajectory_csv(csv, traj);
    }
    {
        auto manifest = open_output(common, config.outputs.manifest);
        write_manifest(manifest, config, traj);
    }
    spdlog::info("simulate: {} samples, {} ({} accepted, {} rejected steps)", traj.size(),
                 to_string(traj.meta.termination), traj.meta.stats.accepted, traj.meta.stats.rejected);
    if (config.outputs.diagnostics && traj.size() >= 5) {
        try {
            const PhysicalTrajectory phys = reconstruct(traj, config.data, config.solver.tolerances);
            auto physical = open_output(common, config.outputs.physical_csv);
            write_physical_csv(physical, phys);
            auto report = open_output(common, config.outputs.report);
            write_summary(report, traj, phys);
        } catch (const Error& e) {
            spdlog::warn("reconstruction skipped: {}", e.what());
        }
    }
    const int code = termination_exit(traj);
    if (code != exit_ok) {
        spdlog::error("integration stopped at t = {}: {}", traj.times.back(), to_string(traj.meta.termination));
    }
    return code;
}

int cmd_certify(const std::optional<RunConfig>& config, const CommonOptions& common,
                const CertifyOptions& options) {
    if (options.self_test) {
        return certify_self_test(config, common, options);
    }
    if (!config) {
        throw Error(ErrorKind::config, "certify needs --config unless --self-test is given");
    }
    require_global_regime(config->data);
    Certificate cert;
    if (options.replay) {
        std::ifstream in(*options.replay);
        if (!in) {
            throw Error(ErrorKind::config, "cannot open replay file '" + *options.replay + "'");
        }
        const Trajectory traj = io::read_trajectory_csv(in, config->data.lambda, config->solver.tolerances);
        cert = certify(traj, config->data, config->solver.tolerances);
    } else {
        const CertifyOutcome result = simulate_and_certify(config->data, config->solver);
        if (result.termination != Termination::completed) {
            spdlog::error("integration did not complete: {}", to_string(result.termination));
            return exit_numerical;
        }
        cert = result.certificate;
    }
    write_certificate_files(common, *config, cert);
    spdlog::info("certificate: {}", cert.passed() ? "pass" : "fail");
    return cert.passed() ? exit_ok : exit_certificate_failed;
}

int cmd_picard(const RunConfig& config, const CommonOptions& common, const PicardFlags& flags) {
    const double horizon = flags.horizon.value_or(config.picard.horizon.value_or(pick_horizon(config.data)));
    const std::size_t grid = flags.grid_points.value_or(config.picard.grid_points);
    const int n_max = flags.n_max.value_or(config.picard.n_max);
    if (grid < 3) {
        throw Error(ErrorKind::config, "picard grid needs at least 3 points");
    }
    const double abs_tol = config.solver.tolerances.abs_tol;
    const SchemeResult result = run_scheme(config.data, horizon, n_max, grid, abs_tol);
    {
        auto csv = open_output(common, "beta.csv");
        io::write_beta_csv(csv, result.report);
    }
    const ContractionReport& report = result.report;
    auto summary = open_output(common, "picard_summary.txt");
    summary << "horizon = " << format_double(horizon) << '\n';
    summary << "grid_points = " << grid << '\n';
    summary << "n_max = " << n_max << '\n';
    summary << "last_index = " << report.last_index << '\n';
    summary << "converged = " << (report.converged ? "true" : "false") << '\n';
    summary << "fitted_C = " << format_double(report.fitted_C2) << '\n';
    summary << "factorial_bound_ok = " << (report.factorial_bound_ok ? "true" : "false") << '\n';
    const ReducedState s0 = from_physical(config.data, ScalarPolicy::allow_static);
    if (s0.psi > 0.0) {
        summary << "psi_lower_bound_ok = " << (psi_lower_bound_check(result.grid, config.data) ? "true" : "false")
                << '\n';
    } else {
        summary << "psi_lower_bound_ok = n/a\n";
    }
    summary << "grid_refinement_stable = "
            << (grid_refinement_stable(config.data, horizon, n_max, grid, abs_tol) ? "true" : "false") << '\n';
    const ReducedState& end = result.grid.iterates.back().back();
    summary << "final.u = " << format_double(end.u) << '\n';
    summary << "final.v = " << format_double(end.v) << '\n';
    summary << "final.rho = " << format_double(end.rho) << '\n';
    summary << "final.psi = " << format_double(end.psi) << '\n';
    summary << "final.phi = " << format_double(end.phi) << '\n';
    spdlog::info("picard: {} differences, converged = {}", report.betas.size(), report.converged);
    return exit_ok;
}

int cmd_riccati(const RiccatiOptions& options, const CommonOptions& common) {
    const RiccatiParams params{.K = options.K, .alpha = options.alpha, .y0 = options.y0, .t0 = options.t0};
    params.validate();
    if (!(options.t_end > options.t0) || options.samples < 2) {
        throw Error(ErrorKind::config, "riccati needs t_end > t0 and at least 2 samples");
    }
    if (const auto pole = riccati_pole(params); pole && *pole <= options.t_end) {
        spdlog::error("pole at t = {}", *pole);
        return exit_numerical;
    }
    std::vector<double> times(options.samples);
    for (std::size_t i = 0; i < options.samples; ++i) {
        times[i] = options.t0 + (options.t_end - options.t0) * static_cast<double>(i) /
                                    static_cast<double>(options.samples - 1);
    }
    times.back() = options.t_end;

    std::vector<double> numerical{options.y0};
    const ode::AdaptiveOptions opt{.abs_tol = 1e-13, .rel_tol = 1e-13, .initial_step = 1e-4};
    const double k2 = options.K * options.K;
    const double a2 = options.alpha * options.alpha;
    auto f = [k2, a2](double, const ode::Vec<1>& y) { return ode::Vec<1>{k2 - a2 * y[0] * y[0]}; };
    auto observer = [&](double, ode::Vec<1>& y, bool is_output) {
        if (is_output) {
            numerical.push_back(y[0]);
        }
        return ode::Action::proceed;
    };
    const auto result = ode::integrate_dopri5<1>(f, options.t0, ode::Vec<1>{options.y0}, options.t_end, opt,
                                                 std::span<const double>(times).subspan(1), observer);
    if (result.outcome != ode::Outcome::completed || numerical.size() != times.size()) {
        spdlog::error("numerical integration did not reach t_end");
        return exit_numerical;
    }

    auto csv = open_output(common, options.csv);
    csv << "t,closed_form,numerical,rel_deviation\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double exact = riccati_closed_form(params, times[i]);
        const double diff = std::abs(numerical[i] - exact);
        const double rel = exact != 0.0 ? diff / std::abs(exact) : diff;
        worst = std::max(worst, rel);
        csv << format_double(times[i]) << ',' << format_double(exact) << ',' << format_double(numerical[i])
            << ',' << format_double(rel) << '\n';
    }
    csv << "# max_rel_deviation = " << format_double(worst) << '\n';
    spdlog::info("riccati: max relative deviation {}", worst);
    return exit_ok;
}

int cmd_sweep(const RunConfig& config, const CommonOptions& common) {
    const ReducedState base = from_physical(config.data, ScalarPolicy::allow_static);
    std::vector<double> lambdas{config.data.lambda};
    std::vector<double> rhos{config.data.rho0};
    std::vector<double> psis{base.psi};
    std::vector<double> vs{base.v};
    for (const auto& axis : config.sweep) {
        if (axis.values.empty()) {
            throw Error(ErrorKind::config, "sweep axis '" + axis.name + "' is empty");
        }
        if (axis.name == "lambda") {
            lambdas = axis.values;
        } else if (axis.name == "rho0") {
            rhos = axis.values;
        } else if (axis.name == "psi0") {
            psis = axis.values;
        } else {
            vs = axis.values;
        }
    }
    std::vector<SweepPoint> points;
    for (double l : lambdas) {
        for (double r : rhos) {
            for (double p : psis) {
                for (double v : vs) {
                    points.push_back({l, r, p, v});
                }
            }
        }
    }

    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            rows[i] = run_sweep_point(points[i], config.solver);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(common.jobs, static_cast<unsigned>(points.size())));
    std::vector<std::thread> threads;
    for (unsigned j = 1; j < jobs; ++j) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }

    auto out = open_output(common, "sweep.csv");
    out << "index,lambda,rho0,psi0,v0,u0,result";
    for (Condition c : all_conditions) {
        out << ',' << key(c);
    }
    out << '\n';
    int code = exit_ok;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& row = rows[i];
        out << i << ',' << format_double(row.point.lambda) << ',' << format_double(row.point.rho0) << ','
            << format_double(row.point.psi0) << ',' << format_double(row.point.v0) << ','
            << format_double(row.u0) << ',' << row.status;
        for (const auto& r : row.certificate.records) {
            out << ',' << format_double(row.certified ? r.worst_margin : NAN);
        }
        out << '\n';
        if (row.status == "fail" && code == exit_ok) {
            code = exit_certificate_failed;
        } else if (row.status != "pass" && row.status != "fail" && row.status != "regime violation") {
            code = exit_numerical;
        }
    }
    spdlog::info("sweep: {} points", rows.size());
    return code;
}

}  // namespace bianchi::cli
