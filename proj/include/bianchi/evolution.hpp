#pragma once

/**
 * @file evolution.hpp
 * @brief First-order reduced system and its numerical integration.
 *
 *   u'   = (2/3) Lambda - u^2 + (1/3) v^2 - (4/3) u v - (8/3) pi psi
 *   v'   = (2/3) Lambda - (5/3) v^2 - (1/3) u v - (8/3) pi psi
 *   phi' = sqrt(2 psi)
 *   rho' = -(4/3) (u + 2v) rho
 *   psi' = -2 (u + 2v) psi
 *   a'   = u a,   b' = v b
 *
 * The continuum flow propagates the Hamiltonian constraint C as
 * C' = -(4/3)(u + 2v) C, so constraint-satisfying data stay on the surface.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bianchi/constraint.hpp"
#include "bianchi/core_types.hpp"
#include "bianchi/ode.hpp"
#include "bianchi/trajectory.hpp"

namespace bianchi {

struct Derivative {
    double du = 0.0;
    double dv = 0.0;
    double drho = 0.0;
    double dpsi = 0.0;
    double dphi = 0.0;
    double da = 0.0;
    double db = 0.0;
};

enum class Method { adaptive, fixed_rk4 };
enum class ConstraintMode { monitor, project_rho };

inline const char* to_string(Method m) { return m == Method::adaptive ? "adaptive" : "fixed_rk4"; }
inline const char* to_string(ConstraintMode m) {
    return m == ConstraintMode::monitor ? "monitor" : "project_rho";
}

struct SolverConfig {
    Method method = Method::adaptive;
    /// Starting step of the adaptive method; the step of fixed_rk4.
    double initial_step = 1e-3;
    double min_step = 1e-14;
    double max_step = 0.1;
    Tolerances tolerances;
    double t_end = 10.0;
    std::size_t max_samples = 1'000'000;
    /// Uniform sampling interval; 0 records every accepted step.
    double output_interval = 0.0;
    ConstraintMode constraint_mode = ConstraintMode::monitor;
    /// Integration stops once |u| + |v| exceeds this.
    double blowup_ceiling = 1e12;

    void validate() const {
        tolerances.validate();
        if (!(min_step > 0.0) || !(initial_step > 0.0) || !(max_step > 0.0)) {
            throw Error(ErrorKind::invalid_input, "step sizes must be positive");
        }
        if (!(min_step <= initial_step && initial_step <= max_step)) {
            throw Error(ErrorKind::invalid_input, "need min_step <= initial_step <= max_step");
        }
        if (!(t_end > 0.0) || !std::isfinite(t_end)) {
            throw Error(ErrorKind::invalid_input, "t_end must be positive");
        }
        if (max_samples == 0) {
            throw Error(ErrorKind::invalid_input, "max_samples must be positive");
        }
        if (output_interval < 0.0 || !std::isfinite(output_interval)) {
            throw Error(ErrorKind::invalid_input, "output_interval must be non-negative");
        }
        if (!(blowup_ceiling > 0.0)) {
            throw Error(ErrorKind::invalid_input, "blow-up ceiling must be positive");
        }
    }
};

namespace detail {

using StateVec = ode::Vec<7>;

inline StateVec pack(const ExtendedState& s) {
    return {s.reduced.u, s.reduced.v, s.reduced.rho, s.reduced.psi, s.reduced.phi, s.a, s.b};
}

inline ExtendedState unpack(const StateVec& y) {
    return ExtendedState{ReducedState{y[0], y[1], y[2], y[3], y[4]}, y[5], y[6]};
}

// No validation; psi is clamped at zero under the square root only.
inline Derivative rhs_unchecked(const ExtendedState& s, double lambda) {
    const double u = s.reduced.u;
    const double v = s.reduced.v;
    const double psi = s.reduced.psi;
    const double expansion = u + 2.0 * v;
    const double scalar_pressure = (8.0 / 3.0) * pi * psi;
    return Derivative{
        .du = (2.0 / 3.0) * lambda - u * u + v * v / 3.0 - (4.0 / 3.0) * u * v - scalar_pressure,
        .dv = (2.0 / 3.0) * lambda - (5.0 / 3.0) * v * v - u * v / 3.0 - scalar_pressure,
        .drho = -(4.0 / 3.0) * expansion * s.reduced.rho,
        .dpsi = -2.0 * expansion * psi,
        .dphi = std::sqrt(2.0 * std::max(psi, 0.0)),
        .da = u * s.a,
        .db = v * s.b,
    };
}

inline std::vector<double> output_grid(double t_end, double interval) {
    std::vector<double> grid;
    if (interval <= 0.0) {
        return grid;
    }
    const auto count = static_cast<std::size_t>(std::floor(t_end / interval + 1e-9));
    grid.reserve(count + 1);
    for (std::size_t k = 1; k <= count; ++k) {
        grid.push_back(std::min(t_end, static_cast<double>(k) * interval));
    }
    if (grid.empty() || grid.back() < t_end * (1.0 - 1e-12)) {
        grid.push_back(t_end);
    } else {
        grid.back() = t_end;
    }
    return grid;
}

}  // namespace detail

inline Derivative rhs(const ExtendedState& state, double lambda) {
    if (!state.finite() || !std::isfinite(lambda)) {
        throw Error(ErrorKind::invalid_input, "state must be finite");
    }
    if (state.reduced.psi < 0.0) {
        throw Error(ErrorKind::invalid_input, "psi must be non-negative");
    }
    return detail::rhs_unchecked(state, lambda);
}

/// Reduced-variable right-hand side; the scale-factor rates are not needed.
inline ReducedState rhs_reduced(const ReducedState& s, double lambda) {
    const Derivative d = rhs(ExtendedState{s, 1.0, 1.0}, lambda);
    return ReducedState{d.du, d.dv, d.drho, d.dpsi, d.dphi};
}

/**
 * Integrates from `start` at t = 0 to config.t_end (or until blow-up, step
 * underflow or the sample cap). Samples are the initial point plus every
 * output time; diagnostics are filled at every sample.
 */
inline Trajectory integrate(const ExtendedState& start, double lambda, const SolverConfig& config) {
    config.validate();
    if (!start.finite() || !std::isfinite(lambda)) {
        throw Error(ErrorKind::invalid_input, "initial state must be finite");
    }
    if (!(start.a > 0.0) || !(start.b > 0.0) || start.reduced.psi < 0.0 || start.reduced.rho < 0.0) {
        throw Error(ErrorKind::invalid_input, "need a, b > 0 and rho, psi >= 0");
    }

    const Tolerances& tol = config.tolerances;
    const double rho0 = start.reduced.rho;
    const double h0 = expansion_scalar(start.reduced);

    Trajectory traj;
    traj.lambda = lambda;
    traj.meta.solver = config.method == Method::adaptive ? "dopri5" : "rk4";
    traj.meta.abs_tol = tol.abs_tol;
    traj.meta.rel_tol = tol.rel_tol;
    traj.meta.initial_step = config.initial_step;
    traj.meta.min_step = config.min_step;
    traj.meta.max_step = config.max_step;

    auto record = [&](double t, const ExtendedState& s) {
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.diagnostics.push_back(diagnose(s, t, lambda, rho0, h0, tol));
    };
    record(0.0, start);

    auto f = [lambda](double, const detail::StateVec& y) {
        const Derivative d = detail::rhs_unchecked(detail::unpack(y), lambda);
        return detail::StateVec{d.du, d.dv, d.drho, d.dpsi, d.dphi, d.da, d.db};
    };

    Termination termination = Termination::completed;
    auto observer = [&](double t, detail::StateVec& y, bool is_output) {
        ode::Action action = ode::Action::proceed;
        const bool blown = !std::isfinite(std::abs(y[0]) + std::abs(y[1])) ||
                           std::abs(y[0]) + std::abs(y[1]) > config.blowup_ceiling;
        if (!blown && config.constraint_mode == ConstraintMode::project_rho) {
            y[2] = std::max(0.0, (y[1] * y[1] + 2.0 * y[0] * y[1] - lambda - eight_pi * y[3]) / eight_pi);
            action = ode::Action::modified;
        }
        if (is_output || blown) {
            record(t, detail::unpack(y));
        }
        if (blown) {
            termination = Termination::blow_up;
            return ode::Action::stop;
        }
        if (traj.size() >= config.max_samples && t < config.t_end) {
            termination = Termination::sample_limit;
            return ode::Action::stop;
        }
        return action;
    };

    const std::vector<double> outputs = detail::output_grid(config.t_end, config.output_interval);
    ode::Result result;
    if (config.method == Method::adaptive) {
        const ode::AdaptiveOptions opt{
            .abs_tol = tol.abs_tol,
            .rel_tol = tol.rel_tol,
            .initial_step = config.initial_step,
            .min_step = config.min_step,
            .max_step = config.max_step,
        };
        auto error_scale = [](const detail::StateVec& y, const detail::StateVec& y_new,
                              const ode::AdaptiveOptions& o, detail::StateVec& scale) {
            ode::MixedScale{}(y, y_new, o, scale);
            // rho and psi are positive and decay over many decades: relative error only.
            for (std::size_t i : {std::size_t{2}, std::size_t{3}}) {
                const double magnitude = std::max(std::abs(y[i]), std::abs(y_new[i]));
                scale[i] = magnitude > 0.0 ? o.rel_tol * magnitude : o.abs_tol;
            }
            // phi feeds back into nothing; ignore it while psi is below abs_tol,
            // where sqrt(2 psi) has unbounded slope.
            if (y[3] < o.abs_tol || y_new[3] < o.abs_tol) {
                scale[4] = 0.0;
            }
        };
        result = ode::integrate_dopri5<7>(f, 0.0, detail::pack(start), config.t_end, opt, outputs,
                                          observer, error_scale);
    } else {
        result = ode::integrate_rk4<7>(f, 0.0, detail::pack(start), config.t_end, config.initial_step,
                                       outputs, observer);
    }
    if (result.outcome == ode::Outcome::step_underflow) {
        termination = Termination::step_underflow;
    }
    traj.meta.termination = termination;
    traj.meta.stats = result.stats;
    return traj;
}

inline Trajectory integrate(const InitialData& data, const SolverConfig& config) {
    return integrate(initial_state(data, ScalarPolicy::allow_static), data.lambda, config);
}

}  // namespace bianchi
