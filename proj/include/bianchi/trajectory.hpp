#pragma once

/**
 * @file trajectory.hpp
 * @brief Sampled solutions with per-sample diagnostics.
 */

#include <cmath>
#include <string>
#include <vector>

#include "bianchi/conserved.hpp"
#include "bianchi/constraint.hpp"
#include "bianchi/core_types.hpp"
#include "bianchi/ode.hpp"
#include "bianchi/riccati.hpp"

namespace bianchi {

enum class Termination { completed, blow_up, step_underflow, sample_limit };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::blow_up: return "blow-up detected";
        case Termination::step_underflow: return "step underflow";
        case Termination::sample_limit: return "sample limit reached";
    }
    return "unknown";
}

struct SampleDiagnostics {
    ConstraintReport constraint;
    double H = 0.0;
    /// Riccati envelope at this time; NaN when it is undefined (Lambda < 0, pole).
    double W = NAN;
    ConservedSnapshot conserved;
};

struct TrajectoryMeta {
    std::string solver;
    double abs_tol = 0.0;
    double rel_tol = 0.0;
    double initial_step = 0.0;
    double min_step = 0.0;
    double max_step = 0.0;
    Termination termination = Termination::completed;
    ode::Stats stats;
};

struct Trajectory {
    double lambda = 0.0;
    std::vector<double> times;
    std::vector<ExtendedState> states;
    std::vector<SampleDiagnostics> diagnostics;
    TrajectoryMeta meta;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] bool empty() const { return times.empty(); }
};

inline SampleDiagnostics diagnose(const ExtendedState& state, double t, double lambda, double rho0,
                                  double h0, const Tolerances& tol = {}) {
    SampleDiagnostics d;
    d.constraint = residual_reduced(state.reduced, lambda, tol);
    d.H = expansion_scalar(state.reduced);
    d.W = envelope_value(rho0, lambda, h0, t);
    if (state.a > 0.0 && state.b > 0.0) {
        d.conserved = snapshot(state);
    } else {
        d.conserved = {NAN, NAN, NAN};
    }
    return d;
}

/// Rebuilds every diagnostic from the stored states; the envelope starts from
/// the first sample.
inline void recompute_diagnostics(Trajectory& traj, const Tolerances& tol = {}) {
    traj.diagnostics.clear();
    if (traj.empty()) {
        return;
    }
    const double rho0 = traj.states.front().reduced.rho;
    const double h0 = expansion_scalar(traj.states.front().reduced);
    traj.diagnostics.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        traj.diagnostics.push_back(diagnose(traj.states[i], traj.times[i], traj.lambda, rho0, h0, tol));
    }
}

inline ConservedDrift drift(const Trajectory& traj) {
    return drift(std::span<const ExtendedState>(traj.states));
}

/// Largest absolute difference of the reduced components at matching sample
/// times. Samples whose times differ are skipped.
inline double reduced_sup_distance(const Trajectory& lhs, const Trajectory& rhs) {
    double worst = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        while (j < rhs.size() && rhs.times[j] < lhs.times[i]) {
            ++j;
        }
        if (j == rhs.size()) {
            break;
        }
        if (std::abs(rhs.times[j] - lhs.times[i]) > 1e-12 * (1.0 + std::abs(lhs.times[i]))) {
            continue;
        }
        const ReducedState& x = lhs.states[i].reduced;
        const ReducedState& y = rhs.states[j].reduced;
        worst = std::max({worst, std::abs(x.u - y.u), std::abs(x.v - y.v), std::abs(x.rho - y.rho),
                          std::abs(x.psi - y.psi), std::abs(x.phi - y.phi)});
    }
    return worst;
}

}  // namespace bianchi
