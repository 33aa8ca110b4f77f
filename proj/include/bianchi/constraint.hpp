#pragma once

/**
 * @file constraint.hpp
 * @brief Hamiltonian constraint in reduced and physical variables.
 *
 * Reduced form:  v^2 + 2 u v - Lambda - 8 pi rho - 8 pi psi = 0.
 */

#include <algorithm>
#include <array>
#include <cmath>

#include "bianchi/core_types.hpp"

namespace bianchi {

enum class ConstraintStatus { satisfied, warn, violated };

inline const char* to_string(ConstraintStatus status) {
    switch (status) {
        case ConstraintStatus::satisfied: return "satisfied";
        case ConstraintStatus::warn: return "warn";
        case ConstraintStatus::violated: return "violated";
    }
    return "unknown";
}

struct ConstraintReport {
    double residual = 0.0;
    /// |residual| divided by the largest magnitude among the five additive terms.
    double relative_residual = 0.0;
    ConstraintStatus status = ConstraintStatus::satisfied;
};

inline ConstraintStatus classify(double relative_residual, const Tolerances& tol) {
    if (relative_residual <= tol.constraint_warn) {
        return ConstraintStatus::satisfied;
    }
    if (relative_residual <= tol.constraint_fail) {
        return ConstraintStatus::warn;
    }
    return ConstraintStatus::violated;
}

inline ConstraintReport residual_reduced(const ReducedState& s, double lambda,
                                         const Tolerances& tol = {}) {
    const std::array<double, 5> terms{s.v * s.v, 2.0 * s.u * s.v, lambda, eight_pi * s.rho,
                                      eight_pi * s.psi};
    ConstraintReport report;
    report.residual = terms[0] + terms[1] - terms[2] - terms[3] - terms[4];
    double scale = 0.0;
    for (double term : terms) {
        scale = std::max(scale, std::abs(term));
    }
    if (scale > 0.0) {
        report.relative_residual = std::abs(report.residual) / scale;
    } else {
        report.relative_residual = report.residual == 0.0 ? 0.0 : INFINITY;
    }
    report.status = classify(report.relative_residual, tol);
    return report;
}

/// Constraint written with the scale factors and their rates. Evaluated through
/// the reduced variables so both forms agree bit for bit.
inline ConstraintReport residual_physical(double a, double a_dot, double b, double b_dot,
                                          double rho, double phi_dot, double lambda,
                                          const Tolerances& tol = {}) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw Error(ErrorKind::invalid_input, "scale factors must be positive");
    }
    const ReducedState s{
        .u = a_dot / a,
        .v = b_dot / b,
        .rho = rho,
        .psi = 0.5 * phi_dot * phi_dot,
        .phi = 0.0,
    };
    return residual_reduced(s, lambda, tol);
}

inline ConstraintReport residual_physical(const InitialData& data, const Tolerances& tol = {}) {
    return residual_physical(data.a0, data.a_dot0, data.b0, data.b_dot0, data.rho0, data.phi_dot0,
                             data.lambda, tol);
}

/// Radiation density that closes the constraint for the given expansion rates
/// and scalar energy. Throws ErrorKind::infeasible when it would be negative.
inline double solve_initial_density(double u0, double v0, double psi0, double lambda) {
    const double rho0 = (v0 * v0 + 2.0 * u0 * v0 - lambda - eight_pi * psi0) / eight_pi;
    if (!std::isfinite(rho0)) {
        throw Error(ErrorKind::invalid_input, "non-finite input to the initial constraint");
    }
    if (rho0 < 0.0) {
        throw Error(ErrorKind::infeasible, "initial constraint requires negative matter density");
    }
    return rho0;
}

}  // namespace bianchi
