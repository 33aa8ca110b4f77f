#pragma once

/**
 * @file core_types.hpp
 * @brief State spaces, initial data and tolerance records for the Bianchi I
 *        Einstein-scalar-field-radiation system.
 *
 * Reduced variables: u = a'/a, v = b'/b, psi = (phi')^2 / 2, together with the
 * radiation density rho and the scalar field phi itself. All quantities are in
 * geometric units with the factor 8*pi kept explicit.
 */

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bianchi {

inline constexpr double pi = std::numbers::pi;
inline constexpr double eight_pi = 8.0 * std::numbers::pi;

enum class ErrorKind {
    invalid_input,
    infeasible,
    regime_violation,
    pole,
    degenerate,
    divergence,
    config,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_input: return "invalid input";
        case ErrorKind::infeasible: return "infeasible";
        case ErrorKind::regime_violation: return "regime violation";
        case ErrorKind::pole: return "pole";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::divergence: return "divergence";
        case ErrorKind::config: return "config error";
    }
    return "unknown";
}

/// Every failure raised by the library carries a kind so front ends can map
/// it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ReducedState {
    double u = 0.0;
    double v = 0.0;
    double rho = 0.0;
    double psi = 0.0;
    double phi = 0.0;

    [[nodiscard]] bool finite() const {
        return std::isfinite(u) && std::isfinite(v) && std::isfinite(rho) && std::isfinite(psi) &&
               std::isfinite(phi);
    }

    friend bool operator==(const ReducedState&, const ReducedState&) = default;
};

/// Reduced state plus the scale factors, carried so that conserved quantities
/// and the metric can be recovered without a second quadrature.
struct ExtendedState {
    ReducedState reduced;
    double a = 1.0;
    double b = 1.0;

    [[nodiscard]] bool finite() const {
        return reduced.finite() && std::isfinite(a) && std::isfinite(b);
    }

    friend bool operator==(const ExtendedState&, const ExtendedState&) = default;
};

/// The seven Cauchy numbers (a, a', b, b', phi, phi', rho at t = 0) plus the
/// cosmological constant.
struct InitialData {
    double a0 = 1.0;
    double a_dot0 = 0.0;
    double b0 = 1.0;
    double b_dot0 = 0.0;
    double phi0 = 0.0;
    double phi_dot0 = 0.0;
    double rho0 = 0.0;
    double lambda = 0.0;

    friend bool operator==(const InitialData&, const InitialData&) = default;
};

struct Tolerances {
    double abs_tol = 1e-11;
    double rel_tol = 1e-11;
    double constraint_warn = 1e-8;
    double constraint_fail = 1e-5;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(constraint_warn > 0.0) ||
            !(constraint_fail > 0.0)) {
            throw Error(ErrorKind::invalid_input, "tolerances must be positive");
        }
        if (constraint_warn > constraint_fail) {
            throw Error(ErrorKind::invalid_input, "constraint_warn must not exceed constraint_fail");
        }
    }
};

/// How the map from physical data treats a static scalar field (phi'(0) = 0).
/// The global-existence argument needs phi'(0) > 0; exact vacuum and radiation
/// solutions need phi'(0) = 0.
enum class ScalarPolicy { strict, allow_static };

inline void validate(const InitialData& data, ScalarPolicy policy = ScalarPolicy::strict) {
    const bool finite = std::isfinite(data.a0) && std::isfinite(data.a_dot0) &&
                        std::isfinite(data.b0) && std::isfinite(data.b_dot0) &&
                        std::isfinite(data.phi0) && std::isfinite(data.phi_dot0) &&
                        std::isfinite(data.rho0) && std::isfinite(data.lambda);
    if (!finite) {
        throw Error(ErrorKind::invalid_input, "initial data must be finite");
    }
    if (!(data.a0 > 0.0)) {
        throw Error(ErrorKind::invalid_input, "a0 must be positive");
    }
    if (!(data.b0 > 0.0)) {
        throw Error(ErrorKind::invalid_input, "b0 must be positive");
    }
    if (policy == ScalarPolicy::strict ? !(data.phi_dot0 > 0.0) : data.phi_dot0 < 0.0) {
        throw Error(ErrorKind::invalid_input,
                    policy == ScalarPolicy::strict ? "phi_dot0 must be positive"
                                                   : "phi_dot0 must be non-negative");
    }
    if (data.rho0 < 0.0) {
        throw Error(ErrorKind::invalid_input, "rho0 must be non-negative");
    }
}

/// u0 = a'/a, v0 = b'/b, psi0 = phi'^2 / 2 at t = 0.
inline ReducedState from_physical(const InitialData& data,
                                  ScalarPolicy policy = ScalarPolicy::strict) {
    validate(data, policy);
    return ReducedState{
        .u = data.a_dot0 / data.a0,
        .v = data.b_dot0 / data.b0,
        .rho = data.rho0,
        .psi = 0.5 * data.phi_dot0 * data.phi_dot0,
        .phi = data.phi0,
    };
}

inline ExtendedState initial_state(const InitialData& data,
                                   ScalarPolicy policy = ScalarPolicy::allow_static) {
    return ExtendedState{from_physical(data, policy), data.a0, data.b0};
}

/// The hypotheses under which the global-existence bounds are certified:
/// Lambda >= 0 and b'(0) > 0, with strictly positive matter and scalar energy.
inline bool in_global_regime(const InitialData& data) {
    return data.lambda >= 0.0 && data.b_dot0 > 0.0 && data.rho0 > 0.0 && data.phi_dot0 > 0.0;
}

}  // namespace bianchi
