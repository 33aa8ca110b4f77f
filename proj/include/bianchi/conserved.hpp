#pragma once

/**
 * @file conserved.hpp
 * @brief First integrals of the radiation and scalar-field equations.
 *
 * With V = a b^2 the comoving volume, rho' = -(4/3)(u + 2v) rho and
 * psi' = -2(u + 2v) psi integrate to rho V^{4/3} = const and psi V^2 = const.
 */

#include <algorithm>
#include <cmath>
#include <span>

#include "bianchi/core_types.hpp"

namespace bianchi {

struct ConservedSnapshot {
    double radiation_invariant = 0.0;  ///< rho (a b^2)^{4/3}
    double scalar_invariant = 0.0;     ///< psi (a b^2)^2
    double momentum_invariant = 0.0;   ///< sqrt(2 psi) a b^2, i.e. phi' times the volume
};

struct ConservedDrift {
    double radiation = 0.0;
    double scalar = 0.0;
    double momentum = 0.0;

    [[nodiscard]] double max() const { return std::max({radiation, scalar, momentum}); }
};

inline ConservedSnapshot snapshot(const ExtendedState& state) {
    if (!(state.a > 0.0) || !(state.b > 0.0)) {
        throw Error(ErrorKind::invalid_input, "scale factors must be positive");
    }
    const double volume = state.a * state.b * state.b;
    const double psi = std::max(state.reduced.psi, 0.0);
    return ConservedSnapshot{
        .radiation_invariant = state.reduced.rho * std::pow(volume, 4.0 / 3.0),
        .scalar_invariant = state.reduced.psi * volume * volume,
        .momentum_invariant = std::sqrt(2.0 * psi) * volume,
    };
}

namespace detail {

inline double relative_change(double value, double reference) {
    if (value == reference) {
        return 0.0;
    }
    if (reference == 0.0) {
        return INFINITY;
    }
    return std::abs(value - reference) / std::abs(reference);
}

}  // namespace detail

/// Largest relative deviation of each invariant from its value at the first sample.
inline ConservedDrift drift(std::span<const ExtendedState> states) {
    ConservedDrift out;
    if (states.empty()) {
        throw Error(ErrorKind::invalid_input, "drift needs at least one sample");
    }
    const ConservedSnapshot ref = snapshot(states.front());
    for (const auto& state : states) {
        const ConservedSnapshot s = snapshot(state);
        out.radiation = std::max(out.radiation,
                                 detail::relative_change(s.radiation_invariant, ref.radiation_invariant));
        out.scalar =
            std::max(out.scalar, detail::relative_change(s.scalar_invariant, ref.scalar_invariant));
        out.momentum = std::max(out.momentum,
                                detail::relative_change(s.momentum_invariant, ref.momentum_invariant));
    }
    return out;
}

}  // namespace bianchi
