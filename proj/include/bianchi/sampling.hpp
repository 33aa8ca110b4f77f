#pragma once

/**
 * @file sampling.hpp
 * @brief Random constraint-satisfying initial data in the global-existence regime.
 */

#include <cmath>
#include <random>

#include "bianchi/constraint.hpp"
#include "bianchi/core_types.hpp"

namespace bianchi {

struct RegimeRanges {
    double lambda_min = 0.0;
    double lambda_max = 3.0;
    double rho_max = 0.1;
    double psi_max = 0.1;
    double v_max = 2.0;
    double u_min = -2.0;
    double u_max = 4.0;
};

/// Standard cosmological data: unit scale factors, phi0 = 0.
inline InitialData make_data(double u0, double v0, double psi0, double rho0, double lambda) {
    return InitialData{
        .a0 = 1.0,
        .a_dot0 = u0,
        .b0 = 1.0,
        .b_dot0 = v0,
        .phi0 = 0.0,
        .phi_dot0 = std::sqrt(2.0 * psi0),
        .rho0 = rho0,
        .lambda = lambda,
    };
}

/**
 * Draws (Lambda, psi0, v0, u0) uniformly and keeps the draw when the density
 * that closes the constraint lies in (0, rho_max]. The returned data satisfy
 * the constraint up to one rounding.
 */
template <class Rng>
InitialData sample_regime_data(Rng& rng, const RegimeRanges& ranges = {}) {
    std::uniform_real_distribution<double> lambda_dist(ranges.lambda_min, ranges.lambda_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> u_dist(ranges.u_min, ranges.u_max);
    for (;;) {
        const double lambda = lambda_dist(rng);
        // (0, max]: 1 - U maps [0, 1) onto (0, 1].
        const double psi_target = ranges.psi_max * (1.0 - unit(rng));
        const double v0 = ranges.v_max * (1.0 - unit(rng));
        const double u0 = u_dist(rng);
        InitialData data = make_data(u0, v0, psi_target, 0.0, lambda);
        const ReducedState s = from_physical(data);
        if (!(s.psi > 0.0)) {
            continue;
        }
        try {
            const double rho0 = solve_initial_density(s.u, s.v, s.psi, lambda);
            if (rho0 > 0.0 && rho0 <= ranges.rho_max) {
                data.rho0 = rho0;
                return data;
            }
        } catch (const Error&) {
            // infeasible draw, resample
        }
    }
}

}  // namespace bianchi
