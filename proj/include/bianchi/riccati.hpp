#pragma once

/**
 * @file riccati.hpp
 * @brief The expansion scalar H = u + 2v and its Riccati upper envelope.
 *
 * The comparison equation is y' = K^2 - alpha^2 y^2 with y(t0) = y0. Writing
 * h1 = alpha y0 - K, h2 = alpha y0 + K, its solution is
 *
 *     y(t) = (K / alpha) [1 + 2 h1 / (h2 exp(2 alpha K (t - t0)) - h1)],
 *
 * which tends to K / alpha. H is bounded above by the solution W with K = C0,
 * alpha = 1, C0^2 = 3 Lambda + 8 pi rho0 and W(0) = H(0).
 */

#include <cmath>
#include <optional>

#include "bianchi/core_types.hpp"

namespace bianchi {

inline double expansion_scalar(const ReducedState& s) { return s.u + 2.0 * s.v; }

struct RiccatiParams {
    double K = 1.0;
    double alpha = 1.0;
    double y0 = 0.0;
    double t0 = 0.0;

    void validate() const {
        if (!(K > 0.0) || !(alpha > 0.0) || !std::isfinite(K) || !std::isfinite(alpha)) {
            throw Error(ErrorKind::invalid_input, "Riccati parameters need K > 0 and alpha > 0");
        }
        if (!std::isfinite(y0) || !std::isfinite(t0)) {
            throw Error(ErrorKind::invalid_input, "Riccati initial value must be finite");
        }
    }
};

/// Time of the pole of the closed form, if any (only when y0 < -K / alpha).
inline std::optional<double> riccati_pole(const RiccatiParams& p) {
    p.validate();
    const double h1 = p.alpha * p.y0 - p.K;
    const double h2 = p.alpha * p.y0 + p.K;
    if (!(h2 < 0.0)) {
        return std::nullopt;
    }
    return p.t0 + std::log(h1 / h2) / (2.0 * p.alpha * p.K);
}

inline double riccati_closed_form(const RiccatiParams& p, double t) {
    p.validate();
    if (t < p.t0) {
        throw Error(ErrorKind::invalid_input, "closed form is evaluated forward from t0 only");
    }
    if (t == p.t0) {
        return p.y0;
    }
    const double h1 = p.alpha * p.y0 - p.K;
    const double h2 = p.alpha * p.y0 + p.K;
    // Multiplying through by exp(-2 alpha K (t - t0)) keeps the expression finite
    // for large t; 1 + 2 h1 E / (h2 - h1 E) is folded into a single fraction.
    if (h2 == 0.0) {
        return -p.K / p.alpha;
    }
    const double decay = std::exp(-2.0 * p.alpha * p.K * (t - p.t0));
    const double denominator = h2 - h1 * decay;
    // The denominator starts at 2K > 0 and only changes sign when h2 < 0.
    if (!(denominator > 0.0)) {
        throw Error(ErrorKind::pole, "closed form has a pole before t");
    }
    return (p.K / p.alpha) * (h2 + h1 * decay) / denominator;
}

/// Degenerate envelope (C0 = 0): W' = -W^2, W(0) = h0.
inline double envelope_w_degenerate(double h0, double t) {
    const double denominator = 1.0 + h0 * t;
    if (!(denominator > 0.0)) {
        throw Error(ErrorKind::pole, "degenerate envelope has a pole before t");
    }
    return h0 / denominator;
}

inline double envelope_c0(double rho0, double lambda) {
    return std::sqrt(3.0 * lambda + eight_pi * rho0);
}

/// W(t) solving W' = C0^2 - W^2, W(0) = h0, with C0^2 = 3 Lambda + 8 pi rho0.
inline double envelope_w(double rho0, double lambda, double h0, double t) {
    if (lambda < 0.0 || rho0 < 0.0) {
        throw Error(ErrorKind::invalid_input, "envelope needs Lambda >= 0 and rho0 >= 0");
    }
    const double c0_squared = 3.0 * lambda + eight_pi * rho0;
    if (c0_squared == 0.0) {
        throw Error(ErrorKind::degenerate, "3 Lambda + 8 pi rho0 vanishes");
    }
    return riccati_closed_form(RiccatiParams{.K = std::sqrt(c0_squared), .alpha = 1.0, .y0 = h0, .t0 = 0.0},
                               t);
}

/// Envelope value for diagnostics: falls back to the degenerate branch and
/// returns NaN wherever W is undefined.
inline double envelope_value(double rho0, double lambda, double h0, double t) {
    if (lambda < 0.0 || rho0 < 0.0 || !std::isfinite(h0)) {
        return NAN;
    }
    try {
        if (3.0 * lambda + eight_pi * rho0 == 0.0) {
            return envelope_w_degenerate(h0, t);
        }
        return envelope_w(rho0, lambda, h0, t);
    } catch (const Error&) {
        return NAN;
    }
}

}  // namespace bianchi
