#pragma once

/**
 * @file bounds.hpp
 * @brief Global-existence certificate over a sampled trajectory.
 *
 * For Lambda >= 0, b'(0) > 0 and rho0, psi0 > 0 the solution satisfies
 *   v > 0,  v + 2u > 0,
 *   0 < rho <= rho0 and 0 < psi <= psi0, both non-increasing,
 *   Lambda < v (v + 2u) <= Lambda + 8 pi rho0 + 8 pi psi0,
 *   H = u + 2v <= W, the Riccati envelope with W(0) = H(0).
 * `certify` checks each of these at every sample and records the worst margin.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>

#include "bianchi/core_types.hpp"
#include "bianchi/riccati.hpp"
#include "bianchi/trajectory.hpp"

namespace bianchi {

enum class Condition {
    v_positive,
    v_plus_2u_positive,
    rho_monotone,
    psi_monotone,
    constraint_band,
    envelope,
};

inline constexpr std::array<Condition, 6> all_conditions{
    Condition::v_positive,   Condition::v_plus_2u_positive, Condition::rho_monotone,
    Condition::psi_monotone, Condition::constraint_band,    Condition::envelope,
};

/// Machine-readable key of a condition.
inline std::string_view key(Condition c) {
    switch (c) {
        case Condition::v_positive: return "v_positive";
        case Condition::v_plus_2u_positive: return "v_plus_2u_positive";
        case Condition::rho_monotone: return "rho_monotone";
        case Condition::psi_monotone: return "psi_monotone";
        case Condition::constraint_band: return "constraint_band";
        case Condition::envelope: return "envelope";
    }
    return "unknown";
}

inline std::string_view describe(Condition c) {
    switch (c) {
        case Condition::v_positive: return "v > 0";
        case Condition::v_plus_2u_positive: return "v + 2u > 0";
        case Condition::rho_monotone: return "rho non-increasing, 0 < rho <= rho0";
        case Condition::psi_monotone: return "psi non-increasing, 0 < psi <= psi0";
        case Condition::constraint_band: return "Lambda < v(v+2u) <= Lambda + 8 pi rho0 + 8 pi psi0";
        case Condition::envelope: return "H <= W";
    }
    return "unknown";
}

struct ConditionRecord {
    Condition condition = Condition::v_positive;
    bool passed = true;
    /// Smallest margin seen; positive means satisfied. Scaled as described in certify().
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_time = 0.0;
    /// Earliest sample time at which the condition failed (NaN when it never did).
    double first_failure_time = NAN;
};

struct Certificate {
    std::array<ConditionRecord, 6> records{};
    double slack = 0.0;
    /// Diagnostic only: u is not controlled by the argument.
    double min_u = std::numeric_limits<double>::infinity();
    double min_u_time = 0.0;
    std::size_t samples = 0;

    [[nodiscard]] bool passed() const {
        return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.passed; });
    }

    [[nodiscard]] const ConditionRecord& operator[](Condition c) const {
        return records[static_cast<std::size_t>(c)];
    }

    friend bool operator==(const Certificate& lhs, const Certificate& rhs) {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        for (std::size_t i = 0; i < lhs.records.size(); ++i) {
            const auto& l = lhs.records[i];
            const auto& r = rhs.records[i];
            if (l.condition != r.condition || l.passed != r.passed ||
                !same(l.worst_margin, r.worst_margin) || !same(l.worst_time, r.worst_time) ||
                !same(l.first_failure_time, r.first_failure_time)) {
                return false;
            }
        }
        return same(lhs.slack, rhs.slack) && same(lhs.min_u, rhs.min_u) &&
               same(lhs.min_u_time, rhs.min_u_time) && lhs.samples == rhs.samples;
    }
};

/// Throws ErrorKind::regime_violation unless the data satisfy the hypotheses
/// of the global-existence argument.
inline void require_global_regime(const InitialData& data) {
    validate(data, ScalarPolicy::allow_static);
    if (data.lambda < 0.0) {
        throw Error(ErrorKind::regime_violation, "Lambda must be non-negative");
    }
    if (!(data.b_dot0 > 0.0)) {
        throw Error(ErrorKind::regime_violation, "b_dot0 must be positive");
    }
    if (!(data.rho0 > 0.0)) {
        throw Error(ErrorKind::regime_violation, "rho0 must be positive");
    }
    if (!(data.phi_dot0 > 0.0)) {
        throw Error(ErrorKind::regime_violation, "phi_dot0 must be positive");
    }
}

/**
 * Evaluates every condition at every sample.
 *
 * Margins: v and v + 2u are reported raw and must be strictly positive. For
 * rho and psi the margin is the smallest of x/x0, (x0 - x)/x0 and the relative
 * decrease between consecutive samples. The constraint band margins are
 * divided by Lambda + 8 pi rho0 + 8 pi psi0, and H <= W by max(1, |W|).
 * Every non-strict comparison tolerates `slack` = 10 * constraint_warn.
 */
inline Certificate certify(const Trajectory& traj, const InitialData& data, const Tolerances& tol = {}) {
    require_global_regime(data);
    tol.validate();
    if (traj.empty() || traj.states.size() != traj.times.size()) {
        throw Error(ErrorKind::invalid_input, "trajectory is empty or inconsistent");
    }

    const ReducedState start = from_physical(data);
    const double lambda = data.lambda;
    const double rho0 = data.rho0;
    const double psi0 = start.psi;
    const double band_top = lambda + eight_pi * rho0 + eight_pi * psi0;
    const double h0 = expansion_scalar(traj.states.front().reduced);

    Certificate cert;
    cert.slack = 10.0 * tol.constraint_warn;
    cert.samples = traj.size();
    for (std::size_t i = 0; i < cert.records.size(); ++i) {
        cert.records[i].condition = all_conditions[i];
    }

    auto note = [&](Condition c, double margin, double t, bool ok) {
        ConditionRecord& r = cert.records[static_cast<std::size_t>(c)];
        if (margin < r.worst_margin || std::isnan(margin)) {
            r.worst_margin = margin;
            r.worst_time = t;
        }
        if (!ok && r.passed) {
            r.passed = false;
            r.first_failure_time = t;
        }
    };

    const double slack = cert.slack;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        const ReducedState& s = traj.states[i].reduced;

        note(Condition::v_positive, s.v, t, s.v > 0.0);
        const double v2u = s.v + 2.0 * s.u;
        note(Condition::v_plus_2u_positive, v2u, t, v2u > 0.0);

        auto monotone = [&](Condition c, double x, double x0, double previous) {
            double margin = std::min(x / x0, (x0 - x) / x0);
            bool ok = x > 0.0 && (x0 - x) / x0 >= -slack;
            if (i > 0) {
                const double decrease = previous > 0.0 ? (previous - x) / previous : -INFINITY;
                margin = std::min(margin, decrease);
                ok = ok && decrease >= -slack;
            }
            note(c, margin, t, ok);
        };
        monotone(Condition::rho_monotone, s.rho, rho0, i > 0 ? traj.states[i - 1].reduced.rho : rho0);
        monotone(Condition::psi_monotone, s.psi, psi0, i > 0 ? traj.states[i - 1].reduced.psi : psi0);

        const double band = s.v * v2u;
        const double lower = (band - lambda) / band_top;
        const double upper = (band_top - band) / band_top;
        note(Condition::constraint_band, std::min(lower, upper), t, lower >= -slack && upper >= -slack);

        const double h = expansion_scalar(s);
        double envelope_margin = NAN;
        bool envelope_ok = false;
        try {
            const double w = envelope_w(rho0, lambda, h0, t);
            envelope_margin = (w - h) / std::max(1.0, std::abs(w));
            envelope_ok = envelope_margin >= -slack;
        } catch (const Error&) {
            envelope_ok = false;
        }
        note(Condition::envelope, envelope_margin, t, envelope_ok);

        if (s.u < cert.min_u) {
            cert.min_u = s.u;
            cert.min_u_time = t;
        }
    }
    return cert;
}

}  // namespace bianchi
