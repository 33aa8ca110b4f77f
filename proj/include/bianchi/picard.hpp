#pragma once

/**
 * @file picard.hpp
 * @brief Successive approximations S_{n+1}(t) = S_0 + int_0^t F(S_n(s)) ds on a
 *        uniform grid, with the contraction diagnostics of the local existence
 *        argument.
 *
 * beta_n(t) = |u_{n+1} - u_n| + |v_{n+1} - v_n| + |rho_{n+1} - rho_n|
 *           + |psi_{n+1} - psi_n| + |phi_{n+1} - phi_n|
 * satisfies beta_n(t) <= C int_0^t beta_{n-1}, hence
 * sup beta_n <= sup beta_2 (C zeta)^{n-2} / (n-2)! on [0, zeta].
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "bianchi/core_types.hpp"
#include "bianchi/evolution.hpp"

namespace bianchi {

using Iterate = std::vector<ReducedState>;

struct IterateGrid {
    std::vector<double> times;
    /// iterates[n] is S_n sampled on `times`; iterates[0] is constant.
    std::vector<Iterate> iterates;

    [[nodiscard]] double step() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    [[nodiscard]] double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

struct ContractionReport {
    /// First index stored in `betas` (sup norms of beta_n, n = first_index, ...).
    static constexpr int first_index = 2;
    std::vector<double> betas;
    /// beta_2 (C zeta)^{n-2} / (n-2)! for the fitted C, aligned with `betas`.
    std::vector<double> bounds;
    double fitted_C2 = 0.0;
    bool factorial_bound_ok = false;
    bool converged = false;
    /// Index n of the last computed difference beta_n.
    int last_index = 0;
};

struct SchemeResult {
    IterateGrid grid;
    ContractionReport report;
};

namespace detail {

/// Cumulative Simpson quadrature on a uniform grid: exact composite Simpson at
/// even nodes, the matching partial-panel rule at odd nodes.
inline std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (i % 2 == 0) {
            out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        } else if (i + 1 < n) {
            out[i] = out[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
        } else {
            out[i] = out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        }
    }
    return out;
}

inline double l1_distance(const ReducedState& x, const ReducedState& y) {
    return std::abs(x.u - y.u) + std::abs(x.v - y.v) + std::abs(x.rho - y.rho) +
           std::abs(x.psi - y.psi) + std::abs(x.phi - y.phi);
}

inline std::vector<double> beta_profile(const Iterate& next, const Iterate& prev) {
    std::vector<double> out(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
        out[i] = l1_distance(next[i], prev[i]);
    }
    return out;
}

inline double sup(std::span<const double> f) {
    double m = 0.0;
    for (double x : f) {
        m = std::max(m, x);
    }
    return m;
}

inline void require_uniform(std::span<const double> times) {
    if (times.size() < 3) {
        throw Error(ErrorKind::invalid_input, "grid needs at least 3 points");
    }
    const double h = times[1] - times[0];
    if (!(h > 0.0) || times[0] != 0.0) {
        throw Error(ErrorKind::invalid_input, "grid must start at 0 and increase");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs((times[i] - times[i - 1]) - h) > 1e-9 * h) {
            throw Error(ErrorKind::invalid_input, "grid must be uniform");
        }
    }
}

}  // namespace detail

inline std::vector<double> uniform_grid(double horizon, std::size_t points) {
    if (points < 3) {
        throw Error(ErrorKind::invalid_input, "grid needs at least 3 points");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw Error(ErrorKind::invalid_input, "horizon must be positive");
    }
    std::vector<double> times(points);
    const double h = horizon / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        times[i] = static_cast<double>(i) * h;
    }
    times.back() = horizon;
    return times;
}

/// One sweep of the scheme: next(t) = S_0 + int_0^t F(prev(s)) ds with
/// S_0 taken from `data`. The psi equation uses psi_n on the right.
inline Iterate picard_step(std::span<const ReducedState> prev, std::span<const double> times,
                           const InitialData& data) {
    detail::require_uniform(times);
    if (prev.size() != times.size()) {
        throw Error(ErrorKind::invalid_input, "iterate and grid sizes differ");
    }
    const ReducedState s0 = from_physical(data, ScalarPolicy::allow_static);
    const std::size_t n = times.size();
    std::vector<double> fu(n), fv(n), frho(n), fpsi(n), fphi(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (prev[i].psi < 0.0) {
            throw Error(ErrorKind::invalid_input, "psi component of the iterate is negative");
        }
        const ReducedState d = rhs_reduced(prev[i], data.lambda);
        fu[i] = d.u;
        fv[i] = d.v;
        frho[i] = d.rho;
        fpsi[i] = d.psi;
        fphi[i] = d.phi;
    }
    const double h = times[1] - times[0];
    const auto iu = detail::cumulative_simpson(fu, h);
    const auto iv = detail::cumulative_simpson(fv, h);
    const auto irho = detail::cumulative_simpson(frho, h);
    const auto ipsi = detail::cumulative_simpson(fpsi, h);
    const auto iphi = detail::cumulative_simpson(fphi, h);
    Iterate next(n);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = ReducedState{s0.u + iu[i], s0.v + iv[i], s0.rho + irho[i], s0.psi + ipsi[i],
                               s0.phi + iphi[i]};
    }
    return next;
}

/**
 * Fits C as the largest ratio beta_n(t) / int_0^t beta_{n-1} over n >= 3,
 * ignoring samples at rounding level, then checks the factorial bound for
 * every n >= 3. `beta_profiles[k]` holds beta_{k} on the grid.
 */
inline void fit_factorial_bound(ContractionReport& report,
                                const std::vector<std::vector<double>>& beta_profiles,
                                std::span<const double> times, double noise_floor) {
    const double h = times[1] - times[0];
    const double zeta = times.back();
    double fitted = 0.0;
    for (std::size_t n = 3; n < beta_profiles.size(); ++n) {
        const auto integral = detail::cumulative_simpson(beta_profiles[n - 1], h);
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (beta_profiles[n][i] > noise_floor && integral[i] > 0.0) {
                fitted = std::max(fitted, beta_profiles[n][i] / integral[i]);
            }
        }
    }
    report.fitted_C2 = fitted;
    report.bounds.clear();
    report.factorial_bound_ok = true;
    const double beta2 = report.betas.empty() ? 0.0 : report.betas.front();
    double term = beta2;
    for (std::size_t k = 0; k < report.betas.size(); ++k) {
        const int n = ContractionReport::first_index + static_cast<int>(k);
        if (n > 2) {
            term *= fitted * zeta / static_cast<double>(n - 2);
        }
        report.bounds.push_back(term);
        // Quadrature makes the induction hold to a relative 1e-6, not exactly.
        if (report.betas[k] > term * (1.0 + 1e-6) + noise_floor) {
            report.factorial_bound_ok = false;
        }
    }
}

/**
 * Runs the scheme on [0, horizon] until beta_n < abs_tol (n >= 2) or n_max.
 * Throws ErrorKind::divergence when some beta_n exceeds 1e6 beta_2.
 */
inline SchemeResult run_scheme(const InitialData& data, double horizon, int n_max,
                               std::size_t grid_points, double abs_tol = Tolerances{}.abs_tol) {
    if (n_max < 2) {
        throw Error(ErrorKind::invalid_input, "n_max must be at least 2");
    }
    SchemeResult result;
    IterateGrid& grid = result.grid;
    grid.times = uniform_grid(horizon, grid_points);
    const ReducedState s0 = from_physical(data, ScalarPolicy::allow_static);
    grid.iterates.emplace_back(grid_points, s0);

    const double scale = std::abs(s0.u) + std::abs(s0.v) + std::abs(s0.rho) + std::abs(s0.psi) +
                         std::abs(s0.phi) + 1.0;
    const double noise_floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;

    ContractionReport& report = result.report;
    std::vector<std::vector<double>> profiles;
    for (int n = 0; n <= n_max; ++n) {
        Iterate next = picard_step(grid.iterates.back(), grid.times, data);
        for (auto& s : next) {
            if (!s.finite()) {
                throw Error(ErrorKind::divergence, "iterate is no longer finite");
            }
            // Rounding may push a vanishing psi a hair below zero.
            if (s.psi < 0.0 && s.psi > -noise_floor) {
                s.psi = 0.0;
            }
        }
        profiles.push_back(detail::beta_profile(next, grid.iterates.back()));
        grid.iterates.push_back(std::move(next));
        report.last_index = n;
        if (n < ContractionReport::first_index) {
            continue;
        }
        const double beta = detail::sup(profiles.back());
        report.betas.push_back(beta);
        const double beta2 = report.betas.front();
        if (n > ContractionReport::first_index && beta > 1e6 * beta2) {
            throw Error(ErrorKind::divergence, "beta_n grew beyond 1e6 beta_2");
        }
        if (beta < abs_tol) {
            report.converged = true;
            break;
        }
    }
    fit_factorial_bound(report, profiles, grid.times, noise_floor);
    return result;
}

/**
 * Local horizon from the boundedness argument with unit drift per component:
 * B_i bounds |F_i| on the box |S - S_0|_inf <= 1 (rho, psi clipped at 0) by the
 * triangle inequality, and T = 0.5 / max_i B_i.
 */
inline double pick_horizon(const InitialData& data) {
    const ReducedState s0 = from_physical(data, ScalarPolicy::allow_static);
    const double U = std::abs(s0.u) + 1.0;
    const double V = std::abs(s0.v) + 1.0;
    const double R = s0.rho + 1.0;
    const double P = s0.psi + 1.0;
    const double L = std::abs(data.lambda);
    const double b_u = (2.0 / 3.0) * L + U * U + V * V / 3.0 + (4.0 / 3.0) * U * V + (8.0 / 3.0) * pi * P;
    const double b_v = (2.0 / 3.0) * L + (5.0 / 3.0) * V * V + U * V / 3.0 + (8.0 / 3.0) * pi * P;
    const double b_rho = (4.0 / 3.0) * (U + 2.0 * V) * R;
    const double b_psi = 2.0 * (U + 2.0 * V) * P;
    const double b_phi = std::sqrt(2.0 * P);
    return 0.5 / std::max({b_u, b_v, b_rho, b_psi, b_phi});
}

/**
 * With C the largest |2 (u_n + 2 v_n) psi_n| over all iterates, checks that
 * every iterate keeps psi >= psi0 / 2 on [0, psi0 / (2C)].
 */
inline bool psi_lower_bound_check(const IterateGrid& grid, const InitialData& data) {
    const ReducedState s0 = from_physical(data, ScalarPolicy::allow_static);
    if (!(s0.psi > 0.0)) {
        throw Error(ErrorKind::invalid_input, "psi0 must be positive");
    }
    double c = 0.0;
    for (const auto& iterate : grid.iterates) {
        for (const auto& s : iterate) {
            c = std::max(c, std::abs(2.0 * (s.u + 2.0 * s.v) * s.psi));
        }
    }
    const double window = c > 0.0 ? s0.psi / (2.0 * c) : std::numeric_limits<double>::infinity();
    for (const auto& iterate : grid.iterates) {
        for (std::size_t i = 0; i < grid.times.size() && grid.times[i] <= window; ++i) {
            if (iterate[i].psi < 0.5 * s0.psi) {
                return false;
            }
        }
    }
    return true;
}

/// True when doubling the grid resolution moves every beta_n above `floor` by
/// less than 1 % (relative).
inline bool grid_refinement_stable(const InitialData& data, double horizon, int n_max,
                                   std::size_t grid_points, double abs_tol = Tolerances{}.abs_tol,
                                   double floor = 1e-12) {
    const auto coarse = run_scheme(data, horizon, n_max, grid_points, abs_tol).report;
    const auto fine = run_scheme(data, horizon, n_max, 2 * grid_points - 1, abs_tol).report;
    const std::size_t common = std::min(coarse.betas.size(), fine.betas.size());
    for (std::size_t k = 0; k < common; ++k) {
        if (std::max(coarse.betas[k], fine.betas[k]) <= floor) {
            continue;
        }
        if (std::abs(coarse.betas[k] - fine.betas[k]) > 0.01 * std::max(coarse.betas[k], fine.betas[k])) {
            return false;
        }
    }
    return true;
}

}  // namespace bianchi
