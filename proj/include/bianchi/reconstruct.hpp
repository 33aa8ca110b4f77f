#pragma once

/**
 * @file reconstruct.hpp
 * @brief Physical quantities a, b, phi from a reduced trajectory, with residual
 *        checks of the original second-order field equations.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bianchi/constraint.hpp"
#include "bianchi/core_types.hpp"
#include "bianchi/trajectory.hpp"

namespace bianchi {

/// Residuals of the second-order system at one sample.
struct SecondOrderResiduals {
    double hamiltonian = 0.0;        ///< (b'/b)^2 + 2 a'b'/(ab) - Lambda - 8 pi rho - 4 pi phi'^2
    double evolution_b = 0.0;        ///< (b'/b)^2 + 2 b''/b - Lambda + 8 pi rho / 3 + 4 pi phi'^2
    double evolution_a = 0.0;        ///< a''/a + a'b'/(ab) + b''/b - Lambda + 8 pi rho / 3 + 4 pi phi'^2
    double scalar_wave = NAN;        ///< phi'' phi' + (a'/a + 2 b'/b) phi'^2; NaN where psi <= abs_tol
    double radiation = 0.0;          ///< rho' + (4/3)(u + 2v) rho
    double radiation_alt = 0.0;      ///< rho' + (4/3)(u + v) rho, reported for comparison only
    bool one_sided = false;          ///< endpoint sample, one-sided stencils
};

struct PhysicalTrajectory {
    std::vector<double> times;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> phi;
    std::vector<double> phi_dot;
    std::vector<double> rho;
    std::vector<SecondOrderResiduals> residuals;

    [[nodiscard]] std::size_t size() const { return times.size(); }
};

namespace detail {

/// Fornberg's recursion: weights of the derivatives up to `order` at `x0`
/// for the nodes `x`. Returns w[k][j] for derivative k, node j.
inline std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> x, int order) {
    const std::size_t n = x.size();
    const auto m = static_cast<std::size_t>(order);
    std::vector<std::vector<double>> w(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    w[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    w[k][i] = c1 * (static_cast<double>(k) * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                w[k][j] = (c4 * w[k][j] - static_cast<double>(k) * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    return w;
}

/// Derivative of the given order at sample i: centered three-point stencil in
/// the interior, five-point one-sided stencil at the two ends.
inline double derivative_at(std::span<const double> t, std::span<const double> f, std::size_t i,
                            int order) {
    const std::size_t n = t.size();
    std::size_t first = 0;
    std::size_t count = 3;
    if (i == 0) {
        first = 0;
        count = 5;
    } else if (i + 1 == n) {
        first = n - 5;
        count = 5;
    } else {
        first = i - 1;
    }
    const auto nodes = t.subspan(first, count);
    const auto w = fd_weights(t[i], nodes, order);
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        acc += w[static_cast<std::size_t>(order)][j] * f[first + j];
    }
    return acc;
}

}  // namespace detail

/**
 * a and b are read from the integrated extended state, phi from the
 * integrated phi equation and phi' = sqrt(2 psi) (non-negative by choice of
 * branch). Second derivatives come from finite differences of the samples.
 */
inline PhysicalTrajectory reconstruct(const Trajectory& traj, const InitialData& data,
                                      const Tolerances& tol = {}) {
    if (traj.size() < 5) {
        throw Error(ErrorKind::invalid_input, "reconstruction needs at least 5 samples");
    }
    const double lambda = data.lambda;
    PhysicalTrajectory out;
    out.times = traj.times;
    const std::size_t n = traj.size();
    out.a.reserve(n);
    out.b.reserve(n);
    out.phi.reserve(n);
    out.phi_dot.reserve(n);
    out.rho.reserve(n);
    for (const auto& s : traj.states) {
        if (!(s.a > 0.0) || !(s.b > 0.0) || s.reduced.psi < 0.0) {
            throw Error(ErrorKind::invalid_input, "trajectory has a, b <= 0 or psi < 0");
        }
        out.a.push_back(s.a);
        out.b.push_back(s.b);
        out.phi.push_back(s.reduced.phi);
        out.phi_dot.push_back(std::sqrt(2.0 * s.reduced.psi));
        out.rho.push_back(s.reduced.rho);
    }

    const std::span<const double> t(out.times);
    out.residuals.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ReducedState& s = traj.states[i].reduced;
        const double a = out.a[i];
        const double b = out.b[i];
        const double u = s.u;
        const double v = s.v;
        const double phi_dot = out.phi_dot[i];
        const double a_ddot = detail::derivative_at(t, out.a, i, 2);
        const double b_ddot = detail::derivative_at(t, out.b, i, 2);
        const double rho_dot = detail::derivative_at(t, out.rho, i, 1);
        const double matter = (8.0 / 3.0) * pi * s.rho + 4.0 * pi * phi_dot * phi_dot;

        SecondOrderResiduals r;
        r.hamiltonian = residual_physical(a, u * a, b, v * b, s.rho, phi_dot, lambda, tol).residual;
        r.evolution_b = v * v + 2.0 * b_ddot / b - lambda + matter;
        r.evolution_a = a_ddot / a + u * v + b_ddot / b - lambda + matter;
        if (s.psi > tol.abs_tol) {
            const double phi_ddot = detail::derivative_at(t, out.phi, i, 2);
            r.scalar_wave = phi_ddot * phi_dot + (u + 2.0 * v) * phi_dot * phi_dot;
        }
        r.radiation = rho_dot + (4.0 / 3.0) * (u + 2.0 * v) * s.rho;
        r.radiation_alt = rho_dot + (4.0 / 3.0) * (u + v) * s.rho;
        r.one_sided = i == 0 || i + 1 == n;
        out.residuals.push_back(r);
    }
    return out;
}

struct LineElement {
    /// Diagonal metric coefficients (g_tt, g_11, g_22, g_33).
    std::array<double, 4> coefficients{};
    std::string text;
};

inline LineElement line_element(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw Error(ErrorKind::invalid_input, "scale factors must be positive");
    }
    LineElement out;
    out.coefficients = {-1.0, a * a, b * b, b * b};
    std::ostringstream os;
    os.precision(10);
    os << "-dt^2 + " << out.coefficients[1] << " (dx1)^2 + " << out.coefficients[2]
       << " [(dx2)^2 + (dx3)^2]";
    out.text = os.str();
    return out;
}

inline LineElement line_element(const PhysicalTrajectory& traj, std::size_t sample) {
    if (sample >= traj.size()) {
        throw Error(ErrorKind::invalid_input, "sample index out of range");
    }
    return line_element(traj.a[sample], traj.b[sample]);
}

}  // namespace bianchi
