#pragma once

/**
 * @file ode.hpp
 * @brief Explicit Runge-Kutta drivers for small fixed-size systems.
 *
 * Two independent methods are provided: the Dormand-Prince 5(4) embedded pair
 * with proportional-integral step control, and the classical fixed-step RK4.
 * Both drivers hit a caller-supplied list of output times exactly and report
 * every output (or, without output times, every step) to an observer that may
 * stop the run or modify the state.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace bianchi::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct AdaptiveOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double initial_step = 1e-3;
    double min_step = 1e-14;
    double max_step = 0.1;
    double safety = 0.9;
    double min_factor = 0.2;
    double max_factor = 10.0;
};

struct Stats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

enum class Outcome { completed, stopped, step_underflow };

inline const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::completed: return "completed";
        case Outcome::stopped: return "stopped";
        case Outcome::step_underflow: return "step underflow";
    }
    return "unknown";
}

struct Result {
    Outcome outcome = Outcome::completed;
    double t = 0.0;
    Stats stats;
};

/// What an observer wants after seeing an accepted point.
enum class Action { proceed, modified, stop };

/// Observer that keeps every point.
struct NullObserver {
    template <std::size_t N>
    Action operator()(double, Vec<N>&, bool) const {
        return Action::proceed;
    }
};

/// Mixed absolute/relative error scale, abs_tol + rel_tol * max(|y|, |y_new|).
struct MixedScale {
    template <std::size_t N>
    void operator()(const Vec<N>& y, const Vec<N>& y_new, const AdaptiveOptions& opt,
                    Vec<N>& scale) const {
        for (std::size_t i = 0; i < N; ++i) {
            scale[i] = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        }
    }
};

namespace detail {

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
    Vec<N> out = y;
    for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) {
            acc += c * (*k)[i];
        }
        out[i] += h * acc;
    }
    return out;
}

// Returns the step that lands on `target` when it is within reach.
inline double clip_step(double t, double h, double target) {
    const double remaining = target - t;
    if (h >= remaining || t + 1.01 * h >= target) {
        return remaining;
    }
    return h;
}

}  // namespace detail

/**
 * Integrates y' = f(t, y) from t0 to t_end with the Dormand-Prince 5(4) pair.
 *
 * `rhs(t, y)` returns the derivative. `observer(t, y, is_output)` is called at
 * every accepted step; `y` may be modified when the observer returns
 * Action::modified. `output_times` (sorted, inside (t0, t_end]) are hit
 * exactly; when empty every accepted step counts as an output.
 * `error_scale(y, y_new, opt, scale)` fills the per-component scale of the RMS
 * error norm; a component with scale <= 0 is left out of the norm.
 */
template <std::size_t N, class Rhs, class Observer = NullObserver, class Scale = MixedScale>
Result integrate_dopri5(Rhs&& rhs, double t0, Vec<N> y, double t_end, const AdaptiveOptions& opt,
                        std::span<const double> output_times = {}, Observer&& observer = {},
                        Scale&& error_scale = {}) {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    // PI controller exponents (Hairer-Wanner DOPRI5 defaults).
    static constexpr double beta = 0.04;
    static constexpr double alpha = 0.2 - 0.75 * beta;

    Result result;
    result.t = t0;
    double t = t0;
    double h = std::min(opt.initial_step, opt.max_step);
    double err_old = 1e-4;
    bool last_rejected = false;

    Vec<N> k1 = rhs(t, y);
    ++result.stats.rhs_evals;
    std::size_t next_out = 0;
    Vec<N> scale{};

    while (t < t_end) {
        const double target = next_out < output_times.size() ? output_times[next_out] : t_end;
        if (h < opt.min_step) {
            result.outcome = Outcome::step_underflow;
            result.t = t;
            return result;
        }
        const double step = detail::clip_step(t, h, target);
        const bool lands = step != h || t + step >= target;

        const Vec<N> k2 = rhs(t + c2 * step, detail::axpy<N>(y, step, {{a21, &k1}}));
        const Vec<N> k3 = rhs(t + c3 * step, detail::axpy<N>(y, step, {{a31, &k1}, {a32, &k2}}));
        const Vec<N> k4 =
            rhs(t + c4 * step, detail::axpy<N>(y, step, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Vec<N> k5 = rhs(t + c5 * step,
                              detail::axpy<N>(y, step, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Vec<N> k6 = rhs(
            t + step,
            detail::axpy<N>(y, step, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        Vec<N> y_new =
            detail::axpy<N>(y, step, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        const Vec<N> k7 = rhs(t + step, y_new);
        result.stats.rhs_evals += 6;

        error_scale(y, y_new, opt, scale);
        double sum = 0.0;
        std::size_t counted = 0;
        for (std::size_t i = 0; i < N; ++i) {
            if (!(scale[i] > 0.0)) {
                continue;
            }
            const double delta =
                step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            sum += (delta / scale[i]) * (delta / scale[i]);
            ++counted;
        }
        const double err = counted > 0 ? std::sqrt(sum / static_cast<double>(counted)) : 0.0;

        if (!std::isfinite(err)) {
            ++result.stats.rejected;
            h = step * opt.min_factor;
            last_rejected = true;
            continue;
        }

        if (err <= 1.0) {
            ++result.stats.accepted;
            const double factor = err == 0.0
                ? opt.max_factor
                : std::clamp(opt.safety * std::pow(err, -alpha) * std::pow(err_old, beta),
                             opt.min_factor, opt.max_factor);
            err_old = std::max(err, 1e-4);
            double h_next = std::min(opt.max_step, step * factor);
            if (last_rejected) {
                h_next = std::min(h_next, step);
            }
            // A step shortened to land on an output does not shrink the controller's step.
            if (lands && step < h) {
                h_next = std::max(h_next, std::min(h, opt.max_step));
                if (last_rejected) {
                    h_next = std::min(h_next, h);
                }
            }
            h = h_next;
            last_rejected = false;

            t = lands ? target : t + step;
            y = y_new;
            k1 = k7;

            const bool is_output = output_times.empty() || (lands && next_out < output_times.size());
            if (lands && next_out < output_times.size()) {
                ++next_out;
            }
            const Action action = observer(t, y, is_output);
            if (action == Action::stop) {
                result.outcome = Outcome::stopped;
                result.t = t;
                return result;
            }
            if (action == Action::modified) {
                k1 = rhs(t, y);
                ++result.stats.rhs_evals;
            }
        } else {
            ++result.stats.rejected;
            const double factor =
                std::max(opt.min_factor, opt.safety * std::pow(err, -0.2));
            h = step * factor;
            last_rejected = true;
        }
    }
    result.t = t;
    return result;
}

/**
 * Classical fourth-order Runge-Kutta with a fixed nominal step. Each interval
 * between consecutive output times is split into the smallest number of equal
 * steps not exceeding `step`.
 */
template <std::size_t N, class Rhs, class Observer = NullObserver>
Result integrate_rk4(Rhs&& rhs, double t0, Vec<N> y, double t_end, double step,
                     std::span<const double> output_times = {}, Observer&& observer = {}) {
    Result result;
    double t = t0;

    auto advance = [&](double h) {
        const Vec<N> k1 = rhs(t, y);
        const Vec<N> k2 = rhs(t + 0.5 * h, detail::axpy<N>(y, h, {{0.5, &k1}}));
        const Vec<N> k3 = rhs(t + 0.5 * h, detail::axpy<N>(y, h, {{0.5, &k2}}));
        const Vec<N> k4 = rhs(t + h, detail::axpy<N>(y, h, {{1.0, &k3}}));
        y = detail::axpy<N>(y, h, {{1.0 / 6.0, &k1}, {1.0 / 3.0, &k2}, {1.0 / 3.0, &k3}, {1.0 / 6.0, &k4}});
        result.stats.rhs_evals += 4;
        ++result.stats.accepted;
    };

    std::size_t next_out = 0;
    while (t < t_end) {
        const double target = next_out < output_times.size() ? output_times[next_out] : t_end;
        const double span = target - t;
        const auto pieces = static_cast<long>(std::max(1.0, std::ceil(span / step - 1e-9)));
        const double h = span / static_cast<double>(pieces);
        const double start = t;
        for (long i = 1; i <= pieces; ++i) {
            advance(h);
            t = i == pieces ? target : start + static_cast<double>(i) * h;
            if (!output_times.empty() && i != pieces) {
                continue;
            }
            if (observer(t, y, true) == Action::stop) {
                result.outcome = Outcome::stopped;
                result.t = t;
                return result;
            }
        }
        if (next_out < output_times.size()) {
            ++next_out;
        }
    }
    result.t = t;
    return result;
}

}  // namespace bianchi::ode
