#pragma once

/**
 * @file io.hpp
 * @brief Flat key/value configuration files, trajectory CSV and certificate
 *        serialization.
 *
 * Numbers are written with 17 significant digits and '.' as the decimal
 * separator, so a written CSV reads back to identical doubles.
 */

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "bianchi/bounds.hpp"
#include "bianchi/core_types.hpp"
#include "bianchi/picard.hpp"
#include "bianchi/trajectory.hpp"

namespace bianchi::io {

inline std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (ec != std::errc{}) {
        throw Error(ErrorKind::invalid_input, "cannot format number");
    }
    return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text == "nan") {
        return NAN;
    }
    if (text == "inf") {
        return INFINITY;
    }
    if (text == "-inf") {
        return -INFINITY;
    }
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

/// "key = value" lines; '#' starts a comment. Later keys override earlier ones
/// while the first-seen order is kept for echoing.
class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& in) {
        KeyValueFile file;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view view(line);
            if (const auto hash = view.find('#'); hash != std::string_view::npos) {
                view = view.substr(0, hash);
            }
            view = trim(view);
            if (view.empty()) {
                continue;
            }
            const auto eq = view.find('=');
            if (eq == std::string_view::npos) {
                throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key = value");
            }
            const std::string key(trim(view.substr(0, eq)));
            if (key.empty()) {
                throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": empty key");
            }
            file.set(key, std::string(trim(view.substr(eq + 1))));
        }
        return file;
    }

    static KeyValueFile parse(std::string_view text) {
        std::istringstream in{std::string(text)};
        return parse(in);
    }

    void set(const std::string& key, std::string value) {
        if (!values_.contains(key)) {
            order_.push_back(key);
        }
        values_[key] = std::move(value);
    }

    [[nodiscard]] bool contains(const std::string& key) const { return values_.contains(key); }

    [[nodiscard]] std::optional<std::string> get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] double get_double(const std::string& key, double fallback) const {
        const auto raw = get(key);
        if (!raw) {
            return fallback;
        }
        return require_double(key, *raw);
    }

    [[nodiscard]] double require_double(const std::string& key) const {
        const auto raw = get(key);
        if (!raw) {
            throw Error(ErrorKind::config, "missing key '" + key + "'");
        }
        return require_double(key, *raw);
    }

    [[nodiscard]] const std::vector<std::string>& keys() const { return order_; }

    void write(std::ostream& out) const {
        for (const auto& key : order_) {
            out << key << " = " << values_.at(key) << '\n';
        }
    }

private:
    static double require_double(const std::string& key, const std::string& raw) {
        const auto value = parse_double(raw);
        if (!value) {
            throw Error(ErrorKind::config, "key '" + key + "': '" + raw + "' is not a number");
        }
        return *value;
    }

    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

inline constexpr std::string_view trajectory_header =
    "t,u,v,rho,psi,phi,a,b,H,constraint_residual,radiation_invariant,scalar_invariant";

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << trajectory_header << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const ExtendedState& s = traj.states[i];
        const SampleDiagnostics* d = i < traj.diagnostics.size() ? &traj.diagnostics[i] : nullptr;
        const double fields[] = {
            traj.times[i],
            s.reduced.u,
            s.reduced.v,
            s.reduced.rho,
            s.reduced.psi,
            s.reduced.phi,
            s.a,
            s.b,
            d ? d->H : expansion_scalar(s.reduced),
            d ? d->constraint.residual : NAN,
            d ? d->conserved.radiation_invariant : NAN,
            d ? d->conserved.scalar_invariant : NAN,
        };
        bool first = true;
        for (double x : fields) {
            if (!first) {
                out << ',';
            }
            out << format_double(x);
            first = false;
        }
        out << '\n';
    }
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

/// Reads a trajectory CSV (any column order; t, u, v, rho, psi, phi, a, b
/// required). Diagnostics are recomputed from the states.
inline Trajectory read_trajectory_csv(std::istream& in, double lambda, const Tolerances& tol = {}) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::config, "trajectory CSV is empty");
    }
    const auto header = detail::split(line, ',');
    std::map<std::string, std::size_t, std::less<>> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        column.emplace(std::string(header[i]), i);
    }
    const char* required[] = {"t", "u", "v", "rho", "psi", "phi", "a", "b"};
    std::size_t index[8];
    for (std::size_t k = 0; k < 8; ++k) {
        const auto it = column.find(required[k]);
        if (it == column.end()) {
            throw Error(ErrorKind::config, std::string("trajectory CSV lacks column '") + required[k] + "'");
        }
        index[k] = it->second;
    }

    Trajectory traj;
    traj.lambda = lambda;
    traj.meta.solver = "replay";
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split(line, ',');
        double values[8];
        for (std::size_t k = 0; k < 8; ++k) {
            const auto parsed = index[k] < cells.size() ? parse_double(cells[index[k]]) : std::nullopt;
            if (!parsed) {
                throw Error(ErrorKind::config, "trajectory CSV row " + std::to_string(row) + ": bad '" +
                                                   required[k] + "'");
            }
            values[k] = *parsed;
        }
        if (!traj.times.empty() && !(values[0] > traj.times.back())) {
            throw Error(ErrorKind::config, "trajectory CSV times must increase strictly");
        }
        traj.times.push_back(values[0]);
        traj.states.push_back(ExtendedState{ReducedState{values[1], values[2], values[3], values[4], values[5]},
                                            values[6], values[7]});
    }
    recompute_diagnostics(traj, tol);
    return traj;
}

inline void write_certificate_report(std::ostream& out, const Certificate& cert,
                                     const InitialData& data) {
    out << "Global-existence certificate\n";
    out << "  Lambda = " << format_double(data.lambda) << ", rho0 = " << format_double(data.rho0)
        << ", b_dot0 = " << format_double(data.b_dot0) << ", phi_dot0 = " << format_double(data.phi_dot0)
        << '\n';
    out << "  samples = " << cert.samples << ", slack = " << format_double(cert.slack) << "\n\n";
    for (const auto& r : cert.records) {
        out << "  [" << (r.passed ? "PASS" : "FAIL") << "] " << describe(r.condition)
            << "\n         worst margin " << format_double(r.worst_margin) << " at t = "
            << format_double(r.worst_time);
        if (!r.passed) {
            out << "; first failure at t = " << format_double(r.first_failure_time);
        }
        out << '\n';
    }
    out << "\n  min u = " << format_double(cert.min_u) << " at t = " << format_double(cert.min_u_time)
        << " (diagnostic)\n";
    out << "  overall: " << (cert.passed() ? "PASS" : "FAIL") << '\n';
}

inline void write_certificate_kv(std::ostream& out, const Certificate& cert) {
    out << "overall = " << (cert.passed() ? "pass" : "fail") << '\n';
    out << "samples = " << cert.samples << '\n';
    out << "slack = " << format_double(cert.slack) << '\n';
    for (const auto& r : cert.records) {
        const std::string k(key(r.condition));
        out << k << ".passed = " << (r.passed ? "true" : "false") << '\n';
        out << k << ".worst_margin = " << format_double(r.worst_margin) << '\n';
        out << k << ".worst_time = " << format_double(r.worst_time) << '\n';
        out << k << ".first_failure_time = " << format_double(r.first_failure_time) << '\n';
    }
    out << "min_u = " << format_double(cert.min_u) << '\n';
    out << "min_u_time = " << format_double(cert.min_u_time) << '\n';
}

inline void write_beta_csv(std::ostream& out, const ContractionReport& report) {
    out << "n,beta_n,bound_n\n";
    for (std::size_t k = 0; k < report.betas.size(); ++k) {
        out << ContractionReport::first_index + static_cast<int>(k) << ',' << format_double(report.betas[k])
            << ',' << format_double(k < report.bounds.size() ? report.bounds[k] : NAN) << '\n';
    }
}

}  // namespace bianchi::io
