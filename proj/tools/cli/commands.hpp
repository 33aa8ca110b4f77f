#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "run_config.hpp"

namespace bianchi::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_certificate_failed = 1,
    exit_usage = 2,
    exit_numerical = 3,
};

/// Maps a library error onto the command exit codes.
int exit_code_for(const Error& error);

struct CommonOptions {
    std::optional<std::string> config;
    std::filesystem::path out_dir = ".";
    unsigned jobs = 1;
    std::uint64_t seed = 42;
};

struct CertifyOptions {
    std::optional<std::string> replay;
    bool self_test = false;
    std::size_t count = 10;
};

struct PicardFlags {
    std::optional<double> horizon;
    std::optional<std::size_t> grid_points;
    std::optional<int> n_max;
};

struct RiccatiOptions {
    double K = 2.0;
    double alpha = 1.0;
    double y0 = 0.0;
    double t0 = 0.0;
    double t_end = 10.0;
    std::size_t samples = 101;
    std::string csv = "riccati.csv";
};

int cmd_simulate(const RunConfig& config, const CommonOptions& common);
int cmd_certify(const std::optional<RunConfig>& config, const CommonOptions& common,
                const CertifyOptions& options);
int cmd_picard(const RunConfig& config, const CommonOptions& common, const PicardFlags& flags);
int cmd_riccati(const RiccatiOptions& options, const CommonOptions& common);
int cmd_sweep(const RunConfig& config, const CommonOptions& common);

/// u0 closing the constraint for unit scale factors; requires v0 != 0.
double solve_u0(double lambda, double rho0, double psi0, double v0);

}  // namespace bianchi::cli
