#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bianchi/evolution.hpp"
#include "bianchi/io.hpp"

namespace bianchi::cli {

struct OutputOptions {
    std::string csv = "trajectory.csv";
    std::string physical_csv = "physical.csv";
    std::string report = "report.txt";
    std::string manifest = "manifest.txt";
    bool diagnostics = true;
};

struct PicardOptions {
    /// Unset: use pick_horizon.
    std::optional<double> horizon;
    int n_max = 40;
    std::size_t grid_points = 512;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct RunConfig {
    InitialData data;
    bool rho_solved = false;
    SolverConfig solver;
    OutputOptions outputs;
    PicardOptions picard;
    std::vector<SweepAxis> sweep;
    io::KeyValueFile raw;
};

/// Builds a run configuration; unknown keys and malformed values raise
/// ErrorKind::config. `rho0 = solve` closes the constraint for rho0.
RunConfig load_run_config(const io::KeyValueFile& file);
RunConfig load_run_config_file(const std::string& path);

/// "x1, x2, ..." or "lo:hi:count". An empty list is a config error.
std::vector<double> parse_range(const std::string& key, const std::string& text);

}  // namespace bianchi::cli
