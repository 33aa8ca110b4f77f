#include <cstdlib>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "cli/commands.hpp"

namespace {

void configure_logging() {
    const char* level = std::getenv("BIANCHI_LOG");
    const std::string value = level ? level : "info";
    if (value == "quiet") {
        spdlog::set_level(spdlog::level::err);
    } else if (value == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else {
        spdlog::set_level(spdlog::level::info);
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace bianchi::cli;
    configure_logging();

    CLI::App app{"Bianchi I scalar field, radiation and Lambda: simulation and verification"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string out_dir = ".";
    std::string config_path;
    app.add_option("--config", config_path, "run configuration file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", common.jobs, "parallel sweep workers")->check(CLI::PositiveNumber);
    app.add_option("--seed", common.seed, "seed for random regime sampling");
    app.fallthrough();

    auto* simulate = app.add_subcommand("simulate", "integrate and write trajectory CSV and manifest");

    CertifyOptions certify_opts;
    std::string replay;
    auto* certify = app.add_subcommand("certify", "check the global-existence conditions along a run");
    certify->add_option("--replay", replay, "certify a trajectory CSV instead of integrating");
    certify->add_flag("--self-test", certify_opts.self_test, "certify random data from the regime");
    certify->add_option("--count", certify_opts.count, "number of self-test samples")->check(CLI::PositiveNumber);

    PicardFlags picard_flags;
    double horizon = 0.0;
    std::size_t grid = 0;
    int n_max = 0;
    auto* picard = app.add_subcommand("picard", "successive approximations and beta sequence");
    auto* horizon_opt = picard->add_option("--horizon", horizon, "time horizon");
    auto* grid_opt = picard->add_option("--grid", grid, "grid points");
    auto* n_max_opt = picard->add_option("--n-max", n_max, "largest iterate index");

    RiccatiOptions riccati_opts;
    auto* riccati = app.add_subcommand("riccati", "closed form against numerical integration");
    riccati->add_option("--K", riccati_opts.K, "K");
    riccati->add_option("--alpha", riccati_opts.alpha, "alpha");
    riccati->add_option("--y0", riccati_opts.y0, "initial value");
    riccati->add_option("--t0", riccati_opts.t0, "initial time");
    riccati->add_option("--t-end", riccati_opts.t_end, "final time");
    riccati->add_option("--samples", riccati_opts.samples, "number of table rows");
    riccati->add_option("--csv", riccati_opts.csv, "output file name");

    auto* sweep = app.add_subcommand("sweep", "certify a grid over Lambda, rho0, psi0, v0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    common.out_dir = out_dir;
    if (!config_path.empty()) {
        common.config = config_path;
    }
    if (!replay.empty()) {
        certify_opts.replay = replay;
    }
    if (*horizon_opt) {
        picard_flags.horizon = horizon;
    }
    if (*grid_opt) {
        picard_flags.grid_points = grid;
    }
    if (*n_max_opt) {
        picard_flags.n_max = n_max;
    }

    try {
        auto load = [&]() -> RunConfig {
            if (!common.config) {
                throw bianchi::Error(bianchi::ErrorKind::config, "--config is required");
            }
            return load_run_config_file(*common.config);
        };
        if (*simulate) {
            return cmd_simulate(load(), common);
        }
        if (*certify) {
            std::optional<RunConfig> config;
            if (common.config) {
                config = load();
            }
            return cmd_certify(config, common, certify_opts);
        }
        if (*picard) {
            return cmd_picard(load(), common, picard_flags);
        }
        if (*riccati) {
            return cmd_riccati(riccati_opts, common);
        }
        if (*sweep) {
            return cmd_sweep(load(), common);
        }
    } catch (const bianchi::Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_numerical;
    }
    return exit_usage;
}
