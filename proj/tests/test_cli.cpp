#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bianchi/bianchi.hpp"
#include "cli/commands.hpp"

using namespace bianchi;
using namespace bianchi::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "bianchi_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

const char* de_sitter_cfg =
    "a0 = 1\na_dot0 = 1\nb0 = 1\nb_dot0 = 1\nphi_dot0 = 0\nrho0 = 0\nlambda = 3\n"
    "t_end = 10\noutput_interval = 0.1\n";

const char* regime_cfg =
    "a0 = 1\na_dot0 = 1.0\nb0 = 1\nb_dot0 = 0.9\nphi0 = 0\nphi_dot0 = 0.3\nrho0 = solve\nlambda = 1.2\n"
    "t_end = 20\noutput_interval = 0.1\n";

RunConfig parse(const std::string& text) { return load_run_config(io::KeyValueFile::parse(text)); }

int run_tool(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string("BIANCHI_LOG=quiet ") + BIANCHI_TOOL_PATH + " --out " + dir.string() + " " +
                            args + " > " + (dir / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path path = dir / "run.cfg";
    std::ofstream(path) << text;
    return path;
}

int code_of(auto&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return exit_code_for(e);
    }
}

}  // namespace

TEST_CASE("config: solve sentinel closes the constraint") {
    const RunConfig cfg = parse(regime_cfg);
    CHECK(cfg.rho_solved);
    CHECK(residual_physical(cfg.data).relative_residual <= 1e-15);
    CHECK(cfg.solver.t_end == 20.0);
    CHECK(cfg.outputs.csv == "trajectory.csv");
}

TEST_CASE("config: errors") {
    CHECK_THROWS_AS(parse(std::string(de_sitter_cfg) + "bogus = 1\n"), Error);
    CHECK_THROWS_AS(parse("a0 = 1\n"), Error);
    CHECK_THROWS_AS(parse(std::string(de_sitter_cfg) + "method = euler\n"), Error);
    std::string zero_a = de_sitter_cfg;
    zero_a.replace(zero_a.find("a0 = 1"), 6, "a0 = 0");
    try {
        (void)parse(zero_a);
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(exit_code_for(e) == exit_usage);
    }
}

TEST_CASE("config: ranges") {
    CHECK(parse_range("k", "1, 2.5,3") == std::vector<double>{1, 2.5, 3});
    CHECK(parse_range("k", "0:1:3") == std::vector<double>{0, 0.5, 1});
    CHECK(parse_range("k", "2:9:1") == std::vector<double>{2});
    CHECK_THROWS_AS(parse_range("k", ""), Error);
    CHECK_THROWS_AS(parse_range("k", "0:1:0"), Error);
    CHECK_THROWS_AS(parse_range("k", "0:1"), Error);
    CHECK_THROWS_AS(parse_range("k", "1,,2"), Error);
}

TEST_CASE("simulate: de Sitter writes a constant u column and a manifest") {
    const fs::path dir = scratch("simulate");
    CommonOptions common;
    common.out_dir = dir;
    CHECK(cmd_simulate(parse(de_sitter_cfg), common) == exit_ok);
    std::ifstream csv(dir / "trajectory.csv");
    const Trajectory traj = io::read_trajectory_csv(csv, 3.0);
    CHECK(traj.size() == 101);
    for (const auto& s : traj.states) {
        CHECK(std::abs(s.reduced.u - 1.0) <= 1e-10);
    }
    const std::string manifest = slurp(dir / "manifest.txt");
    CHECK(manifest.find("termination = completed") != std::string::npos);
    CHECK(manifest.find("accepted_steps = ") != std::string::npos);
    CHECK(manifest.find("lambda = 3") != std::string::npos);
    CHECK(slurp(dir / "report.txt").find("line element") != std::string::npos);
    CHECK(fs::exists(dir / "physical.csv"));
}

TEST_CASE("simulate: identical configs give bit-identical CSV") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    CommonOptions ca, cb;
    ca.out_dir = a;
    cb.out_dir = b;
    REQUIRE(cmd_simulate(parse(regime_cfg), ca) == exit_ok);
    REQUIRE(cmd_simulate(parse(regime_cfg), cb) == exit_ok);
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
}

TEST_CASE("simulate: negative Lambda ends in a numerical failure") {
    const fs::path dir = scratch("collapse");
    CommonOptions common;
    common.out_dir = dir;
    const RunConfig cfg = parse(
        "a0 = 1\na_dot0 = 0.5\nb0 = 1\nb_dot0 = 0.5\nphi_dot0 = 0.1\nrho0 = solve\nlambda = -10\nt_end = 50\n");
    CHECK(cmd_simulate(cfg, common) == exit_numerical);
    CHECK(slurp(dir / "manifest.txt").find("termination = completed") == std::string::npos);
}

TEST_CASE("certify: regime data pass, bad data and bad replays do not") {
    const fs::path dir = scratch("certify");
    CommonOptions common;
    common.out_dir = dir;
    const RunConfig cfg = parse(regime_cfg);
    CHECK(cmd_certify(cfg, common, {}) == exit_ok);
    const auto kv = io::KeyValueFile::parse(slurp(dir / "report.kv"));
    CHECK(*kv.get("overall") == "pass");
    CHECK(slurp(dir / "report.txt").find("overall: PASS") != std::string::npos);

    RunConfig bad = cfg;
    bad.data.b_dot0 = -0.9;
    CHECK(code_of([&] { return cmd_certify(bad, common, {}); }) == exit_usage);

    CHECK(cmd_simulate(cfg, common) == exit_ok);
    std::ifstream in(dir / "trajectory.csv");
    Trajectory traj = io::read_trajectory_csv(in, cfg.data.lambda);
    traj.states[50].reduced.rho *= 1.5;
    {
        std::ofstream out(dir / "bad.csv");
        io::write_trajectory_csv(out, traj);
    }
    CertifyOptions replay;
    replay.replay = (dir / "bad.csv").string();
    CHECK(cmd_certify(cfg, common, replay) == exit_certificate_failed);
    const auto failed = io::KeyValueFile::parse(slurp(dir / "report.kv"));
    CHECK(*failed.get("rho_monotone.passed") == "false");
    CHECK(failed.require_double("rho_monotone.first_failure_time") == traj.times[50]);

    replay.replay = (dir / "trajectory.csv").string();
    CHECK(cmd_certify(cfg, common, replay) == exit_ok);
}

TEST_CASE("certify: self-test on random regime data") {
    const fs::path dir = scratch("self_test");
    CommonOptions common;
    common.out_dir = dir;
    common.seed = 2024;
    CertifyOptions options;
    options.self_test = true;
    options.count = 5;
    CHECK(cmd_certify(std::nullopt, common, options) == exit_ok);
    const std::string csv = slurp(dir / "self_test.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("picard: de Sitter, radiation, short grid") {
    const fs::path dir = scratch("picard");
    CommonOptions common;
    common.out_dir = dir;
    PicardFlags flags;
    flags.horizon = 0.1;
    CHECK(cmd_picard(parse(de_sitter_cfg), common, flags) == exit_ok);
    CHECK(slurp(dir / "beta.csv") == "n,beta_n,bound_n\n2,0,0\n");

    const RunConfig radiation = parse("a0 = 1\na_dot0 = 1\nb0 = 1\nb_dot0 = 1\nphi_dot0 = 0\nrho0 = solve\nlambda = 0\n");
    CHECK(cmd_picard(radiation, common, flags) == exit_ok);
    std::istringstream beta(slurp(dir / "beta.csv"));
    std::string line;
    std::getline(beta, line);
    double previous = INFINITY;
    int rows = 0;
    while (std::getline(beta, line)) {
        const double value = *io::parse_double(line.substr(line.find(',') + 1, line.rfind(',') - line.find(',') - 1));
        if (rows > 0) {
            CHECK(value < previous);
        }
        previous = value;
        ++rows;
    }
    CHECK(rows >= 5);
    CHECK(slurp(dir / "picard_summary.txt").find("factorial_bound_ok = true") != std::string::npos);

    flags.grid_points = 2;
    CHECK(code_of([&] { return cmd_picard(radiation, common, flags); }) == exit_usage);
}

TEST_CASE("riccati: tanh case, equilibrium and pole") {
    const fs::path dir = scratch("riccati");
    CommonOptions common;
    common.out_dir = dir;
    RiccatiOptions options;
    CHECK(cmd_riccati(options, common) == exit_ok);
    const std::string csv = slurp(dir / "riccati.csv");
    const auto pos = csv.find("max_rel_deviation = ");
    REQUIRE(pos != std::string::npos);
    CHECK(*io::parse_double(csv.substr(pos + 20, csv.find('\n', pos) - pos - 20)) <= 1e-8);

    options.y0 = options.K / options.alpha;
    options.csv = "equilibrium.csv";
    CHECK(cmd_riccati(options, common) == exit_ok);
    std::istringstream in(slurp(dir / "equilibrium.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line) && line[0] != '#') {
        std::istringstream row(line);
        std::string t, exact, numerical;
        std::getline(row, t, ',');
        std::getline(row, exact, ',');
        std::getline(row, numerical, ',');
        CHECK(std::abs(*io::parse_double(exact) - 2.0) <= 1e-14);
        CHECK(std::abs(*io::parse_double(numerical) - 2.0) <= 1e-14);
    }

    options.y0 = -3.0;
    CHECK(cmd_riccati(options, common) == exit_numerical);
}

TEST_CASE("sweep: grid rows, regime violations, ordering") {
    const std::string base =
        "a0 = 1\na_dot0 = 0.2\nb0 = 1\nb_dot0 = 1\nphi_dot0 = 0.2\nrho0 = 0.05\nlambda = 1\nt_end = 10\n";
    const fs::path one = scratch("sweep_1"), four = scratch("sweep_4");
    CommonOptions serial, parallel;
    serial.out_dir = one;
    parallel.out_dir = four;
    parallel.jobs = 4;
    const RunConfig grid = parse(base + "sweep.lambda = 0.5, 2\nsweep.v0 = 0.5:1.5:2\n");
    CHECK(cmd_sweep(grid, serial) == exit_ok);
    CHECK(cmd_sweep(grid, parallel) == exit_ok);
    const std::string csv = slurp(one / "sweep.csv");
    CHECK(csv == slurp(four / "sweep.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(std::count(csv.begin(), csv.end(), ',') > 0);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    int index = 0;
    while (std::getline(in, line)) {
        CHECK(line.rfind(std::to_string(index++) + ",", 0) == 0);
        CHECK(line.find(",pass,") != std::string::npos);
    }

    const RunConfig mixed = parse(base + "sweep.v0 = -0.5, 1\n");
    CHECK(cmd_sweep(mixed, serial) == exit_ok);
    const std::string rows = slurp(one / "sweep.csv");
    CHECK(rows.find(",regime violation,") != std::string::npos);
    CHECK(rows.find(",pass,") != std::string::npos);

    CHECK_THROWS_AS(parse(base + "sweep.v0 = \n"), Error);
}

TEST_CASE("tool: exit codes end to end") {
    const fs::path dir = scratch("tool");
    CHECK(run_tool("--config " + write_config(dir, de_sitter_cfg).string() + " simulate", dir) == exit_ok);
    std::string zero_a = de_sitter_cfg;
    zero_a.replace(zero_a.find("a0 = 1"), 6, "a0 = 0");
    CHECK(run_tool("--config " + write_config(dir, zero_a).string() + " simulate", dir) == exit_usage);
    CHECK(run_tool("--config " + write_config(dir, std::string(regime_cfg) + "sweep.v0 = 0:1:0\n").string() + " sweep", dir) == exit_usage);
    CHECK(run_tool("--config " + write_config(dir, de_sitter_cfg).string() + " picard --grid 2", dir) == exit_usage);
    CHECK(run_tool("riccati --K 2 --alpha 1 --y0 -3", dir) == exit_numerical);
    CHECK(run_tool("frobnicate", dir) == exit_usage);
    CHECK(run_tool("simulate", dir) == exit_usage);
    CHECK(run_tool("certify --self-test --count 3 --seed 5", dir) == exit_ok);
    CHECK(run_tool("--config " + std::string(BIANCHI_CONFIG_DIR) + "/global_regime.cfg certify", dir) == exit_ok);
}
