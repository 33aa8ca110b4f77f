#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "bianchi/bounds.hpp"
#include "bianchi/evolution.hpp"
#include "bianchi/sampling.hpp"

using namespace bianchi;
using Catch::Matchers::WithinAbs;

namespace {

// Lambda = 3 with small matter; u0 closes the constraint for v0 = 1.
InitialData near_de_sitter() {
    const double rho0 = 1e-3, psi0 = 1e-3, v0 = 1.0, lambda = 3.0;
    const double u0 = (lambda + 8.0 * pi * (rho0 + psi0) - v0 * v0) / (2.0 * v0);
    return make_data(u0, v0, psi0, rho0, lambda);
}

Trajectory run(const InitialData& d, double t_end = 20.0, double interval = 0.0) {
    SolverConfig config;
    config.t_end = t_end;
    config.output_interval = interval;
    return integrate(d, config);
}

}  // namespace

TEST_CASE("near de Sitter data pass every condition") {
    const InitialData d = near_de_sitter();
    REQUIRE(std::abs(residual_physical(d).relative_residual) < 1e-15);
    const Certificate cert = certify(run(d), d);
    CHECK(cert.passed());
    for (const auto& r : cert.records) {
        INFO(key(r.condition));
        CHECK(r.passed);
        CHECK(std::isnan(r.first_failure_time));
    }
}

TEST_CASE("negative b_dot0 is a regime violation") {
    InitialData d = near_de_sitter();
    const Trajectory traj = run(d, 1.0);
    d.b_dot0 = -0.5;
    try {
        (void)certify(traj, d);
        FAIL("expected regime violation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::regime_violation);
    }
}

TEST_CASE("other regime hypotheses are enforced") {
    for (auto mutate : {+[](InitialData& d) { d.lambda = -0.1; }, +[](InitialData& d) { d.rho0 = 0.0; },
                        +[](InitialData& d) { d.phi_dot0 = 0.0; }}) {
        InitialData d = near_de_sitter();
        mutate(d);
        CHECK_THROWS_AS(require_global_regime(d), Error);
    }
    CHECK_NOTHROW(require_global_regime(near_de_sitter()));
}

TEST_CASE("an injected density increase fails the rho condition at its time") {
    const InitialData d = near_de_sitter();
    Trajectory traj = run(d, 5.0, 0.5);
    REQUIRE(traj.size() == 11);
    traj.states[6].reduced.rho = traj.states[5].reduced.rho * 1.01;
    recompute_diagnostics(traj);
    const Certificate cert = certify(traj, d);
    CHECK_FALSE(cert.passed());
    const ConditionRecord& r = cert[Condition::rho_monotone];
    CHECK_FALSE(r.passed);
    CHECK(r.first_failure_time == traj.times[6]);
    CHECK(r.worst_margin < 0.0);
    CHECK(cert[Condition::v_positive].passed);
    CHECK(describe(r.condition) == "rho non-increasing, 0 < rho <= rho0");
}

TEST_CASE("an expansion above the envelope fails H <= W") {
    const InitialData d = near_de_sitter();
    Trajectory traj = run(d, 5.0, 0.5);
    traj.states[4].reduced.u += 0.5;
    const Certificate cert = certify(traj, d);
    CHECK_FALSE(cert[Condition::envelope].passed);
    CHECK(cert[Condition::envelope].first_failure_time == traj.times[4]);
}

TEST_CASE("random regime data pass the certificate") {
    std::mt19937_64 rng(123);
    for (int i = 0; i < 20; ++i) {
        const InitialData d = sample_regime_data(rng);
        const Trajectory traj = run(d);
        REQUIRE(traj.meta.termination == Termination::completed);
        const Certificate cert = certify(traj, d);
        CHECK(cert.passed());
        CHECK(cert.samples == traj.size());
        CHECK(cert.slack == 10.0 * Tolerances{}.constraint_warn);
    }
}

TEST_CASE("constraint band identity holds per sample") {
    std::mt19937_64 rng(31);
    const InitialData d = sample_regime_data(rng);
    const Trajectory traj = run(d, 10.0, 0.1);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const ReducedState& s = traj.states[i].reduced;
        const double lhs = s.v * (s.v + 2.0 * s.u) - 8.0 * pi * s.psi - d.lambda - 8.0 * pi * s.rho;
        CHECK_THAT(lhs, WithinAbs(traj.diagnostics[i].constraint.residual, 1e-14));
    }
}

TEST_CASE("Lambda > 0 regime runs approach the de Sitter point") {
    std::mt19937_64 rng(77);
    RegimeRanges ranges;
    ranges.lambda_min = ranges.lambda_max = 3.0;
    for (int i = 0; i < 5; ++i) {
        const InitialData d = sample_regime_data(rng, ranges);
        const Trajectory traj = run(d, 50.0, 1.0);
        REQUIRE(traj.meta.termination == Termination::completed);
        const ReducedState& end = traj.states.back().reduced;
        CHECK_THAT(end.u, WithinAbs(1.0, 1e-6));
        CHECK_THAT(end.v, WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("condition keys are unique") {
    for (std::size_t i = 0; i < all_conditions.size(); ++i) {
        for (std::size_t j = i + 1; j < all_conditions.size(); ++j) {
            CHECK(key(all_conditions[i]) != key(all_conditions[j]));
        }
    }
}
