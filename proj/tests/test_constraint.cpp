#include "catch_amalgamated.hpp"

#include <random>

#include "bianchi/constraint.hpp"
#include "bianchi/evolution.hpp"
#include "bianchi/sampling.hpp"
#include "oracles.hpp"

using namespace bianchi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("reduced residual vanishes at the de Sitter point") {
    const ConstraintReport r = residual_reduced({1.0, 1.0, 0.0, 0.0, 0.0}, 3.0);
    CHECK(r.residual == 0.0);
    CHECK(r.relative_residual == 0.0);
    CHECK(r.status == ConstraintStatus::satisfied);
}

TEST_CASE("reduced residual vanishes for the zero state without Lambda") {
    const ConstraintReport r = residual_reduced({}, 0.0);
    CHECK(r.residual == 0.0);
    CHECK(r.relative_residual == 0.0);
}

TEST_CASE("reduced residual by hand") {
    const ConstraintReport r = residual_reduced({0.5, 1.0, 0.0, 0.05, 0.0}, 0.0);
    CHECK_THAT(r.residual, WithinRel(2.0 - 0.4 * oracle::pi, 1e-14));
    CHECK_THAT(r.residual, WithinAbs(0.7434, 1e-4));
    // Largest term is 8 pi psi = 0.4 pi.
    CHECK_THAT(r.relative_residual, WithinRel((2.0 - 0.4 * oracle::pi) / (0.4 * oracle::pi), 1e-14));
    CHECK(r.status == ConstraintStatus::violated);
}

TEST_CASE("residual status follows the warn and fail thresholds") {
    const Tolerances tol;
    CHECK(classify(1e-9, tol) == ConstraintStatus::satisfied);
    CHECK(classify(1e-8, tol) == ConstraintStatus::satisfied);
    CHECK(classify(1e-6, tol) == ConstraintStatus::warn);
    CHECK(classify(1e-3, tol) == ConstraintStatus::violated);
}

TEST_CASE("physical residual matches the de Sitter and flat cases") {
    CHECK(residual_physical(1, 1, 1, 1, 0, 0, 3).residual == 0.0);
    CHECK(residual_physical(1, 0, 1, 0, 0, 0, 0).residual == 0.0);
    CHECK_THROWS_AS(residual_physical(0, 1, 1, 1, 0, 0, 3), Error);
    CHECK_THROWS_AS(residual_physical(1, 1, -1, 1, 0, 0, 3), Error);
}

TEST_CASE("physical residual is the hand formula") {
    const double a = 2.0, a_dot = 0.6, b = 0.5, b_dot = 0.4, rho = 0.01, phi_dot = 0.3, lambda = 0.7;
    const double expected = (b_dot / b) * (b_dot / b) + 2.0 * (a_dot / a) * (b_dot / b) - lambda -
                            8.0 * oracle::pi * rho - 4.0 * oracle::pi * phi_dot * phi_dot;
    CHECK_THAT(residual_physical(a, a_dot, b, b_dot, rho, phi_dot, lambda).residual, WithinAbs(expected, 1e-15));
}

TEST_CASE("physical and reduced residuals agree exactly") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0.1, 3.0), any(-2.0, 2.0), small(0.0, 0.2);
    for (int i = 0; i < 500; ++i) {
        const InitialData d{pos(rng), any(rng), pos(rng), any(rng), any(rng), small(rng) + 1e-3, small(rng), any(rng)};
        const ConstraintReport phys = residual_physical(d);
        const ConstraintReport red = residual_reduced(from_physical(d), d.lambda);
        CHECK(phys.residual == red.residual);
        CHECK(phys.relative_residual == red.relative_residual);
    }
}

TEST_CASE("solve_initial_density examples") {
    CHECK_THAT(solve_initial_density(0.5, 1.0, 0.05, 0.0),
               WithinRel((2.0 - 0.4 * oracle::pi) / (8.0 * oracle::pi), 1e-14));
    CHECK_THAT(solve_initial_density(0.5, 1.0, 0.05, 0.0), WithinAbs(0.029581, 1e-5));
    CHECK(solve_initial_density(1.0, 1.0, 0.0, 3.0) == 0.0);
    try {
        (void)solve_initial_density(0.5, 1.0, 0.1, 0.0);
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::infeasible);
    }
}

TEST_CASE("solved density closes the constraint to one rounding") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> v(0.1, 2.0), u(0.0, 3.0), psi(0.0, 0.05), lam(0.0, 3.0);
    int checked = 0;
    while (checked < 300) {
        const double u0 = u(rng), v0 = v(rng), psi0 = psi(rng), lambda = lam(rng);
        double rho0 = 0.0;
        try {
            rho0 = solve_initial_density(u0, v0, psi0, lambda);
        } catch (const Error&) {
            continue;
        }
        const ConstraintReport r = residual_reduced({u0, v0, rho0, psi0, 0.0}, lambda);
        CHECK(r.relative_residual <= 8.0 * std::numeric_limits<double>::epsilon());
        ++checked;
    }
}

TEST_CASE("constraint stays within warn along integrated regime trajectories") {
    std::mt19937_64 rng(21);
    SolverConfig config;
    config.t_end = 10.0;
    for (int i = 0; i < 10; ++i) {
        const InitialData d = sample_regime_data(rng);
        const Trajectory traj = integrate(d, config);
        REQUIRE(traj.meta.termination == Termination::completed);
        double worst = 0.0;
        for (const auto& diag : traj.diagnostics) {
            worst = std::max(worst, diag.constraint.relative_residual);
            CHECK(diag.constraint.status == ConstraintStatus::satisfied);
        }
        CHECK(worst <= config.tolerances.constraint_warn);
    }
}
