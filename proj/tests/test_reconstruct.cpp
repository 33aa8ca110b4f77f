#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "bianchi/evolution.hpp"
#include "bianchi/reconstruct.hpp"
#include "bianchi/sampling.hpp"
#include "oracles.hpp"

using namespace bianchi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PhysicalTrajectory run(const InitialData& d, double t_end, double interval) {
    SolverConfig config;
    config.t_end = t_end;
    config.output_interval = interval;
    return reconstruct(integrate(d, config), d);
}

double worst_interior(const PhysicalTrajectory& p, double SecondOrderResiduals::*member) {
    double m = 0.0;
    for (const auto& r : p.residuals) {
        if (!r.one_sided && std::isfinite(r.*member)) {
            m = std::max(m, std::abs(r.*member));
        }
    }
    return m;
}

}  // namespace

TEST_CASE("finite-difference weights reproduce polynomials") {
    const std::vector<double> x{0.0, 0.1, 0.25, 0.3, 0.5};
    const auto w = detail::fd_weights(0.0, x, 2);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double f = 1.0 + 2.0 * x[j] + 3.0 * x[j] * x[j] - x[j] * x[j] * x[j];
        d1 += w[1][j] * f;
        d2 += w[2][j] * f;
    }
    CHECK_THAT(d1, WithinAbs(2.0, 1e-10));
    CHECK_THAT(d2, WithinAbs(6.0, 1e-9));
}

TEST_CASE("de Sitter reconstruction") {
    const InitialData d{1, 1, 1, 1, 0, 0, 0, 3};
    const PhysicalTrajectory p = run(d, 3.0, 1e-3);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK_THAT(p.a[i], WithinRel(std::exp(p.times[i]), 1e-8));
        CHECK_THAT(p.b[i], WithinRel(std::exp(p.times[i]), 1e-8));
    }
    for (const auto& r : p.residuals) {
        CHECK(std::abs(r.hamiltonian) <= 1e-6);
        CHECK(std::abs(r.evolution_a) <= 1e-6);
        CHECK(std::abs(r.evolution_b) <= 1e-6);
        CHECK(std::abs(r.radiation) <= 1e-6);
        CHECK(std::isnan(r.scalar_wave));
    }
}

TEST_CASE("zero state reconstruction is constant") {
    const InitialData d{2, 0, 3, 0, 0.5, 0, 0, 0};
    const PhysicalTrajectory p = run(d, 2.0, 0.1);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.a[i] == 2.0);
        CHECK(p.b[i] == 3.0);
        CHECK(p.phi[i] == 0.5);
        const auto& r = p.residuals[i];
        CHECK(std::abs(r.hamiltonian) <= 1e-15);
        CHECK(std::abs(r.evolution_a) <= 1e-12);
        CHECK(std::abs(r.evolution_b) <= 1e-12);
    }
}

TEST_CASE("radiation FLRW scale factor") {
    const double w0 = 1.0;
    const InitialData d{1, w0, 1, w0, 0, 0, 3.0 / (8.0 * pi), 0};
    const PhysicalTrajectory p = run(d, 10.0, 0.01);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK_THAT(p.a[i], WithinRel(oracle::flrw_a(1.0, w0, p.times[i]), 1e-6));
        CHECK_THAT(p.b[i], WithinRel(oracle::flrw_a(1.0, w0, p.times[i]), 1e-6));
    }
}

TEST_CASE("second-order residuals shrink at second order under refinement") {
    const double w0 = 1.0;
    const InitialData d{1, w0, 1, w0, 0, 0, 3.0 / (8.0 * pi), 0};
    const PhysicalTrajectory coarse = run(d, 2.0, 0.02);
    const PhysicalTrajectory fine = run(d, 2.0, 0.01);
    for (auto member : {&SecondOrderResiduals::evolution_a, &SecondOrderResiduals::evolution_b,
                        &SecondOrderResiduals::radiation}) {
        const double ratio = worst_interior(coarse, member) / worst_interior(fine, member);
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("regime runs: phi is non-decreasing and the field equations hold") {
    std::mt19937_64 rng(10);
    for (int k = 0; k < 5; ++k) {
        const InitialData d = sample_regime_data(rng);
        const PhysicalTrajectory p = run(d, 5.0, 1e-3);
        for (std::size_t i = 1; i < p.size(); ++i) {
            CHECK(p.phi[i] >= p.phi[i - 1]);
        }
        CHECK(worst_interior(p, &SecondOrderResiduals::hamiltonian) <= 1e-8);
        CHECK(worst_interior(p, &SecondOrderResiduals::evolution_a) <= 1e-4);
        CHECK(worst_interior(p, &SecondOrderResiduals::evolution_b) <= 1e-4);
        CHECK(worst_interior(p, &SecondOrderResiduals::scalar_wave) <= 1e-4);
        CHECK(worst_interior(p, &SecondOrderResiduals::radiation) <= 1e-4);
    }
}

TEST_CASE("the u + v form of the radiation equation is not satisfied") {
    const double w0 = 1.0;
    const InitialData d{1, w0, 1, w0, 0, 0, 3.0 / (8.0 * pi), 0};
    const PhysicalTrajectory p = run(d, 2.0, 1e-3);
    CHECK(worst_interior(p, &SecondOrderResiduals::radiation) < 1e-5);
    CHECK(worst_interior(p, &SecondOrderResiduals::radiation_alt) > 1e-2);
}

TEST_CASE("reconstruction needs five samples") {
    const InitialData d{1, 1, 1, 1, 0, 0, 0, 3};
    SolverConfig config;
    config.t_end = 1.0;
    config.output_interval = 0.5;
    CHECK_THROWS_AS(reconstruct(integrate(d, config), d), Error);
}

TEST_CASE("line element coefficients") {
    CHECK(line_element(1.0, 1.0).coefficients == std::array<double, 4>{-1, 1, 1, 1});
    CHECK(line_element(2.0, 3.0).coefficients == std::array<double, 4>{-1, 4, 9, 9});
    CHECK(line_element(2.0, 3.0).text == "-dt^2 + 4 (dx1)^2 + 9 [(dx2)^2 + (dx3)^2]");
    CHECK_THROWS_AS(line_element(0.0, 1.0), Error);

    const InitialData d{1, 1, 1, 1, 0, 0, 0, 3};
    const PhysicalTrajectory p = run(d, 2.0, 0.5);
    const LineElement e = line_element(p, 2);
    REQUIRE(p.times[2] == 1.0);
    CHECK_THAT(e.coefficients[1], WithinRel(std::exp(2.0), 1e-8));
    CHECK_THAT(e.coefficients[2], WithinAbs(7.389, 1e-3));
}
