#include <catch_amalgamated.hpp>

#include <cmath>

#include "pbe/errors.hpp"
#include "pbe/radial_oracle.hpp"

using namespace pbe;
using Catch::Approx;

TEST_CASE("zero charge gives a zero radial solution", "[radial]") {
    const auto s = solve_radial(2.0, 20.0, {}, 0.0, 1000, Nonlinearity::Nonlinear);
    for (double v : s.regular) CHECK(v == 0.0);
    CHECK(s.qoi == 0.0);
}

TEST_CASE("closed form matches finite volumes at the default constants", "[radial]") {
    const PbeCoefficients c;
    const double closed = born_linear_closed_form(2.0, c, 1.0, 20.0);
    const auto fv = solve_radial(2.0, 20.0, c, 1.0, 100000, Nonlinearity::Linearized);
    CHECK(fv.qoi == Approx(closed).epsilon(1e-6));
    // Independent hand evaluation at these constants.
    CHECK(closed == Approx(-0.4947334858).epsilon(1e-8));
}

TEST_CASE("unscreened closed form is the Born energy", "[radial]") {
    PbeCoefficients c;
    c.kappa_sq = 0.0;
    for (double Ro : {5.0, 20.0, 1000.0}) CHECK(born_linear_closed_form(2.0, c, 1.3, Ro) == Approx(born_energy(2.0, c, 1.3)).epsilon(1e-12));
    const auto fv = solve_radial(2.0, 200.0, c, 1.0, 100000, Nonlinearity::Linearized);
    CHECK(fv.qoi == Approx(born_energy(2.0, c, 1.0)).epsilon(1e-6));
}

TEST_CASE("radial finite volumes converge at second order", "[radial][convergence]") {
    const PbeCoefficients c;
    const double q1 = solve_radial(2.0, 20.0, c, 1.0, 500, Nonlinearity::Linearized).qoi;
    const double q2 = solve_radial(2.0, 20.0, c, 1.0, 1000, Nonlinearity::Linearized).qoi;
    const double q4 = solve_radial(2.0, 20.0, c, 1.0, 2000, Nonlinearity::Linearized).qoi;
    const double ratio = (q1 - q2) / (q2 - q4);
    CHECK(ratio == Approx(4.0).margin(0.5));
    const double limit = q4 + (q4 - q2) / 3.0;
    CHECK(std::abs(q2 - limit) < std::abs(q1 - limit) / 3.0);
}

TEST_CASE("reaction energy shrinks as the dielectric contrast vanishes", "[radial]") {
    PbeCoefficients c;
    double previous = INFINITY;
    for (double es : {78.0, 40.0, 10.0, 2.0, 1.0}) {
        c.eps_s = es;
        c.kappa_sq = 0.0;
        const double q = std::abs(born_linear_closed_form(2.0, c, 1.0, 20.0));
        CHECK(q < previous);
        previous = q;
    }
    CHECK(previous == Approx(0.0).margin(1e-14));
}

TEST_CASE("nonlinear radial solution is close to linear at the default constants", "[radial]") {
    const PbeCoefficients c;
    const auto lin = solve_radial(2.0, 20.0, c, 1.0, 4000, Nonlinearity::Linearized);
    const auto non = solve_radial(2.0, 20.0, c, 1.0, 4000, Nonlinearity::Nonlinear);
    CHECK(std::abs(non.qoi - lin.qoi) < 2e-3 * std::abs(lin.qoi));
    CHECK(non.newton_iterations >= 1);
}

TEST_CASE("radial oracle rejects a coarse grid", "[radial]") {
    CHECK_THROWS_AS(solve_radial(2.0, 20.0, {}, 1.0, 8, Nonlinearity::Linearized), DomainError);
}
