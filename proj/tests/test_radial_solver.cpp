#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/radial_solver.hpp"

#include <boost/numeric/odeint.hpp>
#include <doctest.h>

#include <array>
#include <cmath>

using namespace spikelab;

namespace {
// Independent first-zero oracle: unscaled equation, different integrator, bisection on u0.
double oracle_first_zero(double lambda, double u0, double tol) {
    namespace ode = boost::numeric::odeint;
    using S = std::array<double, 2>;
    auto rhs = [&](const S& x, S& dx, double r) {
        dx[0] = x[1];
        dx[1] = -3 * x[1] / r - x[0] * x[0] * x[0] - lambda * x[0];
    };
    const double r0 = 1e-6;
    S x{u0 - (u0 * u0 * u0 + lambda * u0) * r0 * r0 / 8, -(u0 * u0 * u0 + lambda * u0) * r0 / 4};
    auto st = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<S>());
    double r = r0, dr = 1e-6;
    S prev = x;
    double rprev = r;
    while (r < 10) {
        prev = x;
        rprev = r;
        while (st.try_step(rhs, x, r, dr) == ode::fail) {
        }
        if (x[0] <= 0) {
            // bisect the crossing by re-integrating from the last positive state
            double a = rprev, b = r;
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (a + b);
                S y = prev;
                ode::integrate_adaptive(st, rhs, y, rprev, mid, 1e-4 * (mid - rprev));
                (y[0] > 0 ? a : b) = mid;
            }
            return 0.5 * (a + b);
        }
    }
    return INFINITY;
}

double oracle_u0(double lambda, double tol) {
    double lo = 1, hi = 100;  // first zero decreases in u0
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oracle_first_zero(lambda, mid, tol) > 1 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}
}  // namespace

TEST_CASE("solve_ball hits the boundary") {
    const auto p = solve_ball(6.0);
    CHECK(std::abs(p.first_zero - 1) < 1e-10);
    CHECK(p.residual < 1e-8);
    CHECK(p.u0 > 0);
    CHECK(p.grid.front()[1] == doctest::Approx(p.u0));
    CHECK(std::abs(p.grid.back()[1]) < 1e-8);
}

TEST_CASE("independent integrator reproduces u0 to 6 digits") {
    for (double lambda : {8.0, 5.0}) {
        const double mine = solve_ball(lambda).u0;
        const double theirs = oracle_u0(lambda, 5e-13);
        CHECK(std::abs(mine / theirs - 1) < 1e-6);
    }
}

TEST_CASE("mu covariance") {
    const auto a = solve_ball(6.0, 1.0), b = solve_ball(6.0, 4.0);
    CHECK(b.u0 == doctest::Approx(a.u0 / 2).epsilon(1e-10));
    CHECK(b.delta_effective == doctest::Approx(a.delta_effective).epsilon(1e-10));
    CHECK(b.energy == doctest::Approx(a.energy / 4).epsilon(1e-8));
}

TEST_CASE("energy tends to the bubble level as lambda shrinks") {
    CHECK(std::abs(solve_ball(0.5).energy / constants().leading_level() - 1) < 1e-4);
}

TEST_CASE("no solution at or above lambda_1") {
    CHECK_THROWS_AS(solve_ball(15.0), BracketError);
    CHECK_THROWS_AS(shoot(0.0, 1.0, 1.0), NoCrossingError);
}

TEST_CASE("concentration study reports its own shortcomings") {
    const auto rep = concentration_study({8, 7, 6, 5, 4});
    CHECK(rep.d_positive);
    CHECK(rep.delta_decreasing);
    CHECK(rep.energy_pass);
    if (!rep.intercept_pass) CHECK_FALSE(rep.flags.empty());
    CHECK_THROWS_AS(concentration_study({20, 18, 16}), InsufficientDataError);
    CHECK_THROWS_AS(concentration_study({4, 5, 6}), PreconditionError);
}
