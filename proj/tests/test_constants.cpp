#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/reduced_energy.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace spikelab;

namespace {
// ∫_{R⁴}(1+|y|²)^{-p} = ω₃/2 · B(2, p−2), independent of the library formula
double beta_oracle(double p) { return std::numbers::pi * std::numbers::pi * boost::math::beta(2.0, p - 2.0); }
}  // namespace

TEST_CASE("closed-form constants") {
    const auto& k = constants();
    CHECK(k.c4 == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
    CHECK(k.omega3 == doctest::Approx(2 * std::numbers::pi * std::numbers::pi).epsilon(1e-15));
    CHECK(k.alpha4 * 2 * k.omega3 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(k.A == doctest::Approx(8 * std::sqrt(2.0) * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("A three ways") {
    const auto& k = constants();
    const double a1 = k.c4 / k.alpha4;
    const double a2 = k.c4 * k.c4 * k.c4 * radial_integral(3.0);
    const double a3 = bubble_cube_quadrature();
    CHECK(std::abs(a1 / a2 - 1) < 1e-12);
    CHECK(std::abs(a3 / a1 - 1) < 1e-8);
}

TEST_CASE("radial integrals against the Beta function") {
    for (double p : {2.5, 3.0, 4.0, 8.0 / 3.0, 4.0 / 3.0 + 2.0}) {
        CAPTURE(p);
        CHECK(std::abs(radial_integral(p) / beta_oracle(p) - 1) < 1e-12);
        CHECK(std::abs(radial_integral_quadrature(p) / beta_oracle(p) - 1) < 1e-8);
    }
    CHECK_THROWS_AS(radial_integral(2.0), DomainError);
}

TEST_CASE("leading level is 8 pi^2 / 3") {
    CHECK(constants().leading_level() == doctest::Approx(8 * std::numbers::pi * std::numbers::pi / 3).epsilon(1e-14));
}

TEST_CASE("sigma matrix") {
    // σ_00 = c4⁴ ω₃/2 · B(2,4)−2B(3,3)+B(4,2) = c4⁴ ω₃ / 60, the same for j ≥ 1
    const double expect = std::pow(constants().c4, 4) * constants().omega3 / 60.0;
    for (int j = 0; j < 5; ++j)
        for (int l = 0; l < 5; ++l) {
            if (j == l) {
                CHECK(sigma_entry(j, l) == doctest::Approx(expect).epsilon(1e-12));
                CHECK(std::abs(sigma_quadrature(j, l) / expect - 1) < 1e-8);
            } else {
                CHECK(std::abs(sigma_quadrature(j, l)) < 1e-8);
            }
        }
}

TEST_CASE("first Dirichlet eigenvalue of the unit ball") {
    const double j11 = lambda1_ball(1.0);
    CHECK(j11 == doctest::Approx(14.681970642123893).epsilon(1e-12));
    CHECK(std::abs(boost::math::cyl_bessel_j(1, std::sqrt(j11))) < 1e-12);
    CHECK(lambda1_ball(2.0) == doctest::Approx(j11 / 4));
}
