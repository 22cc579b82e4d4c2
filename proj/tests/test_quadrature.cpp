#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace spikelab;

TEST_CASE("engine matches a 1D radial integral on the ball") {
    const auto ball = DomainDescriptor::ball(Point::Zero(), 1);
    for (double d : {1e-2, 1e-3}) {
        QuadratureSpec s;
        s.spike_centers = {{Point::Zero(), d}};
        QuadratureEngine e(ball, s);
        const double d2 = d * d;
        const auto q = e.integrate([&](const Point& x) {
            const double r2 = x.squaredNorm();
            return d2 / ((d2 + r2) * (d2 + r2));
        });
        const double ref = 2 * std::numbers::pi * std::numbers::pi *
                           boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                               [&](double t) { return t * t * t * d2 / ((d2 + t * t) * (d2 + t * t)); }, 0, 1, 25, 1e-14);
        CHECK(std::abs(q.value / ref - 1) < 1e-6);
    }
}

TEST_CASE("polynomials over an off-centre split") {
    const auto ball = DomainDescriptor::ball(Point::Zero(), 1);
    QuadratureSpec s;
    s.spike_centers = {{Point(0.3, 0.1, 0, 0), 1e-3}};
    QuadratureEngine e(ball, s);
    // ∫_B (1 + x1²) = |B| (1 + 1/6), |B| = π²/2
    const double exact = std::numbers::pi * std::numbers::pi / 2 * (1 + 1.0 / 6);
    CHECK(std::abs(e.integrate([](const Point& x) { return 1 + x(0) * x(0); }).value / exact - 1) < 1e-8);
}

TEST_CASE("identical seeds give bit-identical results") {
    const auto dom = DomainDescriptor::perforated(Point::Zero(), 1, Point(0.3, 0, 0, 0), 0.2);
    QuadratureSpec s;
    s.spike_centers = {{Point(-0.4, 0, 0, 0), 1e-2}};
    s.seed = 11;
    auto f = [](const Point& x) { return std::exp(-x.squaredNorm()) + 1.0 / (1e-4 + (x - Point(-0.4, 0, 0, 0)).squaredNorm()); };
    const double a = QuadratureEngine(dom, s).integrate(f).value;
    const double b = QuadratureEngine(dom, s).integrate(f).value;
    CHECK(a == b);
}

TEST_CASE("error estimates are honest under refinement") {
    const auto dom = DomainDescriptor::perforated(Point::Zero(), 1, Point(0.3, 0, 0, 0), 0.2);
    QuadratureSpec s;
    s.spike_centers = {{Point(-0.4, 0, 0, 0), 1e-2}};
    QuadratureEngine coarse(dom, s);
    QuadratureSpec s2 = s;
    s2.outer_samples *= 2;
    QuadratureEngine fine(dom, s2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    int ok = 0;
    const int cases = 100;
    for (int k = 0; k < cases; ++k) {
        const Point c(u(rng), u(rng), u(rng), u(rng));
        const double w = 1 + 2 * (u(rng) + 1);
        auto f = [&](const Point& x) {
            const double r2 = (x - Point(-0.4, 0, 0, 0)).squaredNorm();
            return std::cos(w * x.dot(c)) + 1e-4 / ((1e-4 + r2) * (1e-4 + r2));
        };
        const auto a = coarse.integrate(f), b = fine.integrate(f);
        ok += std::abs(a.value - b.value) <= a.error;
    }
    CHECK(ok >= 95);
}

TEST_CASE("volume of a perforated ball") {
    // rays tangent to the hole used to leave a noise floor near 1e-4
    const auto dom = DomainDescriptor::perforated(Point::Zero(), 1, Point(0.3, 0, 0, 0), 0.2);
    QuadratureSpec s;
    s.spike_centers = {{Point(-0.4, 0, 0, 0), 1e-2}};
    s.outer_samples = 8192;
    const auto q = QuadratureEngine(dom, s).integrate([](const Point&) { return 1.0; });
    const double exact = 0.5 * M_PI * M_PI * (1 - std::pow(0.2, 4));
    CHECK(std::abs(q.value - exact) < 1e-8);
    CHECK(std::abs(q.value - exact) <= q.error);
}

TEST_CASE("bubble power integrals") {
    const auto ball = DomainDescriptor::ball(Point::Zero(), 1);
    BubbleParams b;
    b.delta = 1e-3;
    // ∫_{R⁴} U³ = c4³ ω3 δ / 4 = A δ; the part outside the unit ball is about 2δ² relative
    const auto q = integrate_bubble_power(ball, b, 3.0);
    CHECK(std::abs(q.value / (constants().A * b.delta) - 1) < 1e-5);
    CHECK_THROWS_AS(integrate_bubble_power(ball, b, 4.0), DomainError);
    b.delta = 0.2;
    CHECK_THROWS_AS(integrate_bubble_power(ball, b, 3.0), PreconditionError);
}

TEST_CASE("Taylor ratios respect hand-derived constants") {
    // F'' = 3 s²: |3(a+b)² − 3a²| ≤ 6|a||b| + 3b²
    // F' = s³: |(a+b)³ − a³ − 3a²b| = |3ab² + b³| ≤ 3(|a|b² + |b|³)
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int k = 0; k < 10000; ++k) {
        const double a = u(rng), b = u(rng);
        CHECK(taylor_ratio(3, a, b) <= 6 + 1e-12);
        CHECK(taylor_ratio(2, a, b) <= 3 + 1e-12);
    }
    const auto c = taylor_bound_check(1, 100000, 10, 0);
    CHECK(std::isfinite(c.constant));
    CHECK(c.constant > 0);
}

TEST_CASE("fits recover exact models") {
    std::vector<double> x{1e-2, 1e-3, 1e-4, 1e-5}, y;
    for (double v : x) y.push_back(3.0 * v * v * std::abs(std::log(v)) - 2.0 * v * v);
    const auto f = fit_log_quadratic(x, y);
    CHECK(f.a == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.b == doctest::Approx(-2.0).epsilon(1e-8));
    std::vector<double> z;
    for (double v : x) z.push_back(5 * std::pow(v, 1.5));
    const auto l = fit_loglog(x, z);
    CHECK(l.slope == doctest::Approx(1.5).epsilon(1e-12));
    const auto m = fit_line({1, 2, 3}, {2, 4, 6});
    CHECK(m.slope == doctest::Approx(2.0));
    CHECK(std::abs(m.intercept) < 1e-12);
}

TEST_CASE("lemma A3 suite is stable across reseedings") {
    const auto reps = lemma_a3_suite(100000, 3, 0);
    REQUIRE(reps.size() == 4);
    for (const auto& r : reps) CHECK(r.pass);
}
