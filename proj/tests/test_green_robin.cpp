#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/green_robin.hpp"

#include <doctest.h>

#include <cmath>

using namespace spikelab;

namespace {
// Kelvin closed form for the unit ball, written out independently
double h_ball(const Point& x, const Point& y) {
    return constants().alpha4 / (x.squaredNorm() * y.squaredNorm() - 2 * x.dot(y) + 1);
}
}  // namespace

TEST_CASE("ball regular part and Robin function") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    const Point x(0.2, -0.1, 0.3, 0.0), y(-0.4, 0.1, 0.0, 0.2);
    CHECK(ev.regular_part(x, y) == doctest::Approx(h_ball(x, y)).epsilon(1e-13));
    CHECK(ev.robin(x) == doctest::Approx(constants().alpha4 / std::pow(1 - x.squaredNorm(), 2)).epsilon(1e-13));
    CHECK(ev.robin(Point::Zero()) == doctest::Approx(1 / (4 * M_PI * M_PI)).epsilon(1e-14));
    // G vanishes linearly at the boundary
    const Point b(0.6, 0.8, 0, 0);
    const double g1 = ev.green(x, (1 - 2e-3) * b), g2 = ev.green(x, (1 - 4e-3) * b);
    CHECK(g1 / g2 == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("ball gradient and Hessian match differences of the closed form") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    const Point x(0.2, -0.1, 0.3, 0.05);
    auto tau = [](const Point& p) { return constants().alpha4 / std::pow(1 - p.squaredNorm(), 2); };
    const Point g = ev.robin_grad(x);
    const Matrix4 H = ev.robin_hess(x);
    const double h = 1e-5;
    for (int d = 0; d < 4; ++d) {
        Point p = x, m = x;
        p(d) += h;
        m(d) -= h;
        CHECK(g(d) == doctest::Approx((tau(p) - tau(m)) / (2 * h)).epsilon(1e-7));
        CHECK(H(d, d) == doctest::Approx((tau(p) - 2 * tau(x) + tau(m)) / (h * h)).epsilon(1e-4));
    }
}

TEST_CASE("scaled ball") {
    RobinEvaluator ev(DomainDescriptor::ball(Point(1, 0, 0, 0), 2.0));
    // τ_R(c + R y) = τ_1(y) / R²
    CHECK(ev.robin(Point(1.5, 0, 0, 0)) == doctest::Approx(constants().alpha4 / std::pow(1 - 0.0625, 2) / 4).epsilon(1e-13));
}

TEST_CASE("collocation ball agrees with the Kelvin closed form") {
    RobinEvaluator ev(DomainDescriptor::collocation_ball(Point::Zero(), 1));
    for (const Point& x : {Point(0, 0, 0, 0), Point(0.5, 0.1, -0.2, 0.3), Point(-0.7, 0.2, 0, 0)}) {
        const double exact = constants().alpha4 / std::pow(1 - x.squaredNorm(), 2);
        CHECK(std::abs(ev.robin(x) / exact - 1) < 1e-6);
    }
    const Point x(0.3, 0.2, 0, -0.1), y(-0.2, 0.4, 0.1, 0);
    CHECK(std::abs(ev.regular_part(x, y) - ev.regular_part(y, x)) < 1e-6 * h_ball(x, y));
}

TEST_CASE("perforated domain: Robin function grows towards the hole") {
    RobinEvaluator ev(DomainDescriptor::perforated(Point::Zero(), 1, Point(0.3, 0, 0, 0), 0.2));
    const double far = ev.robin(Point(-0.4, 0, 0, 0));
    const double near = ev.robin(Point(0.05, 0, 0, 0));
    CHECK(near > far);
    // the hole only adds boundary, so τ exceeds the ball value (domain monotonicity of H)
    CHECK(far > constants().alpha4 / std::pow(1 - 0.16, 2));
}

TEST_CASE("interior precondition") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    CHECK_THROWS_AS(ev.robin(Point(1.2, 0, 0, 0)), DomainError);
    CHECK_THROWS_AS(ev.robin(Point(1 - 1e-5, 0, 0, 0)), AccuracyError);
}
