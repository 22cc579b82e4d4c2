#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/projection.hpp"
#include "spikelab/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace spikelab;

namespace {
const double c4 = std::sqrt(8.0);
}

TEST_CASE("ball, centred bubble: harmonic part is the constant boundary value") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    for (double d : {1e-1, 1e-2}) {
        BubbleParams b;
        b.delta = d;
        const auto pu = project_bubble(ev, b, ProjectionMode::Exact);
        for (const Point& x : {Point(Point::Zero()), Point(0.5, 0.2, 0, 0), Point(-0.1, 0.3, 0.6, 0.1)})
            CHECK(pu.harmonic_part(x) == doctest::Approx(c4 * d / (1 + d * d)).epsilon(1e-13));
        const auto pe = project_bubble(ev, b, ProjectionMode::Expansion);
        CHECK(pe.harmonic_part(Point::Zero()) == doctest::Approx(c4 * d).epsilon(1e-13));
    }
}

TEST_CASE("projection defect at the centre is c4 d^3/(1+d^2)") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    double prev = INFINITY;
    for (double d : {1e-1, 1e-2, 1e-3}) {
        BubbleParams b;
        b.delta = d;
        const auto pd = projection_defect(ev, b, -1, 1024);
        const double expect = c4 * d * d * d / (1 + d * d);
        CHECK(std::abs(pd.value - expect) <= 1e-8 * expect + 1e-18);
        CHECK(pd.value / d < prev);
        prev = pd.value / d;
        CHECK(pd.value <= 10 * c4 * d * d * d);
    }
}

TEST_CASE("exact projection: 0 < PU < U and PU vanishes on the boundary") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    BubbleParams b;
    b.delta = 0.05;
    b.xi = Point(0.2, -0.1, 0, 0.1);
    const auto pu = project_bubble(ev, b, ProjectionMode::Exact);
    for (const Point& x : defect_grid(ev.domain(), 512)) {
        const double v = pu(x), u = bubble_value(b, x);
        CHECK(v > 0);
        CHECK(v < u);
    }
    for (const auto& s : ev.domain().boundary_samples(64, 1)) CHECK(std::abs(pu(s.point)) < 1e-12);
}

TEST_CASE("exact projection satisfies -Laplace PU = U^3 away from the spike") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    BubbleParams b;
    b.delta = 0.05;
    b.xi = Point(0.1, 0, 0, 0);
    const auto pu = project_bubble(ev, b, ProjectionMode::Exact);
    const Point x(-0.3, 0.2, 0.1, 0);
    const double h = 2e-3;
    double lap = 0;
    for (int d = 0; d < 4; ++d) {
        Point p = x, m = x;
        p(d) += h;
        m(d) -= h;
        lap += (pu(p) - 2 * pu(x) + pu(m)) / (h * h);
    }
    const double u = bubble_value(b, x);
    CHECK(std::abs(-lap - u * u * u) < 1e-3 * u * u * u);
}

TEST_CASE("psi^0 on the centred ball has a constant harmonic part") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    BubbleParams b;
    b.delta = 0.05;
    const auto p0 = project_derivative(ev, b, 0, ProjectionMode::Exact);
    const double d = b.delta, expect = c4 * d * (1 - d * d) / std::pow(1 + d * d, 2);
    CHECK(p0.harmonic_part(Point(0.3, 0.1, 0, 0)) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(p0.harmonic_part(Point::Zero()) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("psi^j harmonic parts match differences of the U harmonic part") {
    const Sphere unit;
    BubbleParams b;
    b.delta = 0.05;
    b.xi = Point(0.1, 0.2, -0.1, 0);
    const Point x(-0.2, 0.3, 0.1, 0.2);
    const double h = 1e-6;
    for (int j = 1; j <= 4; ++j) {
        BubbleParams p = b, m = b;
        p.xi(j - 1) += h;
        m.xi(j - 1) -= h;
        const double fd = b.delta * (ball_harmonic_part(unit, p, -1, x) - ball_harmonic_part(unit, m, -1, x)) / (2 * h);
        CHECK(ball_harmonic_part(unit, b, j, x) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("psi^1 expansion defect ratio decreases across decades") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    double prev = INFINITY;
    for (double d : {1e-1, 1e-2, 1e-3}) {
        BubbleParams b;
        b.delta = d;
        const double r = projection_defect(ev, b, 1, 512).value / (d * d);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("(PU)^2 approaches U^2 in L2") {
    const auto ball = DomainDescriptor::ball(Point::Zero(), 1);
    RobinEvaluator ev(ball);
    std::vector<double> norms;
    for (double d : {1e-2, 1e-3}) {
        BubbleParams b;
        b.delta = d;
        const auto pu = project_bubble(ev, b, ProjectionMode::Exact);
        QuadratureSpec s;
        s.spike_centers = {{b.xi, d}};
        QuadratureEngine q(ball, s);
        norms.push_back(std::sqrt(q.integrate([&](const Point& x) {
                                       const double u = bubble_value(b, x), p = pu(x);
                                       return std::pow(p * p - u * u, 2);
                                   }).value));
    }
    CHECK(norms[1] < norms[0]);
}

TEST_CASE("precondition on delta") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    BubbleParams b;
    b.delta = 0.2;
    b.xi = Point(0.5, 0, 0, 0);
    CHECK_THROWS_AS(project_bubble(ev, b, ProjectionMode::Exact), PreconditionError);
}

TEST_CASE("collocation path agrees with the closed form on the ball") {
    RobinEvaluator ball(DomainDescriptor::ball(Point::Zero(), 1));
    RobinEvaluator col(DomainDescriptor::collocation_ball(Point::Zero(), 1));
    BubbleParams b;
    b.delta = 0.02;
    b.xi = Point(0.2, 0.1, 0, 0);
    const auto a = project_bubble(ball, b, ProjectionMode::Exact);
    const auto c = project_bubble(col, b, ProjectionMode::Exact);
    for (const Point& x : {Point(0, 0, 0, 0), Point(-0.4, 0.2, 0.1, 0.3)})
        CHECK(std::abs(a.harmonic_part(x) - c.harmonic_part(x)) < 1e-6 * a.harmonic_part(x));
}
