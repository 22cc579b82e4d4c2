#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/reduced_energy.hpp"

#include <doctest.h>

#include <cmath>

using namespace spikelab;

namespace {
const double A = 8 * std::sqrt(2.0) * M_PI * M_PI;
const double tau0 = 1 / (4 * M_PI * M_PI);
}  // namespace

TEST_CASE("critical d and its small-lambda limit") {
    CHECK(critical_d(0.1, tau0) == doctest::Approx(0.05 + 32 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(std::abs(critical_d(0.0, tau0) - std::sqrt(8.0) / (2 * M_PI * M_PI) * A * A * tau0) < 1e-12);
}

TEST_CASE("psi gradient matches differences") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    const std::vector<double> lam{0.5, 0.6}, d{20.0, 22.0}, mus{1.0, 2.0};
    const std::vector<Point> xi{Point(0.1, 0.2, 0, 0), Point(-0.3, 0, 0.1, 0)};
    const auto g = psi_grad(lam, d, xi, mus, ev);
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
        auto dp = d, dm = d;
        dp[i] += h;
        dm[i] -= h;
        const double fd = (psi(lam, dp, xi, mus, ev) - psi(lam, dm, xi, mus, ev)) / (2 * h);
        CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6));
    }
    for (int k = 0; k < 4; ++k) {
        auto xp = xi, xm = xi;
        xp[1](k) += h;
        xm[1](k) -= h;
        const double fd = (psi(lam, d, xp, mus, ev) - psi(lam, d, xm, mus, ev)) / (2 * h);
        CHECK(g(2 + 4 + k) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("minimisation on the ball") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    const SpikeBox box{40, 52, cube(-0.5, 0.5)};
    ReducedOptions o;
    o.starts = 8;
    const auto r = solve_reduced_system(ev, {0.1}, {1.0}, {box}, ReducedMode::Minimization, 0.0, o);
    CHECK(std::abs(r.d_star[0] - (0.05 + 32 * std::sqrt(2.0))) < 1e-6);
    CHECK(r.xi_star[0].norm() < 1e-6);
    // common μ factor leaves the argmin in place
    const auto s = solve_reduced_system(ev, {0.1}, {3.0}, {box}, ReducedMode::Minimization, 0.0, o);
    CHECK(std::abs(s.d_star[0] - r.d_star[0]) < 1e-9);
    CHECK((s.xi_star[0] - r.xi_star[0]).norm() < 1e-6);
    // a box that excludes the stationary d puts the minimiser on its face
    CHECK_THROWS_AS(solve_reduced_system(ev, {0.1}, {1.0}, {SpikeBox{46, 52, cube(-0.5, 0.5)}},
                                         ReducedMode::Minimization, 0.0, o),
                    BoundaryMinimizerError);
}

TEST_CASE("degree mode on the ball") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    const auto r = solve_reduced_system(ev, {0.1}, {1.0}, {SpikeBox{40, 52, cube(-0.5, 0.5)}}, ReducedMode::Degree);
    REQUIRE(r.degree_certificates.size() == 1);
    CHECK(r.degree_certificates[0].degree == 1);
    CHECK(std::abs(r.d_star[0] - (0.05 + 32 * std::sqrt(2.0))) < 1e-9);
}

TEST_CASE("mirror ensemble breakdowns are swap invariant") {
    RobinEvaluator ev(DomainDescriptor::ball(Point::Zero(), 1));
    SpikeEnsemble e;
    BubbleParams a, b;
    a.delta = b.delta = 1e-2;
    a.xi = Point(-0.4, 0, 0, 0);
    b.xi = Point(0.4, 0, 0, 0);
    e.bubbles = {a, b};
    e.lambdas = {0.1, 0.1};
    e.beta = -1;
    e.eta = 0.2;
    EnergyOptions o;
    o.coupling_K = 1.0;
    const auto x = energy_terms_asymptotic(ev, e, o);
    std::swap(e.bubbles[0], e.bubbles[1]);
    const auto y = energy_terms_asymptotic(ev, e, o);
    CHECK(x.total() == doctest::Approx(y.total()).epsilon(1e-14));
    CHECK(x.A[0] == doctest::Approx(y.A[1]).epsilon(1e-14));
    CHECK(x.D(0, 1) == doctest::Approx(y.D(1, 0)).epsilon(1e-14));
}

TEST_CASE("ensemble validation") {
    const auto ball = DomainDescriptor::ball(Point::Zero(), 1);
    SpikeEnsemble e;
    BubbleParams a;
    a.delta = 1e-2;
    e.bubbles = {a};
    e.lambdas = {20.0};
    CHECK_THROWS_AS(e.validate(ball), PreconditionError);
    e.lambdas = {1.0};
    CHECK_NOTHROW(e.validate(ball));
    BubbleParams c = a;
    c.xi = Point(0.05, 0, 0, 0);
    e.bubbles = {a, c};
    e.lambdas = {1.0, 1.0};
    CHECK_THROWS_AS(e.validate(ball), PreconditionError);
}

TEST_CASE("remainder budget is monotone") {
    SpikeEnsemble e;
    BubbleParams a;
    a.delta = 1e-2;
    e.bubbles = {a};
    e.lambdas = {0.5};
    e.beta = -1;
    const double base = remainder_budget(e);
    CHECK(base == doctest::Approx(0.5e-2 + 1e-4 + 1e-4));
    e.beta = -10;
    CHECK(remainder_budget(e) > base);
    e.bubbles[0].delta = 2e-2;
    CHECK(remainder_budget(e) > base);
}

TEST_CASE("beta schedules") {
    const double C = std::sqrt(8.0) / (2 * M_PI * M_PI) * A * A * tau0;
    const std::vector<double> grid{1, 0.5, 0.25, 0.1};
    CHECK(beta_admissible(BetaSchedule::parse("const:-1", C), grid, {tau0}).admissible);
    CHECK(beta_admissible(BetaSchedule::parse("exp:0.25", C), grid, {tau0}).admissible);
    CHECK_FALSE(beta_admissible(BetaSchedule::parse("exp:1", C), grid, {tau0}).admissible);
    // dominance: anything below an admissible schedule in magnitude stays admissible
    CHECK(beta_admissible(BetaSchedule::parse("exp:0.1", C), grid, {tau0}).admissible);
    CHECK(BetaSchedule::parse("exp:0.25", C).beta(0.5) == doctest::Approx(-std::exp(0.25 * C / 0.5)));
    CHECK_THROWS_AS(BetaSchedule::parse("linear:2", C), ConfigError);
}

TEST_CASE("asymptotic and quadrature energies agree within the remainder budget for small delta") {
    RobinEvaluator ball(DomainDescriptor::ball(Point::Zero(), 1));
    auto gap = [&](double d, double& budget, double& qerr) {
        SpikeEnsemble e;
        BubbleParams b;
        b.delta = d;
        e.bubbles = {b};
        e.lambdas = {0.1};
        e.eta = 0.5;
        const auto a = energy_terms_asymptotic(ball, e), q = energy_terms_quadrature(ball, e);
        budget = a.remainder_budget;
        qerr = q.total_error();
        return std::abs(a.total() - q.total());
    };
    double budget, qerr;
    const double g5 = gap(1e-5, budget, qerr);
    CHECK(g5 <= budget + qerr);
    // the gap is the δ² term of A − B: (c4³/2) A² τ in the closed form against ½ A² τ by quadrature
    const double c4 = std::sqrt(8.0), a2tau = 32 * M_PI * M_PI;
    const double g2 = gap(1e-2, budget, qerr);
    CHECK(g2 / 1e-4 == doctest::Approx(0.5 * (c4 * c4 * c4 - 1) * a2tau).epsilon(1e-2));
    CHECK(g2 > budget);
}
