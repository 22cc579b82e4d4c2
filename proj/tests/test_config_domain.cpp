#include "spikelab/config.hpp"
#include "spikelab/domain.hpp"
#include "spikelab/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spikelab;

TEST_CASE("key=value parsing") {
    const auto kv = KeyValues::parse("# comment\nkind = ball\nradius=2\ncenter=1,0,0,0\n", "t");
    CHECK(kv.get_string("kind") == "ball");
    CHECK(kv.get_double("radius") == 2.0);
    CHECK(kv.get_point("center")(0) == 1.0);
    CHECK_NOTHROW(kv.reject_unknown());
    const auto kv2 = KeyValues::parse("kind=ball\nbogus=1\n", "t");
    kv2.get_string("kind");
    CHECK_THROWS_WITH_AS(kv2.reject_unknown(), doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(kv2.get_double("missing"), doctest::Contains("missing"), ConfigError);
    CHECK(parse_real_list("1e-1, 1e-2,1e-3", "x").size() == 3);
}

TEST_CASE("domain from config rejects unknown keys") {
    CHECK(DomainDescriptor::from_config(KeyValues::parse("kind=ball\nradius=1\n")).kind() ==
          DomainDescriptor::Kind::Ball);
    CHECK_THROWS_AS(DomainDescriptor::from_config(KeyValues::parse("kind=ball\nradus=1\n")), ConfigError);
    CHECK_THROWS_AS(DomainDescriptor::from_config(KeyValues::parse("kind=torus\n")), ConfigError);
}

TEST_CASE("margins") {
    const auto ball = DomainDescriptor::ball(Point::Zero(), 2.0);
    CHECK(ball.margin(Point(0.5, 0, 0, 0)) == doctest::Approx(1.5));
    CHECK(ball.inradius() == doctest::Approx(2.0));
    const auto pf = DomainDescriptor::perforated(Point::Zero(), 1, Point(0.3, 0, 0, 0), 0.2);
    CHECK_FALSE(pf.inside(Point(0.3, 0, 0, 0)));
    CHECK(pf.inside(Point(-0.5, 0, 0, 0)));
    const auto db = DomainDescriptor::dumbbell(1, 2.5, 0.1);
    CHECK(db.inside(Point(0, 0.05, 0, 0)));
    CHECK_FALSE(db.inside(Point(0, 0.15, 0, 0)));
    CHECK(db.inside(Point(-1.25, 0, 0, 0)));
}

TEST_CASE("ray breakpoints bracket every inside/outside switch") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (const auto& dom : {DomainDescriptor::dumbbell(1, 2.5, 0.1),
                            DomainDescriptor::perforated(Point::Zero(), 1, Point(0.3, 0, 0, 0), 0.2),
                            DomainDescriptor::collocation_ellipsoid(Point::Zero(), Point(1, 0.8, 0.7, 0.6))}) {
        for (int trial = 0; trial < 50; ++trial) {
            const Point o = dom.interior_point();
            Point dir(n(rng), n(rng), n(rng), n(rng));
            dir.normalize();
            const double tmax = 6.0;
            auto bp = dom.ray_breakpoints(o, dir, tmax);
            bp.insert(bp.begin(), 0.0);
            bp.push_back(tmax);
            // dense sampling inside each piece never sees both states
            for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
                const bool ref = dom.inside(o + 0.5 * (bp[k] + bp[k + 1]) * dir);
                for (int s = 1; s < 50; ++s) {
                    const double t = bp[k] + (bp[k + 1] - bp[k]) * s / 50.0;
                    CHECK(dom.inside(o + t * dir) == ref);
                }
            }
        }
    }
}

TEST_CASE("boundary samples lie on the boundary") {
    const auto pf = DomainDescriptor::perforated(Point::Zero(), 1, Point(0.3, 0, 0, 0), 0.2);
    for (const auto& s : pf.boundary_samples(200, 0)) CHECK(std::abs(pf.margin(s.point)) < 1e-12);
    const auto a = pf.boundary_samples(50, 7), b = pf.boundary_samples(50, 7);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i].point - b[i].point).norm() == 0.0);
}
