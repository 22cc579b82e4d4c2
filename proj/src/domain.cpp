#include "spikelab/domain.hpp"

#include "spikelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spikelab {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string fmt(const Point& p) {
    return fmt(p(0)) + "," + fmt(p(1)) + "," + fmt(p(2)) + "," + fmt(p(3));
}

// Points on S² from a Fibonacci lattice, used for the handle cross sections.
Eigen::Vector3d s2_point(std::size_t i, std::size_t n, double shift) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const double z = 1.0 - (2.0 * (static_cast<double>(i) + 0.5)) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * (static_cast<double>(i) / golden + shift);
    return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

DomainDescriptor DomainDescriptor::ball(const Point& center, double radius) {
    if (!(radius > 0.0)) throw DomainError("ball: radius must be positive");
    DomainDescriptor d;
    d.kind_ = Kind::Ball;
    d.center_ = center;
    d.radius_ = radius;
    d.spheres_ = {Sphere{center, radius, true}};
    return d;
}

DomainDescriptor DomainDescriptor::dumbbell(double lobe_radius, double separation, double handle_radius) {
    if (!(lobe_radius > 0.0) || !(handle_radius > 0.0) || !(handle_radius < lobe_radius))
        throw DomainError("dumbbell: need 0 < handle_radius < lobe_radius");
    if (!(separation > 2.0 * lobe_radius)) throw DomainError("dumbbell: lobes must be disjoint (separation > 2 r)");
    DomainDescriptor d;
    d.kind_ = Kind::Dumbbell;
    d.radius_ = lobe_radius;
    d.separation_ = separation;
    d.handle_radius_ = handle_radius;
    const Point e1 = Point::UnitX();
    d.center_ = Point::Zero();
    d.spheres_ = {Sphere{-0.5 * separation * e1, lobe_radius, true}, Sphere{0.5 * separation * e1, lobe_radius, true}};
    return d;
}

DomainDescriptor DomainDescriptor::perforated(const Point& outer_center, double outer_radius, const Point& hole_center,
                                              double hole_radius) {
    if (!(outer_radius > 0.0) || !(hole_radius > 0.0)) throw DomainError("perforated: radii must be positive");
    if ((hole_center - outer_center).norm() + hole_radius >= outer_radius)
        throw DomainError("perforated: hole must lie strictly inside the outer ball");
    DomainDescriptor d;
    d.kind_ = Kind::Perforated;
    d.center_ = outer_center;
    d.radius_ = outer_radius;
    d.hole_center_ = hole_center;
    d.hole_radius_ = hole_radius;
    d.spheres_ = {Sphere{outer_center, outer_radius, true}, Sphere{hole_center, hole_radius, false}};
    d.colloc_.charge_offset = 0.5;  // two curved walls: farther charges fit better at equal count
    return d;
}

DomainDescriptor DomainDescriptor::collocation_ball(const Point& center, double radius) {
    if (!(radius > 0.0)) throw DomainError("collocation ball: radius must be positive");
    DomainDescriptor d;
    d.kind_ = Kind::Collocation;
    d.shape_ = Shape::Ball;
    d.center_ = center;
    d.radius_ = radius;
    d.semi_axes_ = Point::Constant(radius);
    return d;
}

DomainDescriptor DomainDescriptor::collocation_ellipsoid(const Point& center, const Point& semi_axes) {
    if (!(semi_axes.minCoeff() > 0.0)) throw DomainError("ellipsoid: semi-axes must be positive");
    DomainDescriptor d;
    d.kind_ = Kind::Collocation;
    d.shape_ = Shape::Ellipsoid;
    d.center_ = center;
    d.semi_axes_ = semi_axes;
    d.radius_ = semi_axes.minCoeff();
    return d;
}

DomainDescriptor DomainDescriptor::from_config(const KeyValues& kv) {
    const std::string kind = kv.get_string("kind");
    DomainDescriptor d;
    if (kind == "ball") {
        d = ball(kv.get_point("center", Point::Zero()), kv.get_double("radius", 1.0));
    } else if (kind == "dumbbell") {
        d = dumbbell(kv.get_double("lobe_radius", 1.0), kv.get_double("separation", 2.5),
                     kv.get_double("handle_radius"));
    } else if (kind == "perforated") {
        d = perforated(kv.get_point("outer_center", Point::Zero()), kv.get_double("outer_radius", 1.0),
                       kv.get_point("hole_center", Point(0.3, 0, 0, 0)), kv.get_double("hole_radius", 0.2));
    } else if (kind == "collocation") {
        const std::string shape = kv.get_string("shape", "ball");
        if (shape == "ball")
            d = collocation_ball(kv.get_point("center", Point::Zero()), kv.get_double("radius", 1.0));
        else if (shape == "ellipsoid")
            d = collocation_ellipsoid(kv.get_point("center", Point::Zero()), kv.get_point("semi_axes"));
        else
            throw ConfigError(kv.origin() + ": key 'shape': expected ball or ellipsoid, got '" + shape + "'");
    } else {
        throw ConfigError(kv.origin() + ": key 'kind': expected ball, dumbbell, perforated or collocation, got '" +
                          kind + "'");
    }
    CollocationSettings& c = d.colloc_;
    c.n_boundary = static_cast<int>(kv.get_int("n_boundary", c.n_boundary));
    c.n_check = static_cast<int>(kv.get_int("n_check", c.n_check));
    c.n_charges = static_cast<int>(kv.get_int("n_charges", c.n_charges));
    c.charge_offset = kv.get_double("charge_offset", c.charge_offset);
    c.residual_threshold = kv.get_double("residual_threshold", c.residual_threshold);
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
    if (c.n_boundary < c.n_charges) throw ConfigError(kv.origin() + ": key 'n_boundary' must be >= n_charges");
    if (c.n_charges < 1 || c.n_check < 1) throw ConfigError(kv.origin() + ": key 'n_charges'/'n_check' must be positive");
    if (!(c.charge_offset > 0.0)) throw ConfigError(kv.origin() + ": key 'charge_offset' must be positive");
    kv.reject_unknown();
    return d;
}

DomainDescriptor DomainDescriptor::load(const std::string& path) { return from_config(KeyValues::load(path)); }

std::string DomainDescriptor::kind_name() const {
    switch (kind_) {
        case Kind::Ball: return "ball";
        case Kind::Dumbbell: return "dumbbell";
        case Kind::Perforated: return "perforated";
        case Kind::Collocation: return shape_ == Shape::Ball ? "collocation-ball" : "collocation-ellipsoid";
    }
    return "unknown";
}

double DomainDescriptor::handle_half_length() const {
    return 0.5 * separation_ - std::sqrt(radius_ * radius_ - handle_radius_ * handle_radius_);
}

double DomainDescriptor::margin(const Point& x) const {
    switch (kind_) {
        case Kind::Ball: return radius_ - (x - center_).norm();
        case Kind::Dumbbell: {
            const Point e1 = Point::UnitX();
            const double l1 = radius_ - (x + 0.5 * separation_ * e1).norm();
            const double l2 = radius_ - (x - 0.5 * separation_ * e1).norm();
            const double perp = x.tail<3>().norm();
            const double cyl = std::min(handle_radius_ - perp, 0.5 * separation_ - std::abs(x(0)));
            return std::max({l1, l2, cyl});
        }
        case Kind::Perforated:
            return std::min(radius_ - (x - center_).norm(), (x - hole_center_).norm() - hole_radius_);
        case Kind::Collocation: {
            if (shape_ == Shape::Ball) return radius_ - (x - center_).norm();
            const Point y = (x - center_).cwiseQuotient(semi_axes_);
            return semi_axes_.minCoeff() * (1.0 - y.norm());
        }
    }
    return 0.0;
}

namespace {

// roots of |(o − c + t·dir) ⊙ w|² = r², i.e. a scaled sphere; only the components flagged in mask
void quadric_roots(const Point& o, const Point& dir, const Point& c, const Point& w, const Point& mask, double r,
                   std::vector<double>& out) {
    const Point p = (o - c).cwiseProduct(w).cwiseProduct(mask), d = dir.cwiseProduct(w).cwiseProduct(mask);
    const double a = d.squaredNorm(), b = p.dot(d), cc = p.squaredNorm() - r * r;
    if (a <= 0.0) return;
    const double disc = b * b - a * cc;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    // stable form of the two roots
    const double q = -(b + std::copysign(sq, b));
    if (q != 0.0) {
        out.push_back(q / a);
        out.push_back(cc / q);
    } else {
        out.push_back(0.0);
    }
}

}  // namespace

std::vector<double> DomainDescriptor::ray_breakpoints(const Point& o, const Point& dir, double tmax) const {
    std::vector<double> t;
    const Point ones = Point::Ones();
    switch (kind_) {
        case Kind::Ball: quadric_roots(o, dir, center_, ones, ones, radius_, t); break;
        case Kind::Perforated:
            quadric_roots(o, dir, center_, ones, ones, radius_, t);
            quadric_roots(o, dir, hole_center_, ones, ones, hole_radius_, t);
            break;
        case Kind::Dumbbell: {
            const Point e1 = Point::UnitX();
            quadric_roots(o, dir, -0.5 * separation_ * e1, ones, ones, radius_, t);
            quadric_roots(o, dir, 0.5 * separation_ * e1, ones, ones, radius_, t);
            quadric_roots(o, dir, Point::Zero(), ones, Point(0, 1, 1, 1), handle_radius_, t);
            if (dir(0) != 0.0)
                for (double s : {-0.5 * separation_, 0.5 * separation_}) t.push_back((s - o(0)) / dir(0));
            break;
        }
        case Kind::Collocation:
            if (shape_ == Shape::Ball)
                quadric_roots(o, dir, center_, ones, ones, radius_, t);
            else
                quadric_roots(o, dir, center_, semi_axes_.cwiseInverse(), ones, 1.0, t);
            break;
    }
    std::vector<double> out;
    for (double v : t)
        if (v > 0.0 && v < tmax) out.push_back(v);
    std::sort(out.begin(), out.end());
    return out;
}

Box DomainDescriptor::bounding_box() const {
    switch (kind_) {
        case Kind::Dumbbell: {
            const double h = 0.5 * separation_ + radius_;
            Box b;
            b.lo = Point(-h, -radius_, -radius_, -radius_);
            b.hi = Point(h, radius_, radius_, radius_);
            return b;
        }
        case Kind::Collocation:
            if (shape_ == Shape::Ellipsoid) return Box{center_ - semi_axes_, center_ + semi_axes_};
            [[fallthrough]];
        default: return Box{center_ - Point::Constant(radius_), center_ + Point::Constant(radius_)};
    }
}

Point DomainDescriptor::interior_point() const {
    switch (kind_) {
        case Kind::Dumbbell: return -0.5 * separation_ * Point::UnitX();
        case Kind::Perforated: {
            Point dir = center_ - hole_center_;
            if (dir.norm() < 1e-12) dir = Point::UnitX();
            dir.normalize();
            // balance the outer wall against the hole along the axis away from the hole
            const double f = (hole_center_ - center_).norm();
            return center_ + 0.5 * (radius_ - f + hole_radius_) * dir;
        }
        default: return center_;
    }
}

double DomainDescriptor::inradius() const {
    switch (kind_) {
        case Kind::Ball: return radius_;
        case Kind::Dumbbell: return radius_;
        case Kind::Perforated: return margin(interior_point());
        case Kind::Collocation: return semi_axes_.minCoeff();
    }
    return radius_;
}

std::vector<BoundarySample> DomainDescriptor::boundary_samples(std::size_t n, std::uint64_t seed) const {
    std::vector<BoundarySample> out;
    out.reserve(n);
    auto sphere_part = [&](const Point& c, double r, bool outward, std::size_t count, std::uint64_t s,
                           auto&& keep) {
        // oversample because some points are discarded where pieces overlap
        std::size_t want = count, produced = 0;
        std::size_t batch = count;
        std::uint64_t salt = 0;
        while (produced < want) {
            const auto pts = sphere_points(batch + batch / 2 + 16, s * 1315423911ULL + salt++);
            for (const Point& w : pts) {
                const Point p = c + r * w;
                if (!keep(p)) continue;
                out.push_back({p, outward ? Point(w) : Point(-w), r});
                if (++produced == want) break;
            }
            batch = want - produced;
        }
    };
    switch (kind_) {
        case Kind::Ball: sphere_part(center_, radius_, true, n, seed, [](const Point&) { return true; }); break;
        case Kind::Collocation:
            if (shape_ == Shape::Ball) {
                sphere_part(center_, radius_, true, n, seed, [](const Point&) { return true; });
            } else {
                const auto pts = sphere_points(n, seed);
                const double amin = semi_axes_.minCoeff(), amax = semi_axes_.maxCoeff();
                for (const Point& w : pts) {
                    const Point p = center_ + semi_axes_.cwiseProduct(w);
                    Point nrm = w.cwiseQuotient(semi_axes_);
                    nrm.normalize();
                    out.push_back({p, nrm, amin * amin / amax});
                }
            }
            break;
        case Kind::Dumbbell: {
            const double a = handle_half_length();
            const std::size_t n_handle = std::max<std::size_t>(n * 3 / 10, 8);
            const std::size_t n_lobe = (n - n_handle) / 2;
            const Point e1 = Point::UnitX();
            const double rho = handle_radius_;
            auto outside_handle = [&](const Point& p) { return p.tail<3>().norm() > rho || std::abs(p(0)) > 0.5 * separation_; };
            sphere_part(-0.5 * separation_ * e1, radius_, true, n_lobe, seed, outside_handle);
            sphere_part(0.5 * separation_ * e1, radius_, true, n - n_handle - n_lobe, seed + 7, outside_handle);
            // handle: stratified rings along e₁, Fibonacci points on each ring sphere
            const std::size_t per_ring = std::max<std::size_t>(12, static_cast<std::size_t>(std::sqrt(n_handle * rho / a * 2.0)));
            const std::size_t rings = std::max<std::size_t>(2, n_handle / per_ring);
            std::size_t made = 0;
            for (std::size_t k = 0; k < rings; ++k) {
                const double x1 = -a + 2.0 * a * (static_cast<double>(k) + 0.5) / static_cast<double>(rings);
                const std::size_t cnt = (k + 1 == rings) ? n_handle - made : per_ring;
                const double shift = halton(k + 1 + seed, 0);
                for (std::size_t i = 0; i < cnt; ++i) {
                    const Eigen::Vector3d v = s2_point(i, cnt, shift);
                    Point p(x1, rho * v(0), rho * v(1), rho * v(2));
                    out.push_back({p, Point(0.0, v(0), v(1), v(2)), rho});
                }
                made += cnt;
            }
            break;
        }
        case Kind::Perforated: {
            const std::size_t n_hole = std::max<std::size_t>(n / 4, 8);
            sphere_part(center_, radius_, true, n - n_hole, seed, [](const Point&) { return true; });
            sphere_part(hole_center_, hole_radius_, false, n_hole, seed + 11, [](const Point&) { return true; });
            break;
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> DomainDescriptor::describe() const {
    std::vector<std::pair<std::string, std::string>> d;
    d.emplace_back("kind", kind_name());
    switch (kind_) {
        case Kind::Ball:
            d.emplace_back("center", fmt(center_));
            d.emplace_back("radius", fmt(radius_));
            break;
        case Kind::Dumbbell:
            d.emplace_back("lobe_radius", fmt(radius_));
            d.emplace_back("separation", fmt(separation_));
            d.emplace_back("handle_radius", fmt(handle_radius_));
            break;
        case Kind::Perforated:
            d.emplace_back("outer_center", fmt(center_));
            d.emplace_back("outer_radius", fmt(radius_));
            d.emplace_back("hole_center", fmt(hole_center_));
            d.emplace_back("hole_radius", fmt(hole_radius_));
            break;
        case Kind::Collocation:
            d.emplace_back("center", fmt(center_));
            if (shape_ == Shape::Ball)
                d.emplace_back("radius", fmt(radius_));
            else
                d.emplace_back("semi_axes", fmt(semi_axes_));
            break;
    }
    if (kind_ != Kind::Ball) {
        d.emplace_back("n_boundary", std::to_string(colloc_.n_boundary));
        d.emplace_back("n_check", std::to_string(colloc_.n_check));
        d.emplace_back("n_charges", std::to_string(colloc_.n_charges));
        d.emplace_back("charge_offset", fmt(colloc_.charge_offset));
        d.emplace_back("residual_threshold", fmt(colloc_.residual_threshold));
        d.emplace_back("seed", std::to_string(colloc_.seed));
    }
    return d;
}

}  // namespace spikelab
