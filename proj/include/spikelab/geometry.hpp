#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace spikelab {

using Point = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

/// Axis-aligned box in R⁴.
struct Box {
    Point lo = Point::Zero();
    Point hi = Point::Zero();

    Point center() const { return 0.5 * (lo + hi); }
    Point half_width() const { return 0.5 * (hi - lo); }
    bool contains(const Point& x) const {
        return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }
    /// Smallest distance from x to a face (negative outside).
    double face_distance(const Point& x) const {
        return std::min((x - lo).minCoeff(), (hi - x).minCoeff());
    }
    /// Box scaled about its center by (1 + rel) along every axis.
    Box inflated(double rel) const {
        Box b;
        b.lo = center() - (1.0 + rel) * half_width();
        b.hi = center() + (1.0 + rel) * half_width();
        return b;
    }
    double diameter() const { return (hi - lo).norm(); }
};

inline Box make_box(const Point& lo, const Point& hi) { return Box{lo, hi}; }
inline Box cube(double lo, double hi) { return Box{Point::Constant(lo), Point::Constant(hi)}; }

/// Halton sequence in dimension ≤ 8 with bases 2,3,5,7,11,13,17,19.
double halton(std::uint64_t index, int dim);

/// Uniformly distributed points on S³ (unit sphere in R⁴) from a shifted Halton
/// sequence through the equal-area Hopf parametrization.
std::vector<Point> sphere_points(std::size_t n, std::uint64_t seed);

/// Random rotation of R⁴ drawn deterministically from the seed.
Matrix4 random_rotation(std::uint64_t seed);

}  // namespace spikelab
