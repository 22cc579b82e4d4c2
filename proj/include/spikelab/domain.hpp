#pragma once

#include "spikelab/config.hpp"
#include "spikelab/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spikelab {

/// Sphere used for Kelvin deflation. `contains_domain` is true for an outer wall
/// (Ω lies inside the sphere) and false for a hole (Ω lies outside).
struct Sphere {
    Point center = Point::Zero();
    double radius = 1.0;
    bool contains_domain = true;
};

struct BoundarySample {
    Point point;
    Point normal;  // outward unit normal
    double scale;  // local feature size, used to place exterior charges
};

/// Settings of the boundary collocation solver.
struct CollocationSettings {
    int n_boundary = 2400;
    int n_check = 600;
    int n_charges = 900;
    double charge_offset = 0.3;         // fraction of the local feature size
    double residual_threshold = 1e-3;   // held-out boundary defect relative to the data scale
    std::uint64_t seed = 0;
};

/// Bounded domain in R⁴: analytic ball or a collocation-defined shape.
class DomainDescriptor {
public:
    enum class Kind { Ball, Dumbbell, Perforated, Collocation };
    enum class Shape { Ball, Ellipsoid };

    static DomainDescriptor ball(const Point& center, double radius);
    /// Two unit-radius-scaled lobes at ±separation/2 along e₁ joined by a cylinder of radius ρ.
    static DomainDescriptor dumbbell(double lobe_radius, double separation, double handle_radius);
    static DomainDescriptor perforated(const Point& outer_center, double outer_radius, const Point& hole_center,
                                       double hole_radius);
    /// Ball treated as a generic shape, so all Green computations go through collocation.
    static DomainDescriptor collocation_ball(const Point& center, double radius);
    static DomainDescriptor collocation_ellipsoid(const Point& center, const Point& semi_axes);

    /// Builds a descriptor from key=value text; consumes and validates all keys.
    static DomainDescriptor from_config(const KeyValues& kv);
    static DomainDescriptor load(const std::string& path);

    Kind kind() const { return kind_; }
    Shape shape() const { return shape_; }
    std::string kind_name() const;
    bool closed_form() const { return kind_ == Kind::Ball; }

    /// Signed margin: positive inside, zero on ∂Ω, a lower bound for the distance to ∂Ω in magnitude.
    double margin(const Point& x) const;
    bool inside(const Point& x) const { return margin(x) > 0.0; }
    Box bounding_box() const;
    /// Sorted parameters t in (0, tmax) where the ray o + t·dir (|dir| = 1) meets a surface
    /// carrying part of ∂Ω. Between consecutive values the ray is entirely inside or outside.
    std::vector<double> ray_breakpoints(const Point& o, const Point& dir, double tmax) const;
    /// Largest inscribed radius of the main component.
    double inradius() const;
    /// A point deep inside Ω.
    Point interior_point() const;

    /// Boundary samples with outward normals; deterministic in (n, seed).
    std::vector<BoundarySample> boundary_samples(std::size_t n, std::uint64_t seed) const;

    /// Spheres known analytically for this domain (walls, lobes, holes).
    const std::vector<Sphere>& analytic_spheres() const { return spheres_; }

    CollocationSettings& collocation() { return colloc_; }
    const CollocationSettings& collocation() const { return colloc_; }

    /// Geometry parameters for reports.
    std::vector<std::pair<std::string, std::string>> describe() const;

    // Accessors for the closed-form ball.
    const Point& center() const { return center_; }
    double radius() const { return radius_; }
    double handle_radius() const { return handle_radius_; }
    double separation() const { return separation_; }
    const Point& semi_axes() const { return semi_axes_; }

private:
    Kind kind_ = Kind::Ball;
    Shape shape_ = Shape::Ball;
    Point center_ = Point::Zero();
    double radius_ = 1.0;           // ball radius, lobe radius or outer radius
    double separation_ = 0.0;       // dumbbell lobe distance
    double handle_radius_ = 0.0;    // dumbbell ρ
    Point hole_center_ = Point::Zero();
    double hole_radius_ = 0.0;
    Point semi_axes_ = Point::Ones();
    std::vector<Sphere> spheres_;
    CollocationSettings colloc_;

    double handle_half_length() const;
};

}  // namespace spikelab
