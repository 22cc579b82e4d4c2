#pragma once

#include "spikelab/green_robin.hpp"

#include <string>
#include <vector>

namespace spikelab {

struct CriticalPoint {
    Point x = Point::Zero();
    double tau = 0.0;
    double grad_residual = 0.0;          // |∇τ| with Richardson differences
    double newton_step = 0.0;            // |Hess⁻¹ ∇τ|, distance to the nearby zero
    Eigen::Vector4d eigenvalues = Eigen::Vector4d::Zero();  // of Hess τ, ascending
    std::string classification;          // min, max, saddle or degenerate
    int index_sign = 0;                  // sign det Hess τ (0 when degenerate)
};

struct CriticalSearchOptions {
    int starts_per_box = 16;
    int max_iterations = 40;
    double step_tol = 1e-10;           // relative to the inradius
    double step_accept = 1e-4;         // accepted |Hess⁻¹ ∇τ| relative to the inradius
    double dedup_tol = 1e-5;           // relative to the inradius
    double degeneracy_threshold = 1e-6;  // min|eig| / max|eig|
    std::uint64_t seed = 0;
};

/// Damped Newton on ∇τ from one start; nullopt-like result signalled by `converged`.
struct NewtonOutcome {
    bool converged = false;
    Point x = Point::Zero();
    int iterations = 0;
};
NewtonOutcome newton_on_gradient(const RobinEvaluator& ev, const Point& start, const Box& box,
                                 const CriticalSearchOptions& opt);

/// Classifies a converged point with full-accuracy gradient and Hessian.
CriticalPoint classify_critical_point(const RobinEvaluator& ev, const Point& x, const CriticalSearchOptions& opt);

/// Multistart search inside each box; starts are Halton points, deduplicated results sorted lexicographically.
std::vector<CriticalPoint> find_robin_critical_points(const RobinEvaluator& ev, const std::vector<Box>& boxes,
                                                      const CriticalSearchOptions& opt = {});

struct DegreeOptions {
    double safety_margin = 1e-7;   // required min |∇τ| on the box faces (absolute)
    int face_grid = 4;             // samples per dimension on each 3-face
    int min_level = 2;             // multistart grid levels g, g⁴ starts each
    int max_level = 5;
    CriticalSearchOptions search;
};

struct DegreeCertificate {
    Box box;
    int degree = 0;
    double boundary_margin = 0.0;  // min sampled |∇τ| on ∂box
    double required_margin = 0.0;
    int grid_level = 0;            // level at which the zero count stabilised
    std::vector<int> zeros_per_level;
    std::vector<CriticalPoint> zeros;
};

/// Σ sign det Hess τ over all zeros found inside the box, with the exhaustiveness evidence.
/// Throws NotCertifiableError on a small boundary gradient, a degenerate zero, or no stable count.
DegreeCertificate brouwer_degree(const RobinEvaluator& ev, const Box& box, const DegreeOptions& opt = {});

/// Scans Ω for critical points and certifies a box around each one.
struct DegreeScan {
    std::vector<CriticalPoint> candidates;
    std::vector<DegreeCertificate> certificates;
    std::vector<std::string> failures;  // boxes that could not be certified, with reasons
};
DegreeScan scan_degrees(const RobinEvaluator& ev, const std::vector<Point>& starts, const DegreeOptions& opt = {});

/// Default scan starts: the interior point, points along the symmetry axis and a few Halton points.
std::vector<Point> default_scan_starts(const DomainDescriptor& domain, int extra = 8);

}  // namespace spikelab
