#pragma once

#include "spikelab/bubble.hpp"
#include "spikelab/green_robin.hpp"

#include <functional>
#include <vector>

namespace spikelab {

enum class ProjectionMode { Expansion, Exact };

const char* mode_name(ProjectionMode m);

/// P f = f − h with h harmonic and h = f on ∂Ω, for f = U_{δ,ξ} (component −1) or ψ^j.
/// Exact mode solves for h; expansion mode uses the first-order approximation of h
/// through the regular part of the Green function.
struct ProjectedBubble {
    BubbleParams bubble;
    int component = -1;
    ProjectionMode mode = ProjectionMode::Exact;
    bool closed_form = false;
    /// max |P f| over held-out boundary samples: the fit residual in exact mode,
    /// the O(δ³) boundary mismatch of the expansion otherwise.
    double defect_estimate = 0.0;
    std::function<double(const Point&)> harmonic_part;

    double base(const Point& x) const;
    double operator()(const Point& x) const { return base(x) - harmonic_part(x); }
};

/// Projection of U_{δ,ξ}. Requires δ ≤ 0.1·dist(ξ, ∂Ω).
ProjectedBubble project_bubble(const RobinEvaluator& ev, const BubbleParams& b, ProjectionMode mode);

/// Projection of ψ^j, j = 0..4.
ProjectedBubble project_derivative(const RobinEvaluator& ev, const BubbleParams& b, int j, ProjectionMode mode);

/// Closed-form harmonic extension of U (j = −1) or ψ^j boundary data on a ball.
double ball_harmonic_part(const Sphere& ball, const BubbleParams& b, int j, const Point& x);

/// Low-discrepancy interior grid that avoids a tube of width tube·inradius around ∂Ω.
std::vector<Point> defect_grid(const DomainDescriptor& domain, std::size_t n = 4096, double tube = 0.05,
                               std::uint64_t seed = 0);

struct ProjectionDefect {
    double value = 0.0;           // max over the grid of |P_exact f − P_expansion f|
    Point location = Point::Zero();
    std::size_t n_points = 0;
    double exact_residual = 0.0;  // boundary defect of the exact projection
};

/// Compares the two modes on defect_grid (the source ξ is always included).
ProjectionDefect projection_defect(const RobinEvaluator& ev, const BubbleParams& b, int component = -1,
                                   std::size_t grid_points = 4096);

}  // namespace spikelab
