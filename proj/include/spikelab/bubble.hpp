#pragma once

#include "spikelab/geometry.hpp"

namespace spikelab {

/// One Aubin–Talenti bubble U_{δ,ξ} with self-interaction coefficient μ.
struct BubbleParams {
    double delta = 1.0;
    Point xi = Point::Zero();
    double mu = 1.0;

    /// Throws PreconditionError unless δ > 0 and μ > 0.
    void validate() const;
};

/// c4 δ / (δ² + |x−ξ|²).
double bubble_value(const BubbleParams& b, const Point& x);

/// μ^{-1/2} U_{δ,ξ}(x), the solution of −ΔU = μU³.
double bubble_scaled(const BubbleParams& b, const Point& x);

/// ψ^0 = δ ∂U/∂δ for j = 0, ψ^j = δ ∂U/∂ξ_j for j = 1..4.
double bubble_derivative(const BubbleParams& b, int j, const Point& x);

/// Spatial gradient ∇_x U_{δ,ξ}.
Point bubble_gradient(const BubbleParams& b, const Point& x);

}  // namespace spikelab
