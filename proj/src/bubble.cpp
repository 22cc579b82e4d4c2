#include "spikelab/bubble.hpp"

#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"

#include <cmath>

namespace spikelab {

void BubbleParams::validate() const {
    if (!(delta > 0.0)) throw PreconditionError("bubble: delta must be positive");
    if (!(mu > 0.0)) throw PreconditionError("bubble: mu must be positive");
}

// Everything is written in the rescaled variable ρ² = |x−ξ|²/δ² so that δ down to
// 1e-8 never forms |x−ξ|²/δ⁴.
double bubble_value(const BubbleParams& b, const Point& x) {
    const double rho2 = (x - b.xi).squaredNorm() / (b.delta * b.delta);
    return constants().c4 / (b.delta * (1.0 + rho2));
}

double bubble_scaled(const BubbleParams& b, const Point& x) { return bubble_value(b, x) / std::sqrt(b.mu); }

double bubble_derivative(const BubbleParams& b, int j, const Point& x) {
    const double c4 = constants().c4;
    const Point z = (x - b.xi) / b.delta;
    const double rho2 = z.squaredNorm();
    const double q = 1.0 + rho2;
    if (j == 0) return c4 * (rho2 - 1.0) / (b.delta * q * q);
    if (j < 0 || j > 4) throw DomainError("bubble_derivative: j must lie in 0..4");
    return 2.0 * c4 * z(j - 1) / (b.delta * q * q);
}

Point bubble_gradient(const BubbleParams& b, const Point& x) {
    const double c4 = constants().c4;
    const Point z = (x - b.xi) / b.delta;
    const double q = 1.0 + z.squaredNorm();
    return -2.0 * c4 * z / (b.delta * b.delta * q * q);
}

}  // namespace spikelab
