#pragma once

#include "spikelab/geometry.hpp"

#include <vector>

namespace spikelab {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss–Legendre rule; results are cached per n and thread safe.
const GaussRule& gauss_legendre(int n);

/// Integrates f over [a, b] with an n-point Gauss–Legendre rule.
template <class F>
double gauss_integrate(F&& f, double a, double b, int n) {
    const GaussRule& g = gauss_legendre(n);
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * f(c + h * g.nodes[k]);
    return s * h;
}

/// Product rule on S³ in Hopf coordinates.
/// Surface measure is ½ du dφ₁ dφ₂ with u = sin²η, so Gauss in u and trapezoid in φ
/// integrate polynomials of degree k exactly once n_phi ≥ k+1 and n_u ≥ (k+2)/4.
struct SphereRule {
    std::vector<Point> points;
    std::vector<double> weights;  // sum to |S³| = 2π²
    int degree = 0;
};

SphereRule sphere_rule(int degree);
SphereRule sphere_rule(int n_u, int n_phi);

/// Same rule with every point mapped through the rotation.
SphereRule rotated(const SphereRule& rule, const Matrix4& rotation);

}  // namespace spikelab
