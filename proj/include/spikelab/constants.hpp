#pragma once

#include <Eigen/Dense>

namespace spikelab {

/// Universal constants of the four-dimensional critical problem.
/// Built once and frozen; concurrent reads are safe.
struct ConstantsTable {
    double c4;      // bubble normalization 2√2
    double omega3;  // |S³| = 2π²
    double alpha4;  // Newtonian kernel constant 1/(2 omega3)
    double A;       // ∫ U_{1,0}³ over R⁴
    double I3;      // ∫ (1+|y|²)^{-3}
    double I4;      // ∫ (1+|y|²)^{-4}
    Eigen::Matrix<double, 5, 5> sigma;

    /// (c4⁴/4) I_4, the energy of one unit bubble.
    double leading_level() const { return 0.25 * c4 * c4 * c4 * c4 * I4; }
};

const ConstantsTable& constants();

/// ∫_{R⁴} (1+|y|²)^{-p} = ω₃ / (2(p−1)(p−2)); throws DomainError for p ≤ 2.
double radial_integral(double p);

/// Adaptive quadrature of ω₃ ∫₀^∞ t³ (1+t²)^{-p} dt, used as an independent check.
double radial_integral_quadrature(double p);

/// σ_jk = ∫ U² ψ^j ψ^k for the unit bubble (closed form; zero off the diagonal).
double sigma_entry(int j, int k);

/// Same entry from a radial Gauss–Kronrod integral times an S³ product rule.
double sigma_quadrature(int j, int k);

/// ∫ U_{1,0}³ evaluated as a 4D integral (radial adaptive rule times S³ rule).
double bubble_cube_quadrature();

}  // namespace spikelab
