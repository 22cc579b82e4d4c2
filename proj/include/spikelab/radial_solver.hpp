#pragma once

#include <array>
#include <string>
#include <vector>

namespace spikelab {

/// Positive radial solution of −Δu = μu³ + λu on the unit ball of R⁴, u(0) = u0.
struct RadialProfile {
    double lambda = 0.0;
    double mu = 1.0;
    double u0 = 0.0;
    std::vector<std::array<double, 3>> grid;  // (r, u, u') at the accepted integrator steps
    double first_zero = 0.0;
    double delta_effective = 0.0;  // c4 / (√μ u0)
    double energy = 0.0;           // ½∫|∇u|² − (λ/2)∫u² − (μ/4)∫u⁴ over the ball r < first_zero
    double residual = 0.0;         // |u(1)| when solved on the unit ball
};

struct ShootOptions {
    double r0 = 1e-8;       // series start radius
    double r_cap = 50.0;    // no crossing before this radius is an error
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    bool keep_grid = true;
};

/// Integrates from the center until u first vanishes.
/// Works in σ = √μ·u0 scaled variables v(s) = u(s/σ)/u0, so results depend on (λ, √μ·u0) only.
/// Throws NoCrossingError past r_cap and StepSizeError when the integrator stalls.
RadialProfile shoot(double lambda, double mu, double u0, const ShootOptions& opt = {});

struct SolveOptions {
    double u0_min = 0.01;   // geometric sweep start, in units of 1/√μ
    double u0_max = 1e9;
    double factor = 2.0;
    double tol = 1e-12;     // on first_zero − 1
    ShootOptions shoot;
};

/// u0 with first_zero = 1 by a geometric sweep for a bracket and a bracketing root finder.
/// Throws BracketError when the sweep finds no bracket (λ ≥ λ₁, or λ too small for double precision).
RadialProfile solve_ball(double lambda, double mu = 1.0, const SolveOptions& opt = {});

struct ConcentrationRow {
    double lambda = 0.0, u0 = 0.0, delta_eff = 0.0, d_lambda = 0.0, energy = 0.0, residual = 0.0;
    bool used = false;
    std::string status;  // "ok" or the failure reason
};

struct ConcentrationReport {
    std::vector<ConcentrationRow> rows;
    double mu = 1.0;
    double d0 = 0.0, slope = 0.0, fit_residual = 0.0;  // d(λ) ≈ d0 + slope·λ
    double d_theory = 0.0, slope_theory = 0.5;
    double intercept_rel_error = 0.0;
    bool intercept_pass = false;       // |d0 − d_theory| ≤ 50% d_theory
    bool d_positive = false;
    bool delta_decreasing = false;     // strictly, along decreasing λ
    bool log_increasing = false;       // ln(1/δ) increasing in 1/λ
    bool log_convex = false;           // and convex
    double energy_rel_error = 0.0;     // at the smallest solved λ, against 8π²/3·μ⁻¹
    bool energy_pass = false;
    std::vector<std::string> flags;
    bool pass() const { return intercept_pass && d_positive && delta_decreasing && energy_pass; }
    bool hard_property() const { return delta_decreasing && log_increasing && log_convex; }
};

/// Solves every λ of a decreasing grid, fits d(λ) = λ ln(1/δ_eff) and checks the concentration signature.
/// Throws InsufficientDataError with fewer than three usable λ.
ConcentrationReport concentration_study(const std::vector<double>& lambdas, double mu = 1.0,
                                        const SolveOptions& opt = {});

}  // namespace spikelab
