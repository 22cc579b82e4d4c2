#pragma once

#include "spikelab/bubble.hpp"
#include "spikelab/critical_points.hpp"
#include "spikelab/green_robin.hpp"
#include "spikelab/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spikelab {

/// m spikes with their λ_i, the coupling β and the separation parameter η.
struct SpikeEnsemble {
    std::vector<BubbleParams> bubbles;
    std::vector<double> lambdas;
    double beta = 0.0;
    double eta = 0.1;

    std::size_t size() const { return bubbles.size(); }
    /// Throws PreconditionError when a spike is closer than η to ∂Ω or to another spike,
    /// when λ_i ∉ (0, λ₁(Ω)) on a ball, or when δ_i, μ_i are not positive.
    void validate(const DomainDescriptor& domain) const;
};

/// First Dirichlet eigenvalue of the ball of radius R in R⁴: j₁,₁² / R².
double lambda1_ball(double radius = 1.0);

struct EnergyOptions {
    double remainder_constant = 1.0;     // c in c·Σ(λδ + δ² + |β|δ²)
    std::optional<double> coupling_K;    // D_ij constant; calibrated by quadrature at δ = 1e-2 when absent
    QuadratureSpec quadrature;           // resolution for the quadrature path and the calibration
};

struct EnergyBreakdown {
    std::string method;  // "asymptotic" or "quadrature"
    std::vector<double> A, B, C;
    std::vector<double> A_err, B_err, C_err;
    Eigen::MatrixXd D, D_err;
    double leading_level = 0.0;
    double psi_value = 0.0;
    double remainder_budget = 0.0;
    double coupling_K = 0.0;  // asymptotic path only

    /// Σ(A_i − B_i − C_i) − Σ_{i<j} D_ij.
    double total() const;
    /// Propagated quadrature error of total().
    double total_error() const;
};

EnergyBreakdown energy_terms_asymptotic(const RobinEvaluator& ev, const SpikeEnsemble& ens,
                                        const EnergyOptions& opt = {});
EnergyBreakdown energy_terms_quadrature(const RobinEvaluator& ev, const SpikeEnsemble& ens,
                                        const EnergyOptions& opt = {});

/// D_ij / ((β/2) μ_i⁻¹ μ_j⁻¹ δ_i² δ_j² |ln δ_i δ_j|) from one quadrature at δ = 1e-2 for spikes 0 and 1.
double calibrate_coupling(const RobinEvaluator& ev, const SpikeEnsemble& ens, const QuadratureSpec& spec);

/// Σ_i e^{−2d_i/λ_i} (8√2 μ_i⁻¹ A² τ(ξ_i) − 4 μ_i⁻¹ ω₃ d_i).
double psi(const std::vector<double>& lambdas, const std::vector<double>& d, const std::vector<Point>& xis,
           const std::vector<double>& mus, const RobinEvaluator& ev);
/// Gradient ordered (d_1..d_m, ξ_1, …, ξ_m): analytic in d, through ∇τ in ξ.
Eigen::VectorXd psi_grad(const std::vector<double>& lambdas, const std::vector<double>& d,
                         const std::vector<Point>& xis, const std::vector<double>& mus, const RobinEvaluator& ev);

/// Stationary point of d ↦ Ψ: λ/2 + 2√2 A² τ / ω₃.
double critical_d(double lambda, double tau);

/// c·Σ(λ_i δ_i + δ_i² + |β| δ_i²).
double remainder_budget(const SpikeEnsemble& ens, double c = 1.0);

struct SpikeBox {
    double d_lo = 0.0, d_hi = 0.0;
    Box xi_box;
};

enum class ReducedMode { Minimization, Degree };

struct ReducedOptions {
    int starts = 32;
    int max_iterations = 200;
    double tolerance = 1e-10;     // on the projected step, relative to the box size
    int probes_per_dim = 3;       // boundary probes per face dimension
    DegreeOptions degree;
    std::uint64_t seed = 0;
};

struct CriticalPointReport {
    ReducedMode mode = ReducedMode::Minimization;
    std::vector<double> d_star, delta_star, lambdas, mus;
    std::vector<Point> xi_star;
    std::vector<double> residuals;      // |∂Ψ_i/∂d_i| and |∇τ(ξ_i)| per spike (scaled by the exponential)
    std::vector<double> psi_exponents;  // −2 d_i / λ_i
    std::vector<double> psi_prefactors; // 8√2 μ_i⁻¹ A² τ − 4 μ_i⁻¹ ω₃ d_i
    double psi_at_star = 0.0;           // may underflow to 0 for small λ; use exponents and prefactors
    double min_boundary_margin = 0.0;   // minimization: smallest (boundary probe − interior value), scaled
    std::vector<DegreeCertificate> degree_certificates;
};

/// Minimization: box-constrained multistart projected Newton on each separable term of Ψ,
/// then an interiority check against boundary probes. Degree: d from the affine equation and
/// ξ from a degree certificate of ∇τ on each box.
/// Throws BoundaryMinimizerError when the best point lies on the box boundary.
CriticalPointReport solve_reduced_system(const RobinEvaluator& ev, const std::vector<double>& lambdas,
                                         const std::vector<double>& mus, const std::vector<SpikeBox>& boxes,
                                         ReducedMode mode, double eta = 0.0, const ReducedOptions& opt = {});

/// β as a function of λ, carried as log|β| so that fast schedules do not overflow.
struct BetaSchedule {
    std::string description;
    std::function<double(double)> log_abs_beta;
    double beta(double lambda) const;  // sign is negative for the exponential family
    double sign = -1.0;
    /// "const:<value>" or "exp:<rate>", the latter meaning β(λ) = −exp(rate·C/λ) with C the given rate constant.
    static BetaSchedule parse(const std::string& text, double rate_constant);
};

struct BetaAdmissibility {
    std::vector<double> lambdas;
    std::vector<double> rate_constants;                // C_i = (c4/ω₃) A² τ_i
    std::vector<std::vector<double>> log10_ratio_exp;  // log10(|β| e^{−C_i/(2λ)}), per spike and λ
    std::vector<std::vector<double>> log10_ratio_d2;   // log10(|β| δ_i²)
    std::vector<std::vector<double>> log10_ratio_b2d2; // log10(|β|² δ_i²)
    double margin = 0.0;
    bool admissible = false;
    std::string reason;
};

/// Along a decreasing λ grid with δ_i = e^{−C_i/λ}: admissible when every ratio sequence is
/// non-increasing and ends below the margin.
BetaAdmissibility beta_admissible(const BetaSchedule& beta, const std::vector<double>& lambdas,
                                  const std::vector<double>& tau_values, double margin = 1e-3);

}  // namespace spikelab
