#pragma once

#include "spikelab/bubble.hpp"
#include "spikelab/domain.hpp"
#include "spikelab/green_robin.hpp"
#include "spikelab/projection.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace spikelab {

struct SpikeCenter {
    Point xi = Point::Zero();
    double delta = 1.0;
};

struct QuadratureSpec {
    std::vector<SpikeCenter> spike_centers;
    double split_radius = 0.0;    // 0: min(η/2, half the closest pair distance, half the boundary distance)
    double eta = 0.0;             // 0: no η cap
    int radial_order = 16;        // Gauss nodes per radial panel
    int inner_degree = 7;         // S³ rule degree inside the spike balls
    std::size_t outer_samples = 4096;  // ray directions for the rest of Ω
    std::uint64_t seed = 0;
    double error_target = 1e-6;   // relative; larger estimates are flagged
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // |fine − coarse| between two independent resolutions
    double inner = 0.0;   // part carried by the spike balls
    double outer = 0.0;
    bool flagged = false; // error above error_target·|value|
};

/// Integration over Ω for integrands concentrated at known spikes.
///
/// A smooth partition of unity splits f into pieces supported in B_r(ξ_i) and a remainder.
/// Spike pieces use y = ξ + t·θ with dyadic radial panels starting at δ and an S³ product rule;
/// the remainder is integrated along rays from one origin, cut exactly at ∂Ω, with a randomly
/// rotated S³ rule for the directions. Every integral is computed at two resolutions with
/// independent rotations and the difference is the error estimate.
/// Construction fixes all nodes; integrate() is pure and safe to call concurrently.
class QuadratureEngine {
public:
    QuadratureEngine(const DomainDescriptor& domain, QuadratureSpec spec);

    QuadResult integrate(const std::function<double(const Point&)>& f) const;

    double split_radius() const { return split_; }
    const QuadratureSpec& spec() const { return spec_; }
    std::size_t node_count() const;

private:
    struct NodeSet {
        std::vector<Point> points;
        std::vector<double> weights;
    };
    QuadratureSpec spec_;
    double split_ = 0.0;
    NodeSet inner_[2], outer_[2];  // [0] coarse, [1] fine

    void build_inner(int level);
    void build_outer(const DomainDescriptor& domain, int level);
    double partition_weight(const Point& x) const;
};

/// Default split radius for the spikes of a spec on a domain.
double default_split_radius(const DomainDescriptor& domain, const std::vector<SpikeCenter>& centers, double eta);

/// ∫_Ω U_{δ,ξ}^p. Requires δ ≤ split_radius/10.
QuadResult integrate_bubble_power(const DomainDescriptor& domain, const BubbleParams& b, double p,
                                  QuadratureSpec spec = {});

/// ∫_Ω U_{δ1,ξ1}^p U_{δ2,ξ2}^q. Requires |ξ1 − ξ2| ≥ 2·split_radius.
QuadResult interaction_integral(const DomainDescriptor& domain, const BubbleParams& b1, const BubbleParams& b2,
                                double p, double q, QuadratureSpec spec = {});

/// ‖(PU₂)² Pψ^j₁‖_{4/3} and ‖PU₁ PU₂ Pψ^j₁‖_{4/3} with exact projections.
std::pair<QuadResult, QuadResult> interaction_norms(const RobinEvaluator& ev, const BubbleParams& b1,
                                                    const BubbleParams& b2, int j, QuadratureSpec spec = {});

/// The pointwise inequalities for F(s) = (s⁺)⁴/4 and the power bound:
/// 1: |F(a+b)−F(a)−F'(a)b| ≤ c(a²b² + b⁴)
/// 2: |F'(a+b)−F'(a)−F''(a)b| ≤ c(|a|b² + |b|³)
/// 3: |F''(a+b)−F''(a)| ≤ c(|a||b| + b²)
/// 4: ||a+b|^p − |a|^p| ≤ C(|a|^{p−1}|b| + |b|^p)
double taylor_ratio(int kind, double a, double b, double p = 3.0);

struct TaylorCheck {
    int kind = 1;
    double constant = 0.0;  // largest sampled ratio
    double worst_a = 0.0, worst_b = 0.0;
    std::size_t samples = 0;
};
TaylorCheck taylor_bound_check(int kind, std::size_t sample_count, double amplitude, std::uint64_t seed,
                               double p = 3.0);

struct AsymptoticFitReport {
    std::string lemma;
    std::string model;
    std::vector<std::vector<double>> samples;  // rows: parameters…, value, error
    std::vector<std::string> sample_columns;
    std::vector<std::pair<std::string, double>> coefficients;
    double residual = 0.0;
    double predicted = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

/// Least squares of y against {x²|ln x|, x²}; returns (a, b, rms relative residual).
struct TwoTermFit {
    double a = 0.0, b = 0.0, residual = 0.0;
};
TwoTermFit fit_log_quadratic(const std::vector<double>& x, const std::vector<double>& y);

/// Slope and intercept of ln y against ln x, with the rms residual.
struct LineFit {
    double slope = 0.0, intercept = 0.0, residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Rate suites for the concentrated-integral estimates, each a list of reports with verdicts.
std::vector<AsymptoticFitReport> lemma_a2_suite(const DomainDescriptor& domain, const QuadratureSpec& base = {});
std::vector<AsymptoticFitReport> lemma_a3_suite(std::size_t samples = 1000000, int reseeds = 5,
                                                std::uint64_t seed = 0);
std::vector<AsymptoticFitReport> lemma_a4_suite(const DomainDescriptor& domain, const QuadratureSpec& base = {});
std::vector<AsymptoticFitReport> lemma_a5_suite(const RobinEvaluator& ev, const QuadratureSpec& base = {});

}  // namespace spikelab
