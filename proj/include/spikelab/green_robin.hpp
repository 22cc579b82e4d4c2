#pragma once

#include "spikelab/domain.hpp"
#include "spikelab/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace spikelab {

class DumbbellSchwarz;

/// Kelvin image kernel of a sphere: α4 / (R² (|x̃|²|ỹ|² − 2 x̃·ỹ + 1)), x̃ = (x−o)/R.
/// Symmetric in (x, y); equals α4/|x−y|² whenever y lies on the sphere.
double sphere_image_kernel(const Sphere& s, const Point& x, const Point& y);

/// Exterior-charge basis shared by every harmonic fit on one domain.
/// The least-squares factorization is computed once; each right-hand side costs O(N·M).
class MfsBasis {
public:
    explicit MfsBasis(const DomainDescriptor& domain);
    /// Basis from explicit sample sets (used for subdomains).
    MfsBasis(std::vector<BoundarySample> collocation, std::vector<BoundarySample> check, std::vector<Point> charges);

    std::size_t n_collocation() const { return colloc_.size(); }
    std::size_t n_charges() const { return static_cast<std::size_t>(charges_.cols()); }
    long rank() const { return rank_; }
    double condition_estimate() const { return condition_; }

    const std::vector<BoundarySample>& collocation_points() const { return colloc_; }
    const std::vector<BoundarySample>& check_points() const { return check_; }
    const std::vector<BoundarySample>& fit_samples() const { return fit_samples_; }

    /// Charge strengths fitting `data` given at the collocation points.
    Eigen::VectorXd solve(const Eigen::VectorXd& data) const;
    /// Explicit pseudo-inverse (charges × collocation points).
    const Eigen::MatrixXd& pseudo_inverse() const { return pinv_; }
    /// Σ q_j α4 / |y − c_j|².
    double field(const Eigen::VectorXd& q, const Point& y) const;
    Point charge(std::size_t j) const { return charges_.col(static_cast<Eigen::Index>(j)); }

private:
    std::vector<BoundarySample> colloc_, check_, fit_samples_;
    Eigen::Matrix<double, 4, Eigen::Dynamic> charges_;
    Eigen::MatrixXd pinv_;
    long rank_ = 0;
    double condition_ = 1.0;

    void factor();
};

/// One weighted Kelvin image term w · K_S(source, y).
struct ImageTerm {
    Sphere sphere;
    double weight = 1.0;
};

/// Harmonic function on Ω represented by Kelvin images plus exterior charges.
struct HarmonicField {
    Point source = Point::Zero();
    std::vector<ImageTerm> images;
    Eigen::VectorXd strengths;
    std::shared_ptr<const MfsBasis> basis;
    double residual = 0.0;          // max defect on collocation points
    double residual_check = 0.0;    // max defect on held-out boundary points
    double data_scale = 1.0;        // max |boundary data|, for relative statements
    bool closed_form = false;
    bool usable = true;
    /// Optional extra term for representations that are not image + charges (subdomain solvers).
    std::shared_ptr<const std::function<double(const Point&)>> extra;

    double operator()(const Point& y) const;
    /// Exterior charge locations (empty for closed-form fields).
    std::vector<Point> charge_locations() const;
};

/// Regular part H(·, ξ) for one source.
using HarmonicCorrector = HarmonicField;

struct RobinOptions {
    double min_margin = 1e-3;    // robin() precondition: dist(x,∂Ω) ≥ min_margin · inradius
    double fd_step_coarse = 1e-3;  // relative to the inradius
    double fd_step_fine = 1e-4;
    double accuracy_tol = 1e-2;  // admissible boundary defect relative to τ (bounds the τ error by the max principle)
    std::size_t cache_capacity = 4096;
};

/// Green function, regular part and Robin function of a domain.
class RobinEvaluator {
public:
    explicit RobinEvaluator(DomainDescriptor domain, RobinOptions options = {});

    const DomainDescriptor& domain() const { return domain_; }
    const RobinOptions& options() const { return options_; }
    /// Charge basis of the domain (built on first use; null for closed-form domains).
    std::shared_ptr<const MfsBasis> basis() const;
    /// Lobe decomposition solver (dumbbell only, else null).
    std::shared_ptr<const DumbbellSchwarz> schwarz() const { return schwarz_; }

    /// H(x, y); symmetric up to the collocation residual.
    double regular_part(const Point& x, const Point& y) const;
    /// ∂H(x, ξ)/∂ξ_j for j = 1..4 (closed form on balls, frozen-deflation differences otherwise).
    double regular_part_source_derivative(const Point& x, const Point& xi, int j) const;
    double green(const Point& x, const Point& y) const;

    double robin(const Point& x) const;
    Point robin_grad(const Point& x) const;
    Matrix4 robin_hess(const Point& x) const;
    /// Single-level central differences, for Newton iterations.
    void robin_grad_hess_fast(const Point& x, Point& grad, Matrix4& hess) const;
    Point robin_grad_fast(const Point& x) const;

    /// Regular part H(·, ξ) as a reusable object; cached by source.
    std::shared_ptr<const HarmonicCorrector> build_corrector(const Point& xi) const;

    /// Harmonic extension of boundary data g with a caller supplied deflation:
    /// data = g − Σ images, the remainder is fitted by exterior charges.
    HarmonicField fit_boundary_data(const std::function<double(const Point&)>& g, const Point& source,
                                    const std::vector<ImageTerm>& images) const;

    /// Kelvin spheres usable for a source at x (image strictly outside Ω).
    std::vector<Sphere> deflation_spheres(const Point& x) const;

    /// Throws DomainError outside Ω and AccuracyError too close to ∂Ω.
    void check_interior(const Point& x, double room = 0.0) const;

    double fd_step_coarse() const { return options_.fd_step_coarse * domain_.inradius(); }
    double fd_step_fine() const { return options_.fd_step_fine * domain_.inradius(); }

private:
    DomainDescriptor domain_;
    RobinOptions options_;
    std::shared_ptr<const DumbbellSchwarz> schwarz_;
    mutable std::once_flag basis_once_;
    mutable std::shared_ptr<const MfsBasis> basis_;

    mutable std::mutex cache_mutex_;
    mutable std::map<std::array<long long, 4>, std::shared_ptr<const HarmonicCorrector>> cache_;

    HarmonicCorrector make_corrector(const Point& xi, const std::vector<Sphere>& spheres, bool diagnostics = true) const;
    HarmonicField fit_impl(const std::function<double(const Point&)>& g, const Point& source,
                           const std::vector<ImageTerm>& images, bool diagnostics) const;
    bool use_schwarz(const Point& x) const;
    double robin_frozen(const Point& x, const std::vector<Sphere>& spheres) const;
    double ball_regular_part(const Point& x, const Point& y) const;
    void fd_grad_hess(const Point& x, double h, const std::vector<Sphere>& spheres, Point& g, Matrix4& H,
                      bool want_hess) const;
};

}  // namespace spikelab
