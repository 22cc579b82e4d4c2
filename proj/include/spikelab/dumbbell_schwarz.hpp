#pragma once

#include "spikelab/domain.hpp"
#include "spikelab/green_robin.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace spikelab {

struct SchwarzSettings {
    double overlap = 3.0;         // handle subdomain reaches this many ρ into each lobe
    double ring_spacing = 1.0 / 3.0;  // collocation ring spacing along the handle, in ρ
    int ring_points = 20;
    int charge_ring_points = 12;
    double charge_ring_spacing = 2.0 / 3.0;  // in ρ
    double charge_offset = 0.5;   // in ρ
    int end_points = 160;   // per hemispherical end
    int end_charges = 60;
    int cap_radial = 16;
    int cap_polar = 6;
    int cap_azimuth = 12;
    double clearance = 2.0;       // sources must stay this many ρ away from the handle subdomain
};

/// Green function of the dumbbell for sources inside a lobe, by overlapping domain
/// decomposition: exact Poisson kernels on both lobes and a charge fit on the handle
/// capsule T = {dist(x, [−a−ℓ, a+ℓ]·e₁) ≤ ρ}. The fixed point is linear in the source data,
/// so it is solved once as a matrix and each source costs one matrix-vector product.
///
/// For ξ in lobe s, G = Γ_s + P_s[g_s] on lobe s and G = P_o[g_o] on the other lobe,
/// with Γ_s the ball Green function continued past the sphere and g the handle solution
/// on the spherical caps that close the lobes.
class DumbbellSchwarz {
public:
    explicit DumbbellSchwarz(const DomainDescriptor& domain, SchwarzSettings settings = {});

    /// Lobe index (0: x₁ < 0, 1: x₁ > 0) when the source x can be handled, −1 otherwise.
    int side_of(const Point& x) const;
    bool applicable(const Point& x) const { return side_of(x) >= 0; }

    struct Solution {
        Point source;
        int side = -1;
        Eigen::VectorXd charges;              // handle subdomain strengths
        std::array<Eigen::VectorXd, 2> caps;  // G on the cap nodes of each lobe
        double residual = 0.0;                // handle fit defect on its collocation points
        double residual_check = 0.0;          // same on held-out points
        double data_scale = 0.0;              // max |data| on the handle boundary
    };
    Solution solve(const Point& xi, bool diagnostics = true) const;

    /// H(ξ, y) for the solved source.
    double regular_part(const Solution& sol, const Point& y) const;
    /// τ(ξ) without building the full solution.
    double robin(const Point& xi) const;

    /// Handle subdomain fit, for diagnostics.
    const MfsBasis& handle_basis() const { return *basis_; }
    double handle_half_length() const { return half_length_; }
    std::size_t n_cap_nodes() const { return cap_points_[0].size(); }

private:
    SchwarzSettings settings_;
    double lobe_radius_, separation_, rho_, exposed_, half_length_;
    std::array<Point, 2> centers_;
    std::shared_ptr<const MfsBasis> basis_;

    // collocation rows of T that lie inside each lobe (artificial boundary)
    std::array<std::vector<Eigen::Index>, 2> art_rows_;
    std::array<std::vector<Point>, 2> cap_points_;
    std::array<Eigen::VectorXd, 2> cap_weights_;
    std::array<Eigen::MatrixXd, 2> cap_field_;  // u_T at cap nodes per unit charge
    Eigen::MatrixXd z_;                         // charges = Z · (source data on collocation rows)
    std::array<Eigen::MatrixXd, 2> cap_response_;  // cap values of lobe s per unit data on its art rows

    double poisson(int lobe, const Point& x, const Point& y) const;
    double poisson_integral(int lobe, const Point& x, const Eigen::VectorXd& g) const;
    double continued_green(int lobe, const Point& xi, const Point& y) const;
    bool in_handle_subdomain(const Point& y) const;
    double handle_distance(const Point& y) const;
};

}  // namespace spikelab
