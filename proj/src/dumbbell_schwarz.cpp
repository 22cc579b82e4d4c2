#include "spikelab/dumbbell_schwarz.hpp"

#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/rules.hpp"

#include <cmath>
#include <numbers>

namespace spikelab {

namespace {

Eigen::Vector3d fib_s2(std::size_t i, std::size_t n, double shift) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const double z = 1.0 - (2.0 * (static_cast<double>(i) + 0.5)) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * (static_cast<double>(i) / golden + shift);
    return {r * std::cos(phi), r * std::sin(phi), z};
}

Point lift(double x1, const Eigen::Vector3d& p) { return Point(x1, p(0), p(1), p(2)); }

}  // namespace

DumbbellSchwarz::DumbbellSchwarz(const DomainDescriptor& domain, SchwarzSettings settings) : settings_(settings) {
    if (domain.kind() != DomainDescriptor::Kind::Dumbbell) throw DomainError("Schwarz solver needs a dumbbell");
    lobe_radius_ = domain.radius();
    separation_ = domain.separation();
    rho_ = domain.handle_radius();
    const double r = lobe_radius_, rho = rho_;
    exposed_ = 0.5 * separation_ - std::sqrt(r * r - rho * rho);
    half_length_ = exposed_ + settings_.overlap * rho;
    const double end_to_center = 0.5 * separation_ - half_length_;
    if (!(end_to_center > 0.0) || std::hypot(end_to_center, rho) > r - rho)
        throw DomainError("handle too wide for the lobe decomposition");
    centers_ = {Point(-0.5 * separation_, 0, 0, 0), Point(0.5 * separation_, 0, 0, 0)};

    // --- handle subdomain samples
    const double lh = half_length_;
    auto classify = [&](const Point& p, bool end) -> int {
        if (end) return p(0) < 0.0 ? 0 : 1;
        if (p(0) < -exposed_) return 0;
        if (p(0) > exposed_) return 1;
        return -1;
    };
    std::vector<BoundarySample> colloc, check;
    std::vector<int> colloc_side;
    const int n_rings = static_cast<int>(std::ceil(2.0 * lh / (rho * settings_.ring_spacing)));
    const auto nr = static_cast<std::size_t>(settings_.ring_points);
    for (int k = 0; k < n_rings; ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            const double x1 = -lh + (k + (pass == 0 ? 0.5 : 0.0)) * 2.0 * lh / n_rings;
            if (pass == 1 && k == 0) continue;
            const std::size_t n = pass == 0 ? nr : nr / 2;
            for (std::size_t i = 0; i < n; ++i) {
                const Eigen::Vector3d w = fib_s2(i, n, 0.382 * k + 0.17 * pass);
                BoundarySample s{lift(x1, rho * w), lift(0.0, w), rho};
                if (pass == 0) {
                    colloc.push_back(s);
                    colloc_side.push_back(classify(s.point, false));
                } else {
                    check.push_back(s);
                }
            }
        }
    }
    // hemispherical end caps keep the subdomain boundary C¹
    auto hemisphere = [&](int e, std::size_t n, std::uint64_t seed) {
        std::vector<Point> dirs;
        const double sgn = e == 0 ? -1.0 : 1.0;
        for (const Point& p : sphere_points(2 * n + 8, seed))
            if (sgn * p(0) > 0.0 && dirs.size() < n) dirs.push_back(p);
        return dirs;
    };
    for (int e = 0; e < 2; ++e) {
        const Point tip = (e == 0 ? -lh : lh) * Point::UnitX();
        for (const Point& w : hemisphere(e, static_cast<std::size_t>(settings_.end_points), 11 + static_cast<std::uint64_t>(e))) {
            colloc.push_back({tip + rho * w, w, rho});
            colloc_side.push_back(e);
        }
        for (const Point& w : hemisphere(e, static_cast<std::size_t>(settings_.end_points / 4), 31 + static_cast<std::uint64_t>(e)))
            check.push_back({tip + rho * w, w, rho});
    }
    std::vector<Point> charges;
    const double off = settings_.charge_offset * rho;
    const int n_crings = static_cast<int>(std::ceil(2.0 * lh / (rho * settings_.charge_ring_spacing)));
    const auto ncr = static_cast<std::size_t>(settings_.charge_ring_points);
    for (int k = 0; k <= n_crings; ++k) {
        const double x1 = -lh + k * 2.0 * lh / n_crings;
        for (std::size_t i = 0; i < ncr; ++i) charges.push_back(lift(x1, (rho + off) * fib_s2(i, ncr, 0.29 * k)));
    }
    for (int e = 0; e < 2; ++e) {
        const Point tip = (e == 0 ? -lh : lh) * Point::UnitX();
        for (const Point& w : hemisphere(e, static_cast<std::size_t>(settings_.end_charges), 51 + static_cast<std::uint64_t>(e)))
            charges.push_back(tip + (rho + off) * w);
    }
    basis_ = std::make_shared<const MfsBasis>(colloc, check, charges);
    for (std::size_t k = 0; k < colloc.size(); ++k)
        if (colloc_side[k] >= 0) art_rows_[static_cast<std::size_t>(colloc_side[k])].push_back(static_cast<Eigen::Index>(k));

    // --- cap quadrature: the part of each lobe sphere inside the handle cylinder.
    // t = |y⊥| = ρ(1 − (1−u)³) resolves the edge behaviour of the data.
    const GaussRule& gr = gauss_legendre(settings_.cap_radial);
    const GaussRule& gp = gauss_legendre(settings_.cap_polar);
    const int na = settings_.cap_azimuth;
    for (int side = 0; side < 2; ++side) {
        const double dir = side == 0 ? 1.0 : -1.0;
        std::vector<double> w;
        for (std::size_t a = 0; a < gr.nodes.size(); ++a) {
            const double u = 0.5 * (gr.nodes[a] + 1.0);
            const double t = rho * (1.0 - std::pow(1.0 - u, 3));
            const double dt = 3.0 * rho * (1.0 - u) * (1.0 - u) * 0.5 * gr.weights[a];
            const double h = std::sqrt(r * r - t * t);
            const double jac = r / h * t * t;
            for (std::size_t b = 0; b < gp.nodes.size(); ++b) {
                const double ct = gp.nodes[b], st = std::sqrt(1.0 - ct * ct);
                for (int c = 0; c < na; ++c) {
                    const double phi = 2.0 * std::numbers::pi * (c + 0.5 * (b % 2)) / na;
                    const Eigen::Vector3d om(st * std::cos(phi), st * std::sin(phi), ct);
                    cap_points_[static_cast<std::size_t>(side)].push_back(centers_[static_cast<std::size_t>(side)] +
                                                                          lift(dir * h, t * om));
                    w.push_back(dt * jac * gp.weights[b] * 2.0 * std::numbers::pi / na);
                }
            }
        }
        cap_weights_[static_cast<std::size_t>(side)] = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    }

    // --- linear fixed point
    const double alpha4 = constants().alpha4;
    const Eigen::Index m = static_cast<Eigen::Index>(basis_->n_charges());
    const Eigen::MatrixXd& pinv = basis_->pseudo_inverse();
    Eigen::MatrixXd sef = Eigen::MatrixXd::Zero(m, m);
    std::array<Eigen::MatrixXd, 2> s_art;
    for (std::size_t side = 0; side < 2; ++side) {
        const auto& cp = cap_points_[side];
        const Eigen::Index nc = static_cast<Eigen::Index>(cp.size());
        Eigen::MatrixXd f(nc, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const Point q = basis_->charge(static_cast<std::size_t>(j));
            for (Eigen::Index c = 0; c < nc; ++c) f(c, j) = alpha4 / (cp[static_cast<std::size_t>(c)] - q).squaredNorm();
        }
        cap_field_[side] = f;
        const auto& rows = art_rows_[side];
        const Eigen::Index na_rows = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd e(na_rows, nc);
        s_art[side].resize(m, na_rows);
        for (Eigen::Index k = 0; k < na_rows; ++k) {
            const Point& z = basis_->collocation_points()[static_cast<std::size_t>(rows[static_cast<std::size_t>(k)])].point;
            for (Eigen::Index c = 0; c < nc; ++c)
                e(k, c) = cap_weights_[side](c) * poisson(static_cast<int>(side), z, cp[static_cast<std::size_t>(c)]);
            s_art[side].col(k) = pinv.col(rows[static_cast<std::size_t>(k)]);
        }
        sef.noalias() += s_art[side] * (e * f);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(m, m) - sef);
    z_.resize(m, static_cast<Eigen::Index>(colloc.size()));
    z_.setZero();
    for (std::size_t side = 0; side < 2; ++side) {
        const Eigen::MatrixXd zs = lu.solve(s_art[side]);
        for (std::size_t k = 0; k < art_rows_[side].size(); ++k) z_.col(art_rows_[side][k]) = zs.col(static_cast<Eigen::Index>(k));
        cap_response_[side] = cap_field_[side] * zs;
    }
}

double DumbbellSchwarz::handle_distance(const Point& y) const {
    const double dx = std::max(std::abs(y(0)) - half_length_, 0.0);
    return std::hypot(dx, y.tail<3>().norm()) - rho_;
}

bool DumbbellSchwarz::in_handle_subdomain(const Point& y) const { return handle_distance(y) <= 0.0; }

int DumbbellSchwarz::side_of(const Point& x) const {
    const int i = x(0) < 0.0 ? 0 : 1;
    if ((x - centers_[static_cast<std::size_t>(i)]).norm() >= lobe_radius_) return -1;
    return handle_distance(x) >= settings_.clearance * rho_ ? i : -1;
}

double DumbbellSchwarz::poisson(int lobe, const Point& x, const Point& y) const {
    const double r = lobe_radius_;
    const double d2 = (x - y).squaredNorm();
    return (r * r - (x - centers_[static_cast<std::size_t>(lobe)]).squaredNorm()) / (constants().omega3 * r * d2 * d2);
}

double DumbbellSchwarz::poisson_integral(int lobe, const Point& x, const Eigen::VectorXd& g) const {
    const auto& cp = cap_points_[static_cast<std::size_t>(lobe)];
    const auto& w = cap_weights_[static_cast<std::size_t>(lobe)];
    double s = 0.0;
    for (std::size_t c = 0; c < cp.size(); ++c) s += w(static_cast<Eigen::Index>(c)) * poisson(lobe, x, cp[c]) * g(static_cast<Eigen::Index>(c));
    return s;
}

double DumbbellSchwarz::continued_green(int lobe, const Point& xi, const Point& y) const {
    const Sphere s{centers_[static_cast<std::size_t>(lobe)], lobe_radius_, true};
    return constants().alpha4 / (y - xi).squaredNorm() - sphere_image_kernel(s, xi, y);
}

DumbbellSchwarz::Solution DumbbellSchwarz::solve(const Point& xi, bool diagnostics) const {
    Solution sol;
    sol.source = xi;
    sol.side = side_of(xi);
    if (sol.side < 0) throw PreconditionError("Schwarz solver: source must lie in a lobe away from the handle");
    const auto s = static_cast<std::size_t>(sol.side);
    const auto& col = basis_->collocation_points();
    Eigen::VectorXd gamma(static_cast<Eigen::Index>(art_rows_[s].size()));
    for (std::size_t k = 0; k < art_rows_[s].size(); ++k)
        gamma(static_cast<Eigen::Index>(k)) = continued_green(sol.side, xi, col[static_cast<std::size_t>(art_rows_[s][k])].point);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(z_.rows());
    for (std::size_t k = 0; k < art_rows_[s].size(); ++k) q += z_.col(art_rows_[s][k]) * gamma(static_cast<Eigen::Index>(k));
    sol.charges = q;
    for (std::size_t i = 0; i < 2; ++i) sol.caps[i] = cap_field_[i] * q;
    if (diagnostics) {
        // mismatch between the handle fit and the lobe solutions on the handle boundary
        auto defect = [&](const std::vector<BoundarySample>& pts, double& res) {
            for (const auto& c : pts) {
                const Point& z = c.point;
                double target = 0.0;
                const int lobe = z(0) < -exposed_ ? 0 : (z(0) > exposed_ ? 1 : -1);
                if (lobe >= 0) {
                    target = poisson_integral(lobe, z, sol.caps[static_cast<std::size_t>(lobe)]);
                    if (lobe == sol.side) target += continued_green(lobe, xi, z);
                }
                sol.data_scale = std::max(sol.data_scale, std::abs(target));
                res = std::max(res, std::abs(target - basis_->field(q, z)));
            }
        };
        defect(col, sol.residual);
        defect(basis_->check_points(), sol.residual_check);
    }
    return sol;
}

double DumbbellSchwarz::regular_part(const Solution& sol, const Point& y) const {
    const double alpha4 = constants().alpha4;
    const double sing = alpha4 / (y - sol.source).squaredNorm();
    if (in_handle_subdomain(y)) return sing - basis_->field(sol.charges, y);
    const int lobe = y(0) < 0.0 ? 0 : 1;
    const double v = poisson_integral(lobe, y, sol.caps[static_cast<std::size_t>(lobe)]);
    if (lobe == sol.side) return sing - continued_green(lobe, sol.source, y) - v;
    return sing - v;
}

double DumbbellSchwarz::robin(const Point& xi) const {
    const int side = side_of(xi);
    if (side < 0) throw PreconditionError("Schwarz solver: source must lie in a lobe away from the handle");
    const auto s = static_cast<std::size_t>(side);
    const auto& col = basis_->collocation_points();
    Eigen::VectorXd gamma(static_cast<Eigen::Index>(art_rows_[s].size()));
    for (std::size_t k = 0; k < art_rows_[s].size(); ++k)
        gamma(static_cast<Eigen::Index>(k)) = continued_green(side, xi, col[static_cast<std::size_t>(art_rows_[s][k])].point);
    const Eigen::VectorXd g = cap_response_[s] * gamma;
    const Sphere ball{centers_[s], lobe_radius_, true};
    return sphere_image_kernel(ball, xi, xi) - poisson_integral(side, xi, g);
}

}  // namespace spikelab
