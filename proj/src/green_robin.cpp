#include "spikelab/green_robin.hpp"

#include "spikelab/constants.hpp"
#include "spikelab/dumbbell_schwarz.hpp"
#include "spikelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spikelab {

double sphere_image_kernel(const Sphere& s, const Point& x, const Point& y) {
    const double r2 = s.radius * s.radius;
    const Point xt = (x - s.center) / s.radius;
    const Point yt = (y - s.center) / s.radius;
    const double d = xt.squaredNorm() * yt.squaredNorm() - 2.0 * xt.dot(yt) + 1.0;
    return constants().alpha4 / (r2 * d);
}

// ---------------------------------------------------------------------------------------------
// MfsBasis

MfsBasis::MfsBasis(const DomainDescriptor& domain) {
    const CollocationSettings& cs = domain.collocation();
    colloc_ = domain.boundary_samples(static_cast<std::size_t>(cs.n_boundary), cs.seed);
    check_ = domain.boundary_samples(static_cast<std::size_t>(cs.n_check), cs.seed + 1000003ULL);
    fit_samples_ = colloc_;

    std::vector<Point> charges;
    std::uint64_t salt = 2000003ULL;
    while (charges.size() < static_cast<std::size_t>(cs.n_charges) && salt < 2000003ULL + 8) {
        const auto src = domain.boundary_samples(static_cast<std::size_t>(cs.n_charges), cs.seed + salt++);
        for (const auto& s : src) {
            const double off = cs.charge_offset * s.scale;
            const Point c = s.point + off * s.normal;
            if (domain.margin(c) <= -0.5 * off) charges.push_back(c);
            if (charges.size() == static_cast<std::size_t>(cs.n_charges)) break;
        }
    }
    if (charges.empty()) throw ConditioningError("MFS: no admissible exterior charge locations", 0.0);
    charges_.resize(4, static_cast<Eigen::Index>(charges.size()));
    for (std::size_t j = 0; j < charges.size(); ++j) charges_.col(static_cast<Eigen::Index>(j)) = charges[j];
    factor();
}

MfsBasis::MfsBasis(std::vector<BoundarySample> collocation, std::vector<BoundarySample> check,
                   std::vector<Point> charges)
    : colloc_(std::move(collocation)), check_(std::move(check)) {
    fit_samples_ = colloc_;
    if (charges.empty()) throw ConditioningError("MFS: no charges", 0.0);
    charges_.resize(4, static_cast<Eigen::Index>(charges.size()));
    for (std::size_t j = 0; j < charges.size(); ++j) charges_.col(static_cast<Eigen::Index>(j)) = charges[j];
    factor();
}

void MfsBasis::factor() {
    const double alpha4 = constants().alpha4;
    const Eigen::Index n = static_cast<Eigen::Index>(colloc_.size());
    const Eigen::Index m = charges_.cols();
    Eigen::MatrixXd a(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            a(k, j) = alpha4 / (colloc_[static_cast<std::size_t>(k)].point - charges_.col(j)).squaredNorm();
    Eigen::VectorXd col_scale(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        col_scale(j) = 1.0 / a.col(j).norm();
        a.col(j) *= col_scale(j);
    }
    // rank-revealing QR, truncated at relative pivot 1e-12
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(1e-12);
    qr.compute(a);
    rank_ = qr.rank();
    if (rank_ < 1)
        throw ConditioningError("MFS: collocation matrix is numerically zero", std::numeric_limits<double>::infinity());
    const auto& r = qr.matrixR();
    condition_ = std::abs(r(0, 0)) / std::abs(r(rank_ - 1, rank_ - 1));
    pinv_ = qr.solve(Eigen::MatrixXd::Identity(n, n));
    pinv_ = col_scale.asDiagonal() * pinv_;
}

Eigen::VectorXd MfsBasis::solve(const Eigen::VectorXd& data) const { return pinv_ * data; }

double MfsBasis::field(const Eigen::VectorXd& q, const Point& y) const {
    const double alpha4 = constants().alpha4;
    double s = 0.0;
    const Eigen::Index m = charges_.cols();
    for (Eigen::Index j = 0; j < m; ++j) s += q(j) / (y - charges_.col(j)).squaredNorm();
    return alpha4 * s;
}

// ---------------------------------------------------------------------------------------------
// HarmonicField

double HarmonicField::operator()(const Point& y) const {
    double s = 0.0;
    for (const auto& t : images) s += t.weight * sphere_image_kernel(t.sphere, source, y);
    if (basis && strengths.size() > 0) s += basis->field(strengths, y);
    if (extra) s += (*extra)(y);
    return s;
}

std::vector<Point> HarmonicField::charge_locations() const {
    std::vector<Point> out;
    if (!basis) return out;
    for (std::size_t j = 0; j < basis->n_charges(); ++j) out.push_back(basis->charge(j));
    return out;
}

// ---------------------------------------------------------------------------------------------
// RobinEvaluator

RobinEvaluator::RobinEvaluator(DomainDescriptor domain, RobinOptions options)
    : domain_(std::move(domain)), options_(options) {
    if (domain_.kind() == DomainDescriptor::Kind::Dumbbell) {
        try {
            schwarz_ = std::make_shared<const DumbbellSchwarz>(domain_);
        } catch (const DomainError&) {
            // handle too wide for the decomposition: plain collocation everywhere
        }
    }
}

std::shared_ptr<const MfsBasis> RobinEvaluator::basis() const {
    if (domain_.closed_form()) return nullptr;
    std::call_once(basis_once_, [&] { basis_ = std::make_shared<const MfsBasis>(domain_); });
    return basis_;
}

bool RobinEvaluator::use_schwarz(const Point& x) const { return schwarz_ && schwarz_->applicable(x); }

void RobinEvaluator::check_interior(const Point& x, double room) const {
    const double m = domain_.margin(x);
    if (!(m > 0.0)) throw DomainError("point lies outside the domain");
    const double need = options_.min_margin * domain_.inradius() + room;
    if (m < need) {
        const double defect = constants().alpha4 / (4.0 * m * m);
        throw AccuracyError("point too close to the boundary (margin " + std::to_string(m) + " < " +
                                std::to_string(need) + ")",
                            defect);
    }
}

std::vector<Sphere> RobinEvaluator::deflation_spheres(const Point& x) const {
    std::vector<Sphere> candidates;
    if (domain_.kind() == DomainDescriptor::Kind::Collocation) {
        // algebraic sphere fit to the boundary samples around the nearest boundary point
        const auto& pts = basis()->fit_samples();
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d = (pts[i].point - x).squaredNorm();
            if (d < bd) bd = d, best = i;
        }
        const Point p0 = pts[best].point;
        const std::size_t k = std::min<std::size_t>(24, pts.size());
        std::vector<std::size_t> idx(pts.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(k), idx.end(), [&](std::size_t a, std::size_t b) {
            return (pts[a].point - p0).squaredNorm() < (pts[b].point - p0).squaredNorm();
        });
        Eigen::MatrixXd a(static_cast<Eigen::Index>(k), 5);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
        for (std::size_t r = 0; r < k; ++r) {
            const Point& p = pts[idx[r]].point;
            a.row(static_cast<Eigen::Index>(r)) << 2.0 * p(0), 2.0 * p(1), 2.0 * p(2), 2.0 * p(3), 1.0;
            rhs(static_cast<Eigen::Index>(r)) = p.squaredNorm();
        }
        const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
        const Point c = sol.head<4>();
        const double rad2 = sol(4) + c.squaredNorm();
        if (rad2 > 0.0) {
            const double rad = std::sqrt(rad2);
            double rms = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                const double e = (pts[idx[r]].point - c).norm() - rad;
                rms += e * e;
            }
            rms = std::sqrt(rms / static_cast<double>(k));
            if (rms <= 5e-3 * rad && (x - c).norm() < rad) candidates.push_back(Sphere{c, rad, true});
        }
    } else {
        for (const Sphere& s : domain_.analytic_spheres()) {
            const bool inside = (x - s.center).norm() < s.radius;
            if (s.contains_domain != inside) continue;
            candidates.push_back(s);
        }
    }
    std::vector<Sphere> out;
    for (const Sphere& s : candidates) {
        const Point v = x - s.center;
        const double r2 = v.squaredNorm();
        if (r2 < 1e-24 * s.radius * s.radius) {
            out.push_back(s);  // image at infinity
            continue;
        }
        const Point img = s.center + (s.radius * s.radius / r2) * v;
        if (domain_.margin(img) < -1e-9 * s.radius) out.push_back(s);
    }
    return out;
}

HarmonicField RobinEvaluator::fit_boundary_data(const std::function<double(const Point&)>& g, const Point& source,
                                                const std::vector<ImageTerm>& images) const {
    return fit_impl(g, source, images, true);
}

HarmonicField RobinEvaluator::fit_impl(const std::function<double(const Point&)>& g, const Point& source,
                                       const std::vector<ImageTerm>& images, bool diagnostics) const {
    HarmonicField f;
    f.source = source;
    f.images = images;
    const auto b = basis();
    if (!b) {
        f.closed_form = true;
        return f;
    }
    f.basis = b;
    const auto& col = b->collocation_points();
    Eigen::VectorXd data(static_cast<Eigen::Index>(col.size()));
    double scale = 0.0;
    for (std::size_t k = 0; k < col.size(); ++k) {
        const double gv = g(col[k].point);
        scale = std::max(scale, std::abs(gv));
        double img = 0.0;
        for (const auto& t : images) img += t.weight * sphere_image_kernel(t.sphere, source, col[k].point);
        data(static_cast<Eigen::Index>(k)) = gv - img;
    }
    f.strengths = b->solve(data);
    f.data_scale = scale;
    if (!diagnostics) return f;
    double res = 0.0;
    for (std::size_t k = 0; k < col.size(); ++k)
        res = std::max(res, std::abs(g(col[k].point) - f(col[k].point)));
    double res_check = 0.0;
    for (const auto& s : b->check_points()) {
        const double gv = g(s.point);
        scale = std::max(scale, std::abs(gv));
        res_check = std::max(res_check, std::abs(gv - f(s.point)));
    }
    f.residual = res;
    f.residual_check = res_check;
    f.data_scale = scale;
    f.usable = res_check <= domain_.collocation().residual_threshold * std::max(scale, 1e-300);
    return f;
}

HarmonicCorrector RobinEvaluator::make_corrector(const Point& xi, const std::vector<Sphere>& spheres,
                                                 bool diagnostics) const {
    if (use_schwarz(xi)) {
        auto sol = std::make_shared<const DumbbellSchwarz::Solution>(schwarz_->solve(xi, diagnostics));
        HarmonicCorrector c;
        c.source = xi;
        auto sw = schwarz_;
        c.extra = std::make_shared<const std::function<double(const Point&)>>(
            [sw, sol](const Point& y) { return sw->regular_part(*sol, y); });
        c.residual = sol->residual;
        c.residual_check = sol->residual_check;
        c.data_scale = sol->data_scale;
        // The handle fit carries the reentrant-edge singularity, so its wall defect sits near a few
        // percent of the data; τ only sees it through the small harmonic measure of the caps.
        c.usable = sol->residual_check <= 0.1 * std::max(sol->data_scale, 1e-300);
        return c;
    }
    std::vector<ImageTerm> images;
    for (const Sphere& s : spheres) images.push_back(ImageTerm{s, 1.0});
    if (domain_.closed_form()) {
        HarmonicCorrector c;
        c.source = xi;
        c.images = {ImageTerm{domain_.analytic_spheres().front(), 1.0}};
        c.closed_form = true;
        return c;
    }
    const double alpha4 = constants().alpha4;
    return fit_impl([&](const Point& y) { return alpha4 / (y - xi).squaredNorm(); }, xi, images, diagnostics);
}

std::shared_ptr<const HarmonicCorrector> RobinEvaluator::build_corrector(const Point& xi) const {
    check_interior(xi);
    std::array<long long, 4> key{};
    for (int i = 0; i < 4; ++i) key[static_cast<std::size_t>(i)] = std::llround(xi(i) * 1e6);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end() && it->second->source == xi) return it->second;
    }
    auto c = std::make_shared<const HarmonicCorrector>(make_corrector(xi, deflation_spheres(xi)));
    if (!c->usable)
        throw AccuracyError("harmonic corrector: held-out boundary defect " + std::to_string(c->residual_check) +
                                " exceeds the configured threshold",
                            c->residual_check);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (cache_.size() >= options_.cache_capacity) cache_.clear();
    cache_[key] = c;  // last writer wins
    return c;
}

double RobinEvaluator::ball_regular_part(const Point& x, const Point& y) const {
    return sphere_image_kernel(domain_.analytic_spheres().front(), x, y);
}

double RobinEvaluator::regular_part(const Point& x, const Point& y) const {
    check_interior(x);
    check_interior(y);
    if (domain_.closed_form()) return ball_regular_part(x, y);
    return (*build_corrector(y))(x);
}

double RobinEvaluator::regular_part_source_derivative(const Point& x, const Point& xi, int j) const {
    if (j < 1 || j > 4) throw DomainError("regular_part_source_derivative: j must lie in 1..4");
    if (domain_.closed_form()) {
        check_interior(x);
        check_interior(xi);
        const Sphere& s = domain_.analytic_spheres().front();
        const Point xt = (x - s.center) / s.radius, yt = (xi - s.center) / s.radius;
        const double d = xt.squaredNorm() * yt.squaredNorm() - 2.0 * xt.dot(yt) + 1.0;
        const double dd = 2.0 * xt.squaredNorm() * yt(j - 1) - 2.0 * xt(j - 1);
        return -constants().alpha4 / (s.radius * s.radius * s.radius) * dd / (d * d);
    }
    const double h1 = fd_step_coarse(), h2 = fd_step_fine();
    check_interior(xi, 2.0 * h1);
    check_interior(x);
    const auto spheres = deflation_spheres(xi);
    const Point e = Point::Unit(j - 1);
    auto diff = [&](double h) {
        return (make_corrector(xi + h * e, spheres, false)(x) - make_corrector(xi - h * e, spheres, false)(x)) /
               (2.0 * h);
    };
    return (100.0 * diff(h2) - diff(h1)) / 99.0;
}

double RobinEvaluator::green(const Point& x, const Point& y) const {
    const double d2 = (x - y).squaredNorm();
    if (d2 == 0.0) throw DomainError("green: singular at x = y");
    return constants().alpha4 / d2 - regular_part(x, y);
}

double RobinEvaluator::robin_frozen(const Point& x, const std::vector<Sphere>& spheres) const {
    if (domain_.closed_form()) return ball_regular_part(x, x);
    if (use_schwarz(x)) return schwarz_->robin(x);
    return make_corrector(x, spheres, false)(x);
}

double RobinEvaluator::robin(const Point& x) const {
    check_interior(x);
    if (domain_.closed_form()) return ball_regular_part(x, x);
    const auto c = build_corrector(x);
    if (use_schwarz(x)) return schwarz_->robin(x);  // corrector fit already vetted against its threshold
    const double v = (*c)(x);
    if (c->residual_check > options_.accuracy_tol * v)
        throw AccuracyError("robin: collocation defect too large for the requested accuracy", c->residual_check);
    return v;
}

void RobinEvaluator::fd_grad_hess(const Point& x, double h, const std::vector<Sphere>& spheres, Point& g, Matrix4& H,
                                  bool want_hess) const {
    auto f = [&](const Point& p) { return robin_frozen(p, spheres); };
    const double f0 = want_hess ? f(x) : 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point e = h * Point::Unit(i);
        const double fp = f(x + e), fm = f(x - e);
        g(i) = (fp - fm) / (2.0 * h);
        if (want_hess) H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    if (!want_hess) return;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const Point ei = h * Point::Unit(i), ej = h * Point::Unit(j);
            const double v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h * h);
            H(i, j) = H(j, i) = v;
        }
}

Point RobinEvaluator::robin_grad(const Point& x) const {
    const double h1 = fd_step_coarse(), h2 = fd_step_fine();
    check_interior(x, 2.0 * h1);
    const auto spheres = domain_.closed_form() || use_schwarz(x) ? std::vector<Sphere>{} : deflation_spheres(x);
    Point g1, g2;
    Matrix4 dummy;
    fd_grad_hess(x, h1, spheres, g1, dummy, false);
    fd_grad_hess(x, h2, spheres, g2, dummy, false);
    return (100.0 * g2 - g1) / 99.0;
}

Matrix4 RobinEvaluator::robin_hess(const Point& x) const {
    const double h1 = fd_step_coarse(), h2 = fd_step_fine();
    check_interior(x, 2.0 * h1);
    const auto spheres = domain_.closed_form() || use_schwarz(x) ? std::vector<Sphere>{} : deflation_spheres(x);
    Point g;
    Matrix4 a, b;
    fd_grad_hess(x, h1, spheres, g, a, true);
    fd_grad_hess(x, h2, spheres, g, b, true);
    Matrix4 hs = (100.0 * b - a) / 99.0;
    return 0.5 * (hs + hs.transpose());
}

void RobinEvaluator::robin_grad_hess_fast(const Point& x, Point& grad, Matrix4& hess) const {
    const double h = fd_step_coarse();
    check_interior(x, 2.0 * h);
    const auto spheres = domain_.closed_form() || use_schwarz(x) ? std::vector<Sphere>{} : deflation_spheres(x);
    fd_grad_hess(x, h, spheres, grad, hess, true);
}

Point RobinEvaluator::robin_grad_fast(const Point& x) const {
    const double h = fd_step_coarse();
    check_interior(x, 2.0 * h);
    const auto spheres = domain_.closed_form() || use_schwarz(x) ? std::vector<Sphere>{} : deflation_spheres(x);
    Point g;
    Matrix4 dummy;
    fd_grad_hess(x, h, spheres, g, dummy, false);
    return g;
}

}  // namespace spikelab
