#include "spikelab/projection.hpp"

#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace spikelab {

namespace {

// forward-mode dual number, enough for one parameter derivative of the ball formula
struct Dual {
    double v = 0.0, d = 0.0;
};
Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
Dual sqrt(Dual a) {
    const double r = std::sqrt(a.v);
    return {r, a.d / (2.0 * r)};
}

// Harmonic extension of c4δ/(δ²+|x−ξ|²) from the unit sphere: a single Kelvin-type pole.
// With a = δ²+1+|ξ|², κ solves |ξ|²κ² − aκ + 1 = 0 and h = c4δκ / (1 − 2κ x·ξ + κ²|ξ|²|x|²).
Dual unit_ball_h(Dual delta, const std::array<Dual, 4>& xi, const Point& x) {
    Dual xi2, xdot;
    for (int k = 0; k < 4; ++k) {
        xi2 = xi2 + xi[k] * xi[k];
        xdot = xdot + Dual{x(k), 0.0} * xi[k];
    }
    const Dual one{1.0, 0.0};
    const Dual a = delta * delta + one + xi2;
    const Dual kappa = Dual{2.0, 0.0} / (a + sqrt(a * a - 4.0 * xi2));
    const Dual den = one - 2.0 * (kappa * xdot) + kappa * kappa * xi2 * Dual{x.squaredNorm(), 0.0};
    return constants().c4 * (delta * kappa / den);
}

void check_source(const DomainDescriptor& dom, const BubbleParams& b) {
    b.validate();
    const double m = dom.margin(b.xi);
    if (!(m > 0.0)) throw DomainError("projection: source outside the domain");
    if (b.delta > 0.1 * m * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "projection: delta " << b.delta << " exceeds 0.1 x dist(xi, boundary) = " << 0.1 * m;
        throw PreconditionError(os.str());
    }
}

double boundary_mismatch(const DomainDescriptor& dom, const ProjectedBubble& p) {
    double worst = 0.0;
    for (const auto& s : dom.boundary_samples(512, 7)) worst = std::max(worst, std::abs(p(s.point)));
    return worst;
}

}  // namespace

const char* mode_name(ProjectionMode m) { return m == ProjectionMode::Exact ? "exact" : "expansion"; }

double ProjectedBubble::base(const Point& x) const {
    return component < 0 ? bubble_value(bubble, x) : bubble_derivative(bubble, component, x);
}

double ball_harmonic_part(const Sphere& ball, const BubbleParams& b, int j, const Point& x) {
    const double R = ball.radius;
    Dual delta{b.delta / R, j == 0 ? 1.0 : 0.0};
    std::array<Dual, 4> xi;
    for (int k = 0; k < 4; ++k) xi[k] = {(b.xi(k) - ball.center(k)) / R, j == k + 1 ? 1.0 : 0.0};
    const Dual h = unit_ball_h(delta, xi, (x - ball.center) / R);
    // ψ^0 = δ∂_δ U and ψ^j = δ∂_{ξ_j} U; both rescale as δ̃ ∂/∂(param̃) on the unit ball
    return j < 0 ? h.v / R : delta.v * h.d / R;
}

ProjectedBubble project_derivative(const RobinEvaluator& ev, const BubbleParams& b, int j, ProjectionMode mode) {
    if (j < -1 || j > 4) throw DomainError("projection: component must be -1 (bubble) or 0..4");
    const DomainDescriptor& dom = ev.domain();
    check_source(dom, b);
    const double A = constants().A;

    ProjectedBubble p;
    p.bubble = b;
    p.component = j;
    p.mode = mode;
    p.closed_form = dom.closed_form();

    if (mode == ProjectionMode::Exact) {
        if (dom.closed_form()) {
            const Sphere ball = dom.analytic_spheres().front();
            p.harmonic_part = [ball, b, j](const Point& x) { return ball_harmonic_part(ball, b, j, x); };
            p.defect_estimate = boundary_mismatch(dom, p);
            return p;
        }
        // the singular part of U and ψ⁰ near ∂Ω is δA·α4|x−ξ|^{-2}; its Kelvin images absorb it
        std::vector<ImageTerm> images;
        if (j <= 0)
            for (const Sphere& s : ev.deflation_spheres(b.xi)) images.push_back({s, b.delta * A});
        const BubbleParams bb = b;
        auto field = std::make_shared<HarmonicField>(ev.fit_boundary_data(
            [bb, j](const Point& y) { return j < 0 ? bubble_value(bb, y) : bubble_derivative(bb, j, y); }, b.xi,
            images));
        p.defect_estimate = field->residual_check;
        p.harmonic_part = [field](const Point& x) { return (*field)(x); };
        return p;
    }

    // expansion: h ≈ δA H(·,ξ) for U and ψ⁰, h ≈ δ²A ∂H/∂ξ_j for j ≥ 1
    if (dom.closed_form()) {
        const Sphere s = dom.analytic_spheres().front();
        const double c = b.delta * A;
        if (j <= 0) {
            p.harmonic_part = [s, c, xi = b.xi](const Point& x) { return c * sphere_image_kernel(s, x, xi); };
        } else {
            const double alpha4 = constants().alpha4;
            p.harmonic_part = [s, c, b, j, alpha4](const Point& x) {
                const Point xt = (x - s.center) / s.radius, yt = (b.xi - s.center) / s.radius;
                const double d = xt.squaredNorm() * yt.squaredNorm() - 2.0 * xt.dot(yt) + 1.0;
                const double dd = 2.0 * xt.squaredNorm() * yt(j - 1) - 2.0 * xt(j - 1);
                return c * b.delta * (-alpha4 / (s.radius * s.radius * s.radius) * dd / (d * d));
            };
        }
    } else if (j <= 0) {
        const auto h = ev.build_corrector(b.xi);
        const double c = b.delta * A;
        p.harmonic_part = [h, c](const Point& x) { return c * (*h)(x); };
    } else {
        // Richardson-combined central differences of cached correctors
        const Point e = Point::Unit(j - 1);
        const double h1 = ev.fd_step_coarse(), h2 = ev.fd_step_fine();
        const auto p1 = ev.build_corrector(b.xi + h1 * e), m1 = ev.build_corrector(b.xi - h1 * e);
        const auto p2 = ev.build_corrector(b.xi + h2 * e), m2 = ev.build_corrector(b.xi - h2 * e);
        const double c = b.delta * b.delta * A;
        p.harmonic_part = [=](const Point& x) {
            const double d1 = ((*p1)(x) - (*m1)(x)) / (2.0 * h1);
            const double d2 = ((*p2)(x) - (*m2)(x)) / (2.0 * h2);
            return c * (100.0 * d2 - d1) / 99.0;
        };
    }
    p.defect_estimate = boundary_mismatch(dom, p);
    return p;
}

ProjectedBubble project_bubble(const RobinEvaluator& ev, const BubbleParams& b, ProjectionMode mode) {
    return project_derivative(ev, b, -1, mode);
}

std::vector<Point> defect_grid(const DomainDescriptor& domain, std::size_t n, double tube, std::uint64_t seed) {
    const Box bb = domain.bounding_box();
    const double floor = tube * domain.inradius();
    std::vector<Point> out;
    out.reserve(n);
    const std::uint64_t start = 1 + seed * 1000003ULL;
    for (std::uint64_t k = start; out.size() < n && k < start + 400 * n; ++k) {
        Point p;
        for (int d = 0; d < 4; ++d) p(d) = bb.lo(d) + halton(k, d) * (bb.hi(d) - bb.lo(d));
        if (domain.margin(p) > floor) out.push_back(p);
    }
    return out;
}

ProjectionDefect projection_defect(const RobinEvaluator& ev, const BubbleParams& b, int component,
                                   std::size_t grid_points) {
    const ProjectedBubble ex = project_derivative(ev, b, component, ProjectionMode::Exact);
    const ProjectedBubble ap = project_derivative(ev, b, component, ProjectionMode::Expansion);
    ProjectionDefect out;
    out.exact_residual = ex.defect_estimate;
    std::vector<Point> grid{b.xi};
    for (const Point& p : defect_grid(ev.domain(), grid_points)) grid.push_back(p);
    for (const Point& x : grid) {
        const double d = std::abs(ex.harmonic_part(x) - ap.harmonic_part(x));
        if (d > out.value) {
            out.value = d;
            out.location = x;
        }
    }
    out.n_points = grid.size();
    return out;
}

}  // namespace spikelab
