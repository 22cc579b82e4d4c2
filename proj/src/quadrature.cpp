#include "spikelab/quadrature.hpp"

#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/parallel.hpp"
#include "spikelab/rules.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace spikelab {

namespace {

// C∞ step: 1 for s ≤ 0, 0 for s ≥ 1
double smooth_step_down(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - s)), b = std::exp(-1.0 / s);
    return a / (a + b);
}

int degree_for_count(std::size_t target) {
    for (int k = 1;; ++k) {
        const std::size_t nu = static_cast<std::size_t>((k + 2 + 3) / 4), nphi = static_cast<std::size_t>(k + 1);
        if (nu * nphi * nphi >= target || k > 400) return k;
    }
}

void sphere_roots(const Point& o, const Point& dir, const Point& c, double r, std::vector<double>& out) {
    const Point p = o - c;
    const double b = p.dot(dir), cc = p.squaredNorm() - r * r, disc = b * b - cc;
    if (disc <= 0.0) return;
    const double sq = std::sqrt(disc);
    out.push_back(-b - sq);
    out.push_back(-b + sq);
}

// Directions around the axis from the ray origin to a hole. Rays with polar angle below
// theta_c cross the hole and their chord behaves like sqrt(theta_c - theta); substituting
// theta = theta_c - s^2 on that side keeps the angular integrand smooth.
SphereRule axial_rule(const Point& axis, double theta_c, std::size_t target, const Matrix4& rotation) {
    auto counts = [](int k) {
        return std::array<int, 4>{std::max(4, (k + 2) / 4 + 2), (k + 2) / 2 + 2, std::max(2, (k + 2) / 2), k + 1};
    };
    int k = 2;
    for (;; ++k) {
        const auto c = counts(k);
        if (static_cast<std::size_t>(c[0] + c[1]) * c[2] * c[3] >= target || k > 400) break;
    }
    const auto [n_in, n_out, n_z, n_phi] = counts(k);

    Matrix4 m;
    m.col(0) = axis;
    m.rightCols<3>() = rotation.leftCols<3>();
    const Matrix4 q = Eigen::HouseholderQR<Matrix4>(m).householderQ();
    const Point e1 = q.col(1), e2 = q.col(2), e3 = q.col(3);

    std::vector<double> th, wth;
    const GaussRule& gi = gauss_legendre(n_in);
    const double sc = std::sqrt(theta_c);
    for (std::size_t i = 0; i < gi.nodes.size(); ++i) {
        const double s = 0.5 * sc * (gi.nodes[i] + 1.0);
        th.push_back(theta_c - s * s);
        wth.push_back(sc * gi.weights[i] * s);
    }
    const GaussRule& go = gauss_legendre(n_out);
    const double hw = 0.5 * (std::numbers::pi - theta_c), mid = 0.5 * (std::numbers::pi + theta_c);
    for (std::size_t i = 0; i < go.nodes.size(); ++i) {
        th.push_back(mid + hw * go.nodes[i]);
        wth.push_back(hw * go.weights[i]);
    }

    const GaussRule& gz = gauss_legendre(n_z);
    const double dphi = 2.0 * std::numbers::pi / n_phi;
    SphereRule rule;
    for (std::size_t a = 0; a < th.size(); ++a) {
        const double st = std::sin(th[a]), ct = std::cos(th[a]), wa = wth[a] * st * st;
        for (int b = 0; b < n_z; ++b) {
            const double z = gz.nodes[b], rho = std::sqrt(1.0 - z * z);
            for (int c = 0; c < n_phi; ++c) {
                const double phi = (c + 0.5) * dphi;
                rule.points.push_back(ct * axis + st * (rho * std::cos(phi) * e1 + rho * std::sin(phi) * e2 + z * e3));
                rule.weights.push_back(wa * gz.weights[b] * dphi);
            }
        }
    }
    rule.degree = k;
    return rule;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

double default_split_radius(const DomainDescriptor& domain, const std::vector<SpikeCenter>& centers, double eta) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double m = domain.margin(centers[i].xi);
        if (!(m > 0.0)) throw DomainError("quadrature: spike center outside the domain");
        r = std::min(r, 0.5 * m);
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            r = std::min(r, 0.5 * (centers[i].xi - centers[j].xi).norm());
    }
    if (eta > 0.0) r = std::min(r, 0.5 * eta);
    return r;
}

QuadratureEngine::QuadratureEngine(const DomainDescriptor& domain, QuadratureSpec spec) : spec_(std::move(spec)) {
    if (spec_.spike_centers.empty()) throw PreconditionError("quadrature: at least one spike center is required");
    for (const auto& c : spec_.spike_centers)
        if (!(c.delta > 0.0)) throw PreconditionError("quadrature: spike scales must be positive");
    const double auto_r = default_split_radius(domain, spec_.spike_centers, spec_.eta);
    split_ = spec_.split_radius > 0.0 ? spec_.split_radius : auto_r;
    if (split_ > auto_r * (1.0 + 1e-12))
        throw PreconditionError("quadrature: split balls must be disjoint and inside the domain");
    for (int level = 0; level < 2; ++level) {
        build_inner(level);
        build_outer(domain, level);
    }
}

std::size_t QuadratureEngine::node_count() const {
    std::size_t n = 0;
    for (int l = 0; l < 2; ++l) n += inner_[l].points.size() + outer_[l].points.size();
    return n;
}

double QuadratureEngine::partition_weight(const Point& x) const {
    double w = 1.0;
    const double half = 0.5 * split_;
    for (const auto& c : spec_.spike_centers) w -= smooth_step_down(((x - c.xi).norm() - half) / half);
    return std::max(w, 0.0);
}

void QuadratureEngine::build_inner(int level) {
    NodeSet& set = inner_[level];
    const SphereRule rule = sphere_rule(spec_.inner_degree + 4 * level);
    const GaussRule& g = gauss_legendre(spec_.radial_order + 8 * level);
    const double r = split_, half = 0.5 * r;
    for (const auto& c : spec_.spike_centers) {
        std::vector<double> br{0.0};
        for (double t = c.delta; t < half * (1.0 - 1e-9); t *= 2.0) br.push_back(t);
        br.push_back(half);
        br.push_back(0.75 * r);
        br.push_back(r);
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], b = br[p + 1], hw = 0.5 * (b - a), mid = 0.5 * (a + b);
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                const double t = mid + hw * g.nodes[k];
                const double chi = smooth_step_down((t - half) / half);
                const double wr = g.weights[k] * hw * t * t * t * chi;
                if (wr == 0.0) continue;
                for (std::size_t m = 0; m < rule.points.size(); ++m) {
                    set.points.push_back(c.xi + t * rule.points[m]);
                    set.weights.push_back(wr * rule.weights[m]);
                }
            }
        }
    }
}

void QuadratureEngine::build_outer(const DomainDescriptor& domain, int level) {
    NodeSet& set = outer_[level];
    const std::size_t target = level == 1 ? spec_.outer_samples : std::max<std::size_t>(spec_.outer_samples / 2, 8);
    const Matrix4 rot = random_rotation(2 * spec_.seed + 1 + level);
    const GaussRule& g = gauss_legendre(spec_.radial_order + 8 * level);
    const Point o = spec_.spike_centers.size() == 1 ? spec_.spike_centers.front().xi : domain.interior_point();
    SphereRule dirs = rotated(sphere_rule(degree_for_count(target)), rot);
    for (const auto& s : domain.analytic_spheres()) {
        const double dist = (s.center - o).norm();
        if (s.contains_domain || !(dist > s.radius)) continue;
        dirs = axial_rule((s.center - o) / dist, std::asin(s.radius / dist), target, rot);
        break;
    }
    const Box bb = domain.bounding_box();
    const double tmax = (o - bb.center()).norm() + 0.5 * bb.diameter() + 1e-9;
    const double half = 0.5 * split_;
    const double panel = std::min(half, 0.25 * domain.inradius());

    std::vector<std::vector<Point>> pts(dirs.points.size());
    std::vector<std::vector<double>> wts(dirs.points.size());
    parallel_for(dirs.points.size(), [&](std::size_t d) {
        const Point& th = dirs.points[d];
        std::vector<double> br = domain.ray_breakpoints(o, th, tmax);
        for (const auto& c : spec_.spike_centers) {
            sphere_roots(o, th, c.xi, half, br);
            sphere_roots(o, th, c.xi, split_, br);
        }
        br.push_back(0.0);
        br.push_back(tmax);
        std::sort(br.begin(), br.end());
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            const double a = std::max(br[i], 0.0), b = std::min(br[i + 1], tmax);
            if (!(b > a)) continue;
            const Point xm = o + 0.5 * (a + b) * th;
            if (!domain.inside(xm)) continue;
            bool core = false;
            for (const auto& c : spec_.spike_centers) core = core || (xm - c.xi).norm() < half;
            if (core) continue;
            const int np = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
            for (int p = 0; p < np; ++p) {
                const double pa = a + (b - a) * p / np, pb = a + (b - a) * (p + 1) / np;
                const double hw = 0.5 * (pb - pa), mid = 0.5 * (pa + pb);
                for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                    const double t = mid + hw * g.nodes[k];
                    const Point x = o + t * th;
                    const double w = g.weights[k] * hw * t * t * t * dirs.weights[d] * partition_weight(x);
                    if (w == 0.0) continue;
                    pts[d].push_back(x);
                    wts[d].push_back(w);
                }
            }
        }
    });
    for (std::size_t d = 0; d < pts.size(); ++d) {
        set.points.insert(set.points.end(), pts[d].begin(), pts[d].end());
        set.weights.insert(set.weights.end(), wts[d].begin(), wts[d].end());
    }
}

QuadResult QuadratureEngine::integrate(const std::function<double(const Point&)>& f) const {
    double in[2], out[2];
    for (int l = 0; l < 2; ++l) {
        const NodeSet& a = inner_[l];
        const NodeSet& b = outer_[l];
        in[l] = parallel_sum(a.points.size(), [&](std::size_t i) { return a.weights[i] * f(a.points[i]); });
        out[l] = parallel_sum(b.points.size(), [&](std::size_t i) { return b.weights[i] * f(b.points[i]); });
    }
    QuadResult r;
    r.inner = in[1];
    r.outer = out[1];
    r.value = in[1] + out[1];
    r.error = std::abs((in[1] + out[1]) - (in[0] + out[0])) + 1e-14 * std::abs(r.value);
    r.flagged = r.error > spec_.error_target * std::abs(r.value);
    return r;
}

QuadResult integrate_bubble_power(const DomainDescriptor& domain, const BubbleParams& b, double p,
                                  QuadratureSpec spec) {
    b.validate();
    if (!(p > 0.0 && p < 4.0)) throw DomainError("integrate_bubble_power: p must lie in (0, 4)");
    spec.spike_centers = {{b.xi, b.delta}};
    const double r = spec.split_radius > 0.0 ? spec.split_radius : default_split_radius(domain, spec.spike_centers, spec.eta);
    if (b.delta > 0.1 * r * (1.0 + 1e-12))
        throw PreconditionError("integrate_bubble_power: delta " + fmt(b.delta) + " exceeds split_radius/10 = " +
                                fmt(0.1 * r));
    const QuadratureEngine eng(domain, spec);
    return eng.integrate([&](const Point& x) { return std::pow(bubble_value(b, x), p); });
}

QuadResult interaction_integral(const DomainDescriptor& domain, const BubbleParams& b1, const BubbleParams& b2,
                                double p, double q, QuadratureSpec spec) {
    b1.validate();
    b2.validate();
    if (!(p > 0.0 && q > 0.0)) throw DomainError("interaction_integral: exponents must be positive");
    spec.spike_centers = {{b1.xi, b1.delta}, {b2.xi, b2.delta}};
    const double sep = (b1.xi - b2.xi).norm();
    const double r = spec.split_radius > 0.0 ? spec.split_radius : default_split_radius(domain, spec.spike_centers, spec.eta);
    if (sep < 2.0 * r * (1.0 - 1e-12))
        throw PreconditionError("interaction_integral: centers closer than twice the split radius");
    const QuadratureEngine eng(domain, spec);
    return eng.integrate([&](const Point& x) { return std::pow(bubble_value(b1, x), p) * std::pow(bubble_value(b2, x), q); });
}

std::pair<QuadResult, QuadResult> interaction_norms(const RobinEvaluator& ev, const BubbleParams& b1,
                                                    const BubbleParams& b2, int j, QuadratureSpec spec) {
    if (j < 0 || j > 4) throw DomainError("interaction_norms: j must lie in 0..4");
    spec.spike_centers = {{b1.xi, b1.delta}, {b2.xi, b2.delta}};
    const QuadratureEngine eng(ev.domain(), spec);
    if ((b1.xi - b2.xi).norm() < 2.0 * eng.split_radius() * (1.0 - 1e-12))
        throw PreconditionError("interaction_norms: centers closer than twice the split radius");
    const ProjectedBubble pu1 = project_bubble(ev, b1, ProjectionMode::Exact);
    const ProjectedBubble pu2 = project_bubble(ev, b2, ProjectionMode::Exact);
    const ProjectedBubble ps1 = project_derivative(ev, b1, j, ProjectionMode::Exact);
    const double e = 4.0 / 3.0;
    auto norm = [](const QuadResult& q) {
        QuadResult n = q;
        n.value = std::pow(std::max(q.value, 0.0), 0.75);
        n.error = q.value > 0.0 ? 0.75 * n.value / q.value * q.error : q.error;
        n.inner = n.outer = 0.0;
        return n;
    };
    const QuadResult first = eng.integrate([&](const Point& x) {
        const double u2 = pu2(x);
        return std::pow(std::abs(u2 * u2 * ps1(x)), e);
    });
    const QuadResult second = eng.integrate([&](const Point& x) { return std::pow(std::abs(pu1(x) * pu2(x) * ps1(x)), e); });
    return {norm(first), norm(second)};
}

double taylor_ratio(int kind, double a, double b, double p) {
    auto pos = [](double s) { return s > 0.0 ? s : 0.0; };
    auto F1 = [&](double s) { return pos(s) * pos(s) * pos(s); };  // F'
    auto F2 = [&](double s) { return 3.0 * pos(s) * pos(s); };     // F''
    auto F0 = [&](double s) { return 0.25 * pos(s) * pos(s) * pos(s) * pos(s); };
    double lhs = 0.0, rhs = 0.0;
    switch (kind) {
        case 1:
            lhs = std::abs(F0(a + b) - F0(a) - F1(a) * b);
            rhs = a * a * b * b + b * b * b * b;
            break;
        case 2:
            lhs = std::abs(F1(a + b) - F1(a) - F2(a) * b);
            rhs = std::abs(a) * b * b + std::abs(b * b * b);
            break;
        case 3:
            lhs = std::abs(F2(a + b) - F2(a));
            rhs = std::abs(a) * std::abs(b) + b * b;
            break;
        case 4:
            if (!(p > 1.0)) throw DomainError("taylor_ratio: kind 4 needs p > 1");
            lhs = std::abs(std::pow(std::abs(a + b), p) - std::pow(std::abs(a), p));
            rhs = std::pow(std::abs(a), p - 1.0) * std::abs(b) + std::pow(std::abs(b), p);
            break;
        default: throw DomainError("taylor_ratio: kind must be 1..4");
    }
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

TaylorCheck taylor_bound_check(int kind, std::size_t sample_count, double amplitude, std::uint64_t seed, double p) {
    TaylorCheck out;
    out.kind = kind;
    out.samples = sample_count;
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(kind));
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    for (std::size_t i = 0; i < sample_count; ++i) {
        const double a = u(rng), b = u(rng);
        const double r = taylor_ratio(kind, a, b, p);
        if (r > out.constant) {
            out.constant = r;
            out.worst_a = a;
            out.worst_b = b;
        }
    }
    return out;
}

TwoTermFit fit_log_quadratic(const std::vector<double>& x, const std::vector<double>& y) {
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    if (n < 2 || y.size() != x.size()) throw InsufficientDataError("fit_log_quadratic: need at least two samples");
    Eigen::MatrixXd M(n, 2);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = x[i];
        M(i, 0) = d * d * std::abs(std::log(d)) / y[i];  // relative weighting
        M(i, 1) = d * d / y[i];
        rhs(i) = 1.0;
    }
    const Eigen::Vector2d c = M.colPivHouseholderQr().solve(rhs);
    TwoTermFit f{c(0), c(1), 0.0};
    f.residual = std::sqrt((M * c - rhs).squaredNorm() / static_cast<double>(n));
    return f;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InsufficientDataError("fit_line: need at least two samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss += e * e;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("fit_loglog: samples must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly);
}

namespace {

// Two well separated interior centers: along the first axis through the interior point that keeps
// both at depth ≥ the separation, or the lobe centers of a dumbbell.
std::pair<Point, Point> separated_pair(const DomainDescriptor& domain) {
    if (domain.kind() == DomainDescriptor::Kind::Dumbbell) {
        const Point e = 0.5 * domain.separation() * Point::UnitX();
        return {-e, e};
    }
    const Point o = domain.interior_point();
    const double s = 0.4 * domain.inradius();
    for (int k = 0; k < 4; ++k) {
        const Point e = s * Point::Unit(k);
        if (domain.margin(o - e) >= 0.5 * s && domain.margin(o + e) >= 0.5 * s) return {o - e, o + e};
    }
    throw DomainError("no separated spike pair found in the domain");
}

AsymptoticFitReport slope_report(const std::string& lemma, const std::string& model, const std::vector<double>& d,
                                 const std::vector<QuadResult>& v, double predicted, double rel_tol) {
    AsymptoticFitReport r;
    r.lemma = lemma;
    r.model = model;
    r.sample_columns = {"delta", "value", "error"};
    std::vector<double> y;
    for (std::size_t i = 0; i < d.size(); ++i) {
        r.samples.push_back({d[i], v[i].value, v[i].error});
        y.push_back(v[i].value);
    }
    const LineFit f = fit_loglog(d, y);
    r.coefficients = {{"slope", f.slope}, {"log_constant", f.intercept}};
    r.residual = f.residual;
    r.predicted = predicted;
    r.tolerance = rel_tol;
    r.pass = std::abs(f.slope - predicted) <= rel_tol * std::abs(predicted);
    return r;
}

}  // namespace

std::vector<AsymptoticFitReport> lemma_a2_suite(const DomainDescriptor& domain, const QuadratureSpec& base) {
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4, 1e-5};
    const double scale = domain.inradius();
    BubbleParams b;
    b.xi = domain.interior_point();
    std::vector<AsymptoticFitReport> out;

    auto run = [&](double p) {
        std::vector<QuadResult> v;
        for (double d : deltas) {
            b.delta = d * scale;
            v.push_back(integrate_bubble_power(domain, b, p, base));
        }
        return v;
    };
    std::vector<double> ds;
    for (double d : deltas) ds.push_back(d * scale);

    {
        const auto v = run(2.0);
        AsymptoticFitReport r;
        r.lemma = "A2";
        r.model = "int U^2 = a*delta^2*|ln delta| + b*delta^2";
        r.sample_columns = {"delta", "value", "error"};
        std::vector<double> y;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            r.samples.push_back({ds[i], v[i].value, v[i].error});
            y.push_back(v[i].value);
        }
        const TwoTermFit f = fit_log_quadratic(ds, y);
        const auto& k = constants();
        r.coefficients = {{"a", f.a}, {"b", f.b}};
        r.residual = f.residual;
        r.predicted = k.c4 * k.c4 * k.omega3;
        r.tolerance = 0.02;
        r.pass = std::abs(f.a - r.predicted) <= r.tolerance * r.predicted;
        out.push_back(r);
    }
    out.push_back(slope_report("A2", "int U^(4/3) ~ delta^(4/3)", ds, run(4.0 / 3.0), 4.0 / 3.0, 0.05));
    out.push_back(slope_report("A2", "int U^3 ~ delta^1", ds, run(3.0), 1.0, 0.05));
    return out;
}

std::vector<AsymptoticFitReport> lemma_a3_suite(std::size_t samples, int reseeds, std::uint64_t seed) {
    std::vector<AsymptoticFitReport> out;
    for (int kind = 1; kind <= 4; ++kind) {
        AsymptoticFitReport r;
        r.lemma = "A3";
        static const char* models[] = {"|F(a+b)-F(a)-F'(a)b| <= c(a^2 b^2 + b^4)",
                                       "|F'(a+b)-F'(a)-F''(a)b| <= c(|a| b^2 + |b|^3)",
                                       "|F''(a+b)-F''(a)| <= c(|a||b| + b^2)",
                                       "||a+b|^3 - |a|^3| <= C(|a|^2|b| + |b|^3)"};
        r.model = models[kind - 1];
        r.sample_columns = {"seed", "constant", "worst_a", "worst_b"};
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, mean = 0.0;
        bool finite = true;
        for (int s = 0; s < reseeds; ++s) {
            const TaylorCheck t = taylor_bound_check(kind, samples, 10.0, seed + static_cast<std::uint64_t>(s));
            r.samples.push_back({static_cast<double>(seed + s), t.constant, t.worst_a, t.worst_b});
            finite = finite && std::isfinite(t.constant);
            lo = std::min(lo, t.constant);
            hi = std::max(hi, t.constant);
            mean += t.constant / reseeds;
        }
        r.coefficients = {{"constant_mean", mean}, {"constant_min", lo}, {"constant_max", hi}};
        r.residual = mean > 0.0 ? std::max(hi - mean, mean - lo) / mean : 0.0;
        r.tolerance = 0.05;
        r.pass = finite && r.residual <= r.tolerance;
        out.push_back(r);
    }
    return out;
}

std::vector<AsymptoticFitReport> lemma_a4_suite(const DomainDescriptor& domain, const QuadratureSpec& base) {
    const auto [x1, x2] = separated_pair(domain);
    const double scale = domain.inradius();
    std::vector<AsymptoticFitReport> out;
    BubbleParams b1, b2;
    b1.xi = x1;
    b2.xi = x2;
    {
        AsymptoticFitReport r;
        r.lemma = "A4";
        r.model = "int U1^2 U2^2 / (delta^4 |ln delta^2|) bounded";
        r.sample_columns = {"delta", "value", "error", "ratio"};
        std::vector<double> ratios;
        for (double d : {1e-2, 1e-3}) {
            b1.delta = b2.delta = d * scale;
            const QuadResult q = interaction_integral(domain, b1, b2, 2.0, 2.0, base);
            const double dd = b1.delta;
            const double ratio = q.value / (dd * dd * dd * dd * std::abs(std::log(dd * dd)));
            r.samples.push_back({dd, q.value, q.error, ratio});
            ratios.push_back(ratio);
        }
        const double spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
        r.coefficients = {{"ratio_spread", spread}};
        r.tolerance = 2.0;
        r.pass = std::isfinite(spread) && spread <= r.tolerance;
        r.note = "bounded means the normalized values stay within a factor of the tolerance";
        out.push_back(r);
    }
    {
        std::vector<double> ds;
        std::vector<QuadResult> v;
        for (double d : {1e-2, 3e-3, 1e-3}) {
            b1.delta = b2.delta = d * scale;
            ds.push_back(b1.delta);
            v.push_back(interaction_integral(domain, b1, b2, 8.0 / 3.0, 4.0 / 3.0, base));
        }
        out.push_back(slope_report("A4", "int U1^(8/3) U2^(4/3) ~ delta^(8/3)", ds, v, 8.0 / 3.0, 0.15));
    }
    {
        AsymptoticFitReport r;
        r.lemma = "A4";
        r.model = "int U1^2 U2^2 decreasing as delta2 -> 0 with delta1 fixed";
        r.sample_columns = {"delta2", "value", "error"};
        b1.delta = 1e-2 * scale;
        double prev = std::numeric_limits<double>::infinity();
        r.pass = true;
        for (double d : {1e-2, 1e-3, 1e-4}) {
            b2.delta = d * scale;
            const QuadResult q = interaction_integral(domain, b1, b2, 2.0, 2.0, base);
            r.samples.push_back({b2.delta, q.value, q.error});
            r.pass = r.pass && q.value < prev;
            prev = q.value;
        }
        out.push_back(r);
    }
    return out;
}

std::vector<AsymptoticFitReport> lemma_a5_suite(const RobinEvaluator& ev, const QuadratureSpec& base) {
    const auto [x1, x2] = separated_pair(ev.domain());
    const double scale = ev.domain().inradius();
    const std::vector<double> deltas{3e-2, 1e-2, 3e-3};
    std::vector<AsymptoticFitReport> out;
    for (int j : {0, 1}) {
        std::vector<double> ds;
        std::vector<QuadResult> first, second;
        for (double d : deltas) {
            BubbleParams b1, b2;
            b1.xi = x1;
            b2.xi = x2;
            b1.delta = b2.delta = d * scale;
            ds.push_back(b1.delta);
            const auto n = interaction_norms(ev, b1, b2, j, base);
            first.push_back(n.first);
            second.push_back(n.second);
        }
        AsymptoticFitReport a = slope_report("A5", "||(PU2)^2 Ppsi1^" + std::to_string(j) + "||_4/3 ~ delta^2", ds,
                                             first, 2.0, 0.15);
        AsymptoticFitReport b = slope_report("A5", "||PU1 PU2 Ppsi1^" + std::to_string(j) + "||_4/3 ~ delta^2", ds,
                                             second, 2.0, 0.15);
        if (j != 0) {
            // away from ξ₁, ψ^j (j ≥ 1) carries an extra factor δ, so the bound is not attained: test it as a bound
            for (AsymptoticFitReport* r : {&a, &b}) {
                r->pass = r->coefficients.front().second >= r->predicted * (1.0 - r->tolerance);
                r->note = "upper bound: slope must be at least the predicted rate";
            }
        }
        out.push_back(a);
        out.push_back(b);
    }
    return out;
}

}  // namespace spikelab
