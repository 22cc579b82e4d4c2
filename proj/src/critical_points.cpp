#include "spikelab/critical_points.hpp"

#include "spikelab/errors.hpp"
#include "spikelab/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace spikelab {

namespace {

bool lex_less(const Point& a, const Point& b) {
    for (int i = 0; i < 4; ++i)
        if (a(i) != b(i)) return a(i) < b(i);
    return false;
}

bool add_unique(std::vector<CriticalPoint>& list, const CriticalPoint& c, double tol) {
    for (const auto& e : list)
        if ((e.x - c.x).norm() < tol) return false;
    list.push_back(c);
    return true;
}

std::string fmt_point(const Point& p) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << p(0) << ", " << p(1) << ", " << p(2) << ", " << p(3) << ")";
    return os.str();
}

}  // namespace

NewtonOutcome newton_on_gradient(const RobinEvaluator& ev, const Point& start, const Box& box,
                                 const CriticalSearchOptions& opt) {
    NewtonOutcome out;
    const Box wide = box.inflated(0.5);
    const double scale = ev.domain().inradius();
    Point x = start, g;
    Matrix4 h;
    try {
        ev.robin_grad_hess_fast(x, g, h);
    } catch (const Error&) {
        return out;
    }
    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (h + h.transpose()));
        const Eigen::Vector4d lam = es.eigenvalues();
        const double lmax = lam.cwiseAbs().maxCoeff();
        Point s = Point::Zero();
        for (int i = 0; i < 4; ++i) {
            if (std::abs(lam(i)) <= 1e-12 * lmax) continue;
            const Point v = es.eigenvectors().col(i);
            s -= (v.dot(g) / lam(i)) * v;
        }
        double t = 1.0;
        bool accepted = false;
        Point xn, gn;
        Matrix4 hn;
        for (int back = 0; back < 8; ++back, t *= 0.5) {
            xn = x + t * s;
            if (!wide.contains(xn)) continue;
            try {
                ev.robin_grad_hess_fast(xn, gn, hn);
            } catch (const Error&) {
                continue;
            }
            if (gn.norm() < g.norm() || t * s.norm() < 1e3 * opt.step_tol * scale) {
                accepted = true;
                break;
            }
        }
        if (!accepted) return out;
        const double moved = (xn - x).norm();
        x = xn;
        g = gn;
        h = hn;
        if (moved < opt.step_tol * scale || g.norm() == 0.0) {
            out.converged = box.contains(x);
            out.x = x;
            return out;
        }
    }
    return out;
}

CriticalPoint classify_critical_point(const RobinEvaluator& ev, const Point& x, const CriticalSearchOptions& opt) {
    CriticalPoint c;
    c.x = x;
    c.tau = ev.robin(x);
    const Point g = ev.robin_grad(x);
    c.grad_residual = g.norm();
    const Eigen::SelfAdjointEigenSolver<Matrix4> es(ev.robin_hess(x));
    c.eigenvalues = es.eigenvalues();
    const double lmax = c.eigenvalues.cwiseAbs().maxCoeff();
    const double lmin = c.eigenvalues.cwiseAbs().minCoeff();
    if (!(lmax > 0.0) || lmin < opt.degeneracy_threshold * lmax) {
        c.classification = "degenerate";
        c.index_sign = 0;
        c.newton_step = std::numeric_limits<double>::infinity();
        return c;
    }
    c.newton_step = (es.eigenvectors() * (es.eigenvectors().transpose() * g).cwiseQuotient(c.eigenvalues)).norm();
    int neg = 0;
    for (int i = 0; i < 4; ++i) neg += c.eigenvalues(i) < 0.0;
    c.classification = neg == 0 ? "min" : (neg == 4 ? "max" : "saddle");
    c.index_sign = (neg % 2 == 0) ? 1 : -1;
    return c;
}

namespace {

struct StartResult {
    std::optional<CriticalPoint> point;
    bool converged = false;
    std::string error;
};

// Newton plus classification for every start, in parallel; callers dedup in start order.
std::vector<StartResult> run_starts(const RobinEvaluator& ev, const std::vector<Point>& starts, const Box& box,
                                    const CriticalSearchOptions& opt) {
    std::vector<StartResult> out(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        const NewtonOutcome r = newton_on_gradient(ev, starts[i], box, opt);
        if (!r.converged) return;
        out[i].converged = true;
        try {
            out[i].point = classify_critical_point(ev, r.x, opt);
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

}  // namespace

std::vector<CriticalPoint> find_robin_critical_points(const RobinEvaluator& ev, const std::vector<Box>& boxes,
                                                      const CriticalSearchOptions& opt) {
    std::vector<CriticalPoint> found;
    const double tol = opt.dedup_tol * ev.domain().inradius();
    for (const Box& b : boxes) {
        std::vector<Point> starts;
        for (int i = 0; i < opt.starts_per_box; ++i) {
            const std::uint64_t idx = opt.seed * 7919ULL + static_cast<std::uint64_t>(i) + 1;
            Point u;
            for (int k = 0; k < 4; ++k) u(k) = halton(idx, k);
            starts.push_back(b.lo + u.cwiseProduct(b.hi - b.lo));
        }
        for (const StartResult& r : run_starts(ev, starts, b, opt)) {
            if (!r.point) continue;
            const CriticalPoint& c = *r.point;
            if (c.newton_step > opt.step_accept * ev.domain().inradius()) continue;
            add_unique(found, c, tol);
        }
    }
    std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) { return lex_less(a.x, b.x); });
    return found;
}

DegreeCertificate brouwer_degree(const RobinEvaluator& ev, const Box& box, const DegreeOptions& opt) {
    DegreeCertificate cert;
    cert.box = box;
    cert.required_margin = opt.safety_margin;

    // condition (i): no zero on the boundary, with a margin
    const int n = std::max(1, opt.face_grid);
    const std::size_t per_face = static_cast<std::size_t>(n) * n * n;
    std::vector<double> norms(8 * per_face);
    std::vector<std::string> errors(norms.size());
    parallel_for(norms.size(), [&](std::size_t i) {
        const int k = static_cast<int>(i / (2 * per_face));
        const int side = static_cast<int>(i / per_face) % 2;
        std::size_t r = i % per_face;
        const int idx[3] = {static_cast<int>(r / (n * n)), static_cast<int>(r / n) % n, static_cast<int>(r % n)};
        Point p;
        int m = 0;
        for (int d = 0; d < 4; ++d) {
            if (d == k) {
                p(d) = side == 0 ? box.lo(d) : box.hi(d);
            } else {
                const double t = (idx[m++] + 0.5) / n;  // cell centres: box corners may touch ∂Ω
                p(d) = box.lo(d) + t * (box.hi(d) - box.lo(d));
            }
        }
        try {
            norms[i] = ev.robin_grad_fast(p).norm();
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw NotCertifiableError("box boundary not evaluable: " + e);
    const double margin = *std::min_element(norms.begin(), norms.end());
    cert.boundary_margin = margin;
    if (margin < opt.safety_margin) {
        std::ostringstream os;
        os << "boundary gradient margin " << margin << " below the safety margin " << opt.safety_margin;
        throw NotCertifiableError(os.str());
    }

    // zero enumeration on refining start grids until the count is stable
    const double tol = opt.search.dedup_tol * ev.domain().inradius();
    std::vector<CriticalPoint> zeros;
    int prev = -1;
    for (int g = opt.min_level; g <= opt.max_level; ++g) {
        std::vector<Point> starts;
        for (int i0 = 0; i0 < g; ++i0)
            for (int i1 = 0; i1 < g; ++i1)
                for (int i2 = 0; i2 < g; ++i2)
                    for (int i3 = 0; i3 < g; ++i3) {
                        const int ii[4] = {i0, i1, i2, i3};
                        Point start;
                        for (int d = 0; d < 4; ++d) start(d) = box.lo(d) + (ii[d] + 0.5) / g * (box.hi(d) - box.lo(d));
                        starts.push_back(start);
                    }
        for (const StartResult& r : run_starts(ev, starts, box, opt.search)) {
            if (!r.converged) continue;
            if (!r.point) throw NotCertifiableError("zero not classifiable: " + r.error);
            const CriticalPoint& c = *r.point;
            bool dup = false;
            for (const auto& e : zeros) dup = dup || (e.x - c.x).norm() < tol;
            if (dup) continue;
            if (c.index_sign == 0) throw NotCertifiableError("degenerate zero of the gradient at " + fmt_point(c.x));
            add_unique(zeros, c, tol);
        }
        cert.zeros_per_level.push_back(static_cast<int>(zeros.size()));
        if (prev == static_cast<int>(zeros.size())) {
            cert.grid_level = g;
            break;
        }
        prev = static_cast<int>(zeros.size());
    }
    if (cert.grid_level == 0) throw NotCertifiableError("zero count did not stabilise up to the maximum grid level");
    std::sort(zeros.begin(), zeros.end(), [](const CriticalPoint& a, const CriticalPoint& b) { return lex_less(a.x, b.x); });
    cert.degree = 0;
    for (const auto& z : zeros) cert.degree += z.index_sign;
    cert.zeros = std::move(zeros);
    return cert;
}

std::vector<Point> default_scan_starts(const DomainDescriptor& domain, int extra) {
    std::vector<Point> out{domain.interior_point()};
    const Box bb = domain.bounding_box();
    const double floor = 0.05 * domain.inradius();
    for (int i = 1; i < 20; ++i) {
        Point p = Point::Zero();
        p(0) = bb.lo(0) + (bb.hi(0) - bb.lo(0)) * i / 20.0;
        if (domain.margin(p) > floor) out.push_back(p);
    }
    int made = 0;
    for (std::uint64_t k = 1; made < extra && k < 10000; ++k) {
        Point p;
        for (int d = 0; d < 4; ++d) p(d) = bb.lo(d) + halton(k, d) * (bb.hi(d) - bb.lo(d));
        if (domain.margin(p) > floor) {
            out.push_back(p);
            ++made;
        }
    }
    return out;
}

DegreeScan scan_degrees(const RobinEvaluator& ev, const std::vector<Point>& starts, const DegreeOptions& opt) {
    DegreeScan scan;
    const DomainDescriptor& dom = ev.domain();
    const Box whole = dom.bounding_box();
    const double tol = 1e-3 * dom.inradius();
    for (const StartResult& r : run_starts(ev, starts, whole, opt.search)) {
        if (!r.point) continue;
        const CriticalPoint& c = *r.point;
        bool dup = false;
        for (const auto& e : scan.candidates) dup = dup || (e.x - c.x).norm() < tol;
        if (dup) continue;
        if (c.newton_step <= opt.search.step_accept * dom.inradius()) scan.candidates.push_back(c);
    }
    std::sort(scan.candidates.begin(), scan.candidates.end(),
              [](const CriticalPoint& a, const CriticalPoint& b) { return lex_less(a.x, b.x); });
    for (const auto& c : scan.candidates) {
        const double w = std::min(0.1 * dom.inradius(), 0.45 * dom.margin(c.x));
        const Box b{c.x - Point::Constant(w), c.x + Point::Constant(w)};
        try {
            scan.certificates.push_back(brouwer_degree(ev, b, opt));
        } catch (const Error& e) {
            scan.failures.push_back("box around " + fmt_point(c.x) + ": " + e.what());
        }
    }
    return scan;
}

}  // namespace spikelab
