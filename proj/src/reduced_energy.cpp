#include "spikelab/reduced_energy.hpp"

#include "spikelab/constants.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/projection.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spikelab {

namespace {

double psi_a_coeff() {
    const auto& k = constants();
    return 8.0 * std::sqrt(2.0) * k.A * k.A;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

// One separable term of Ψ scaled by e^{2 d_ref/λ}: f = e^{−2(d−d_ref)/λ} μ⁻¹ (a τ − 4ω₃ d).
struct Term {
    const RobinEvaluator* ev;
    double lambda, inv_mu, d_ref;

    double g(double d, double tau) const { return inv_mu * (psi_a_coeff() * tau - 4.0 * constants().omega3 * d); }
    double scale(double d) const { return std::exp(-2.0 * (d - d_ref) / lambda); }
    double value(double d, const Point& xi) const { return scale(d) * g(d, ev->robin(xi)); }
    double d_of(double tau, double lo, double hi) const { return std::clamp(critical_d(lambda, tau), lo, hi); }

    // gradient and Hessian in (d, ξ)
    void derivatives(double d, const Point& xi, Eigen::Matrix<double, 5, 1>& grad, Eigen::Matrix<double, 5, 5>& hess) const {
        const double tau = ev->robin(xi);
        const Point gt = ev->robin_grad(xi);
        const Matrix4 ht = ev->robin_hess(xi);
        const double e = scale(d), gv = g(d, tau), c = 4.0 * inv_mu * constants().omega3, a = psi_a_coeff() * inv_mu;
        grad(0) = e * (-2.0 / lambda * gv - c);
        grad.tail<4>() = e * a * gt;
        hess(0, 0) = e * (4.0 / (lambda * lambda) * gv + 4.0 * c / lambda);
        hess.block<4, 1>(1, 0) = e * (-2.0 / lambda) * a * gt;
        hess.block<1, 4>(0, 1) = hess.block<4, 1>(1, 0).transpose();
        hess.block<4, 4>(1, 1) = e * a * ht;
    }
};

bool lex_less(const Point& a, const Point& b) {
    for (int i = 0; i < 4; ++i)
        if (a(i) != b(i)) return a(i) < b(i);
    return false;
}

Point clamp_to(const Box& b, const Point& x) { return x.cwiseMax(b.lo).cwiseMin(b.hi); }

struct Candidate {
    double d = 0.0;
    Point xi = Point::Zero();
    double value = std::numeric_limits<double>::infinity();
};

// projected Newton on φ(ξ) = f(d(ξ), ξ) with d(ξ) the exact minimizer on [d_lo, d_hi]
Candidate minimize_term(const Term& t, const SpikeBox& box, const Point& start, const ReducedOptions& opt) {
    const Box& B = box.xi_box;
    const double size = B.diameter();
    auto phi = [&](const Point& xi, double& d) {
        const double tau = t.ev->robin(xi);
        d = t.d_of(tau, box.d_lo, box.d_hi);
        return t.scale(d) * t.g(d, tau);
    };
    Candidate c;
    c.xi = clamp_to(B, start);
    c.value = phi(c.xi, c.d);
    for (int it = 0; it < opt.max_iterations; ++it) {
        Eigen::Matrix<double, 5, 1> g;
        Eigen::Matrix<double, 5, 5> h;
        t.derivatives(c.d, c.xi, g, h);
        Point gx = g.tail<4>();
        Matrix4 hx = h.block<4, 4>(1, 1);
        const bool d_free = c.d > box.d_lo && c.d < box.d_hi;
        if (d_free && h(0, 0) > 0.0) hx -= h.block<4, 1>(1, 0) * h.block<1, 4>(0, 1) / h(0, 0);
        const Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (hx + hx.transpose()));
        const Eigen::Vector4d lam = es.eigenvalues().cwiseAbs();
        const double floor = std::max(1e-12 * lam.maxCoeff(), std::numeric_limits<double>::min());
        Point step = -es.eigenvectors() * (es.eigenvectors().transpose() * gx).cwiseQuotient(lam.cwiseMax(floor));
        if (!step.allFinite()) break;
        // a step that would leave the box along an active face is dropped in that coordinate
        for (int k = 0; k < 4; ++k)
            if ((c.xi(k) <= B.lo(k) && step(k) < 0.0) || (c.xi(k) >= B.hi(k) && step(k) > 0.0)) step(k) = 0.0;
        double s = 1.0;
        bool moved = false;
        for (int back = 0; back < 40; ++back, s *= 0.5) {
            const Point xn = clamp_to(B, c.xi + s * step);
            double dn;
            const double vn = phi(xn, dn);
            if (vn <= c.value) {
                const double dx = (xn - c.xi).norm();
                c.xi = xn;
                c.d = dn;
                c.value = vn;
                moved = dx > opt.tolerance * size;
                break;
            }
        }
        if (!moved) break;
    }
    return c;
}

// Newton on ∇f = 0 in (d, ξ), from an interior minimizer
void polish(const Term& t, Candidate& c, const SpikeBox& box) {
    for (int it = 0; it < 20; ++it) {
        Eigen::Matrix<double, 5, 1> g;
        Eigen::Matrix<double, 5, 5> h;
        t.derivatives(c.d, c.xi, g, h);
        const Eigen::Matrix<double, 5, 1> s = h.fullPivLu().solve(-g);
        if (!s.allFinite()) return;
        const double dn = c.d + s(0);
        const Point xn = c.xi + s.tail<4>();
        if (dn <= box.d_lo || dn >= box.d_hi || !box.xi_box.contains(xn)) return;
        c.d = dn;
        c.xi = xn;
        if (s.norm() < 1e-14 * (1.0 + std::abs(c.d))) break;
    }
    c.value = t.value(c.d, c.xi);
}

double box_gap(const Box& a, const Box& b) {
    Point gap;
    for (int k = 0; k < 4; ++k) gap(k) = std::max({0.0, a.lo(k) - b.hi(k), b.lo(k) - a.hi(k)});
    return gap.norm();
}

}  // namespace

void SpikeEnsemble::validate(const DomainDescriptor& domain) const {
    if (bubbles.empty()) throw PreconditionError("ensemble: at least one spike is required");
    if (lambdas.size() != bubbles.size()) throw PreconditionError("ensemble: one lambda per spike is required");
    for (std::size_t i = 0; i < bubbles.size(); ++i) {
        bubbles[i].validate();
        if (!(lambdas[i] > 0.0)) throw PreconditionError("ensemble: lambda must be positive");
        if (domain.closed_form() && lambdas[i] >= lambda1_ball(domain.radius()))
            throw PreconditionError("ensemble: lambda " + fmt(lambdas[i]) + " is not below lambda_1 of the ball (" +
                                    fmt(lambda1_ball(domain.radius())) + ")");
        if (domain.margin(bubbles[i].xi) < eta)
            throw PreconditionError("ensemble: spike " + std::to_string(i) + " closer than eta to the boundary");
        for (std::size_t j = i + 1; j < bubbles.size(); ++j)
            if ((bubbles[i].xi - bubbles[j].xi).norm() < eta)
                throw PreconditionError("ensemble: spikes " + std::to_string(i) + " and " + std::to_string(j) +
                                        " closer than eta");
    }
}

double lambda1_ball(double radius) {
    const double j11 = boost::math::cyl_bessel_j_zero(1.0, 1);
    return j11 * j11 / (radius * radius);
}

double EnergyBreakdown::total() const {
    double s = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) s += A[i] - B[i] - C[i];
    for (Eigen::Index i = 0; i < D.rows(); ++i)
        for (Eigen::Index j = i + 1; j < D.cols(); ++j) s -= D(i, j);
    return s;
}

double EnergyBreakdown::total_error() const {
    double s = 0.0;
    for (std::size_t i = 0; i < A_err.size(); ++i) s += A_err[i] + B_err[i] + C_err[i];
    for (Eigen::Index i = 0; i < D_err.rows(); ++i)
        for (Eigen::Index j = i + 1; j < D_err.cols(); ++j) s += D_err(i, j);
    return s;
}

double critical_d(double lambda, double tau) {
    const auto& k = constants();
    return 0.5 * lambda + 2.0 * std::sqrt(2.0) * k.A * k.A / k.omega3 * tau;
}

double remainder_budget(const SpikeEnsemble& ens, double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const double d = ens.bubbles[i].delta;
        s += ens.lambdas[i] * d + d * d + std::abs(ens.beta) * d * d;
    }
    return c * s;
}

double psi(const std::vector<double>& lambdas, const std::vector<double>& d, const std::vector<Point>& xis,
           const std::vector<double>& mus, const RobinEvaluator& ev) {
    const std::size_t m = lambdas.size();
    if (d.size() != m || xis.size() != m || mus.size() != m) throw PreconditionError("psi: inconsistent sizes");
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (d[i] < 0.0) throw PreconditionError("psi: d must be non-negative");
        s += std::exp(-2.0 * d[i] / lambdas[i]) / mus[i] *
             (psi_a_coeff() * ev.robin(xis[i]) - 4.0 * constants().omega3 * d[i]);
    }
    return s;
}

Eigen::VectorXd psi_grad(const std::vector<double>& lambdas, const std::vector<double>& d,
                         const std::vector<Point>& xis, const std::vector<double>& mus, const RobinEvaluator& ev) {
    const std::size_t m = lambdas.size();
    if (d.size() != m || xis.size() != m || mus.size() != m) throw PreconditionError("psi_grad: inconsistent sizes");
    Eigen::VectorXd g(5 * m);
    const double w3 = constants().omega3;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = std::exp(-2.0 * d[i] / lambdas[i]) / mus[i];
        const double gv = psi_a_coeff() * ev.robin(xis[i]) - 4.0 * w3 * d[i];
        g(static_cast<Eigen::Index>(i)) = e * (-2.0 / lambdas[i] * gv - 4.0 * w3);
        g.segment<4>(static_cast<Eigen::Index>(m + 4 * i)) = e * psi_a_coeff() * ev.robin_grad(xis[i]);
    }
    return g;
}

double calibrate_coupling(const RobinEvaluator& ev, const SpikeEnsemble& ens, const QuadratureSpec& spec) {
    if (ens.size() < 2) return 0.0;
    BubbleParams b0 = ens.bubbles[0], b1 = ens.bubbles[1];
    b0.delta = b1.delta = 1e-2;
    QuadratureSpec q = spec;
    q.spike_centers = {{b0.xi, b0.delta}, {b1.xi, b1.delta}};
    q.eta = ens.eta;
    const QuadratureEngine eng(ev.domain(), q);
    const ProjectedBubble p0 = project_bubble(ev, b0, ProjectionMode::Exact);
    const ProjectedBubble p1 = project_bubble(ev, b1, ProjectionMode::Exact);
    const QuadResult r = eng.integrate([&](const Point& x) {
        const double u = p0(x), v = p1(x);
        return u * u * v * v;
    });
    const double dd = b0.delta * b1.delta;
    return r.value / (dd * dd * std::abs(std::log(dd)));
}

EnergyBreakdown energy_terms_asymptotic(const RobinEvaluator& ev, const SpikeEnsemble& ens,
                                        const EnergyOptions& opt) {
    ens.validate(ev.domain());
    const auto& k = constants();
    const std::size_t m = ens.size();
    EnergyBreakdown out;
    out.method = "asymptotic";
    const double c2 = k.c4 * k.c4, c3 = c2 * k.c4, c4 = c3 * k.c4;
    std::vector<double> d(m), mus(m);
    std::vector<Point> xis(m);
    for (std::size_t i = 0; i < m; ++i) {
        const BubbleParams& b = ens.bubbles[i];
        if (b.delta >= 0.1 * ens.eta)
            throw PreconditionError("energy_terms_asymptotic: delta " + fmt(b.delta) + " is not below 0.1 eta");
        const double inv_mu = 1.0 / b.mu, tau = ev.robin(b.xi), d2 = b.delta * b.delta;
        const double lnd = std::abs(std::log(b.delta));
        out.A.push_back(0.5 * c4 * inv_mu * k.I4 - 0.5 * c3 * inv_mu * k.A * k.A * tau * d2);
        out.B.push_back(0.25 * c4 * inv_mu * k.I4 - c3 * inv_mu * k.A * k.A * tau * d2);
        out.C.push_back(0.5 * c2 * inv_mu * k.omega3 * ens.lambdas[i] * d2 * lnd);
        out.A_err.push_back(0.0);
        out.B_err.push_back(0.0);
        out.C_err.push_back(0.0);
        out.leading_level += 0.25 * c4 * inv_mu * k.I4;
        d[i] = ens.lambdas[i] * lnd;
        mus[i] = b.mu;
        xis[i] = b.xi;
    }
    out.D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    out.D_err = out.D;
    if (m >= 2) {
        out.coupling_K = opt.coupling_K ? *opt.coupling_K : calibrate_coupling(ev, ens, opt.quadrature);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                const BubbleParams &a = ens.bubbles[i], &b = ens.bubbles[j];
                const double dd = a.delta * b.delta;
                out.D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    0.5 * ens.beta / (a.mu * b.mu) * out.coupling_K * dd * dd * std::abs(std::log(dd));
            }
    }
    out.psi_value = psi(ens.lambdas, d, xis, mus, ev);
    out.remainder_budget = remainder_budget(ens, opt.remainder_constant);
    return out;
}

EnergyBreakdown energy_terms_quadrature(const RobinEvaluator& ev, const SpikeEnsemble& ens,
                                        const EnergyOptions& opt) {
    ens.validate(ev.domain());
    const std::size_t m = ens.size();
    QuadratureSpec q = opt.quadrature;
    q.spike_centers.clear();
    for (const auto& b : ens.bubbles) q.spike_centers.push_back({b.xi, b.delta});
    q.eta = ens.eta;
    const QuadratureEngine eng(ev.domain(), q);
    std::vector<ProjectedBubble> pu;
    for (const auto& b : ens.bubbles) pu.push_back(project_bubble(ev, b, ProjectionMode::Exact));

    EnergyBreakdown out;
    out.method = "quadrature";
    const auto& k = constants();
    std::vector<double> d(m), mus(m);
    std::vector<Point> xis(m);
    for (std::size_t i = 0; i < m; ++i) {
        const BubbleParams& b = ens.bubbles[i];
        const double inv_mu = 1.0 / b.mu;
        const ProjectedBubble& p = pu[i];
        const QuadResult a = eng.integrate([&](const Point& x) {
            const double u = bubble_value(b, x);
            return u * u * u * p(x);
        });
        const QuadResult bb = eng.integrate([&](const Point& x) {
            const double v = p(x);
            return v * v * v * v;
        });
        const QuadResult c = eng.integrate([&](const Point& x) {
            const double v = p(x);
            return v * v;
        });
        out.A.push_back(0.5 * inv_mu * a.value);
        out.A_err.push_back(0.5 * inv_mu * a.error);
        out.B.push_back(0.25 * inv_mu * bb.value);
        out.B_err.push_back(0.25 * inv_mu * bb.error);
        out.C.push_back(0.5 * ens.lambdas[i] * inv_mu * c.value);
        out.C_err.push_back(0.5 * ens.lambdas[i] * inv_mu * c.error);
        out.leading_level += 0.25 * std::pow(k.c4, 4) * inv_mu * k.I4;
        d[i] = ens.lambdas[i] * std::abs(std::log(b.delta));
        mus[i] = b.mu;
        xis[i] = b.xi;
    }
    out.D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    out.D_err = out.D;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const QuadResult r = eng.integrate([&](const Point& x) {
                const double u = pu[i](x), v = pu[j](x);
                return u * u * v * v;
            });
            const double f = 0.5 * ens.beta / (ens.bubbles[i].mu * ens.bubbles[j].mu);
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            out.D(ii, jj) = out.D(jj, ii) = f * r.value;
            out.D_err(ii, jj) = out.D_err(jj, ii) = std::abs(f) * r.error;
        }
    out.psi_value = psi(ens.lambdas, d, xis, mus, ev);
    out.remainder_budget = remainder_budget(ens, opt.remainder_constant);
    return out;
}

CriticalPointReport solve_reduced_system(const RobinEvaluator& ev, const std::vector<double>& lambdas,
                                         const std::vector<double>& mus, const std::vector<SpikeBox>& boxes,
                                         ReducedMode mode, double eta, const ReducedOptions& opt) {
    const std::size_t m = lambdas.size();
    if (mus.size() != m || boxes.size() != m || m == 0)
        throw PreconditionError("solve_reduced_system: one lambda, mu and box per spike are required");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(lambdas[i] > 0.0) || !(mus[i] > 0.0))
            throw PreconditionError("solve_reduced_system: lambda and mu must be positive");
        if (!(boxes[i].d_lo >= 0.0 && boxes[i].d_hi > boxes[i].d_lo))
            throw PreconditionError("solve_reduced_system: empty or negative d interval");
        for (std::size_t j = i + 1; j < m; ++j)
            if (box_gap(boxes[i].xi_box, boxes[j].xi_box) < eta)
                throw PreconditionError("solve_reduced_system: xi boxes " + std::to_string(i) + " and " +
                                        std::to_string(j) + " are closer than eta");
    }

    CriticalPointReport rep;
    rep.mode = mode;
    rep.lambdas = lambdas;
    rep.mus = mus;
    rep.min_boundary_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        const SpikeBox& box = boxes[i];
        const Term t{&ev, lambdas[i], 1.0 / mus[i], box.d_lo};
        Candidate best;
        if (mode == ReducedMode::Minimization) {
            std::vector<Point> starts{box.xi_box.center()};
            for (int s = 1; s < opt.starts; ++s) {
                Point u;
                for (int k = 0; k < 4; ++k) u(k) = halton(opt.seed * 7919ULL + static_cast<std::uint64_t>(s), k);
                starts.push_back(box.xi_box.lo + u.cwiseProduct(box.xi_box.hi - box.xi_box.lo));
            }
            for (const Point& s : starts) {
                Candidate c;
                try {
                    c = minimize_term(t, box, s, opt);
                } catch (const AccuracyError&) {
                    continue;
                } catch (const DomainError&) {
                    continue;
                }
                const bool better = !std::isfinite(best.value) || c.value < best.value - 1e-12 * std::abs(best.value) ||
                                    (std::abs(c.value - best.value) <= 1e-12 * std::abs(best.value) && lex_less(c.xi, best.xi));
                if (better) best = c;
            }
            if (!std::isfinite(best.value)) throw BoundaryMinimizerError("no start produced a finite value of psi");
            const double span = box.d_hi - box.d_lo;
            const bool d_inside = best.d > box.d_lo + 1e-9 * span && best.d < box.d_hi - 1e-9 * span;
            const bool xi_inside = box.xi_box.face_distance(best.xi) > 1e-9 * box.xi_box.diameter();
            if (!d_inside || !xi_inside) {
                std::ostringstream os;
                os << "spike " << i << ": minimizer on the box boundary (d = " << best.d << ", xi face distance "
                   << box.xi_box.face_distance(best.xi) << ")";
                throw BoundaryMinimizerError(os.str());
            }
            polish(t, best, box);
            // boundary probes: both d faces and all ξ faces on cell-centered grids
            const int n = std::max(1, opt.probes_per_dim);
            auto cell = [n](int a) { return (a + 0.5) / n; };
            double margin = std::numeric_limits<double>::infinity();
            auto probe = [&](double d, const Point& xi) {
                try {
                    margin = std::min(margin, t.value(d, xi) - best.value);
                } catch (const AccuracyError&) {
                } catch (const DomainError&) {
                }
            };
            const Box& B = box.xi_box;
            int total = 1;
            for (int k = 0; k < 4; ++k) total *= n;
            for (int idx = 0; idx < total; ++idx) {
                Point xi;
                for (int k = 0, r = idx; k < 4; ++k, r /= n) xi(k) = B.lo(k) + cell(r % n) * (B.hi(k) - B.lo(k));
                probe(box.d_lo, xi);
                probe(box.d_hi, xi);
            }
            for (int face = 0; face < 4; ++face)
                for (int side = 0; side < 2; ++side)
                    for (int a = 0; a < n; ++a)
                        for (int idx = 0; idx < n * n * n; ++idx) {
                            Point xi;
                            for (int k = 0, r = idx; k < 4; ++k) {
                                if (k == face) {
                                    xi(k) = side == 0 ? B.lo(k) : B.hi(k);
                                } else {
                                    xi(k) = B.lo(k) + cell(r % n) * (B.hi(k) - B.lo(k));
                                    r /= n;
                                }
                            }
                            probe(box.d_lo + cell(a) * span, xi);
                        }
            if (!(margin > 0.0))
                throw BoundaryMinimizerError("spike " + std::to_string(i) +
                                             ": a boundary probe is not above the interior value");
            rep.min_boundary_margin = std::min(rep.min_boundary_margin, margin);
        } else {
            const DegreeCertificate cert = brouwer_degree(ev, box.xi_box, opt.degree);
            if (cert.degree == 0)
                throw NotCertifiableError("spike " + std::to_string(i) + ": the gradient of tau has degree 0 on its box");
            best.xi = cert.zeros.front().x;
            for (const auto& z : cert.zeros)
                if (z.index_sign != 0) {
                    best.xi = z.x;
                    break;
                }
            best.d = critical_d(lambdas[i], ev.robin(best.xi));
            if (best.d <= box.d_lo || best.d >= box.d_hi)
                throw NotCertifiableError("spike " + std::to_string(i) + ": the d equation has no root in [" +
                                          fmt(box.d_lo) + ", " + fmt(box.d_hi) + "]");
            rep.degree_certificates.push_back(cert);
        }
        const double tau = ev.robin(best.xi);
        const double g = t.g(best.d, tau);
        rep.d_star.push_back(best.d);
        rep.xi_star.push_back(best.xi);
        rep.delta_star.push_back(std::exp(-best.d / lambdas[i]));
        rep.psi_exponents.push_back(-2.0 * best.d / lambdas[i]);
        rep.psi_prefactors.push_back(g);
        rep.residuals.push_back(std::abs(-2.0 / lambdas[i] * g - 4.0 / mus[i] * constants().omega3));
        rep.residuals.push_back(ev.robin_grad(best.xi).norm());
    }
    std::vector<double> d = rep.d_star;
    rep.psi_at_star = psi(lambdas, d, rep.xi_star, mus, ev);
    if (mode == ReducedMode::Degree) rep.min_boundary_margin = 0.0;
    return rep;
}

double BetaSchedule::beta(double lambda) const { return sign * std::exp(log_abs_beta(lambda)); }

BetaSchedule BetaSchedule::parse(const std::string& text, double rate_constant) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(arg, &used);
        if (used != arg.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ConfigError("beta_schedule: expected const:<value> or exp:<rate>, got '" + text + "'");
    }
    BetaSchedule s;
    s.description = text;
    if (kind == "const") {
        s.sign = v < 0.0 ? -1.0 : 1.0;
        const double l = v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(v));
        s.log_abs_beta = [l](double) { return l; };
    } else if (kind == "exp") {
        s.sign = -1.0;
        s.log_abs_beta = [v, rate_constant](double lambda) { return v * rate_constant / lambda; };
    } else {
        throw ConfigError("beta_schedule: unknown kind '" + kind + "' (expected const or exp)");
    }
    return s;
}

BetaAdmissibility beta_admissible(const BetaSchedule& beta, const std::vector<double>& lambdas,
                                  const std::vector<double>& tau_values, double margin) {
    if (lambdas.size() < 2) throw InsufficientDataError("beta_admissible: at least two lambda values are required");
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        if (!(lambdas[k] < lambdas[k - 1])) throw PreconditionError("beta_admissible: lambda grid must decrease");
    const auto& c = constants();
    BetaAdmissibility out;
    out.lambdas = lambdas;
    out.margin = margin;
    out.admissible = true;
    const double l10 = std::log(10.0), lm = std::log10(margin);
    for (double tau : tau_values) {
        const double C = c.c4 / c.omega3 * c.A * c.A * tau;
        out.rate_constants.push_back(C);
        std::vector<double> r1, r2, r3;
        for (double lam : lambdas) {
            const double lb = beta.log_abs_beta(lam), ld2 = -2.0 * C / lam;
            r1.push_back((lb - C / (2.0 * lam)) / l10);
            r2.push_back((lb + ld2) / l10);
            r3.push_back((2.0 * lb + ld2) / l10);
        }
        const char* names[] = {"|beta| exp(-C/(2 lambda))", "|beta| delta^2", "|beta|^2 delta^2"};
        const std::vector<double>* seqs[] = {&r1, &r2, &r3};
        for (int s = 0; s < 3 && out.admissible; ++s) {
            const auto& r = *seqs[s];
            for (std::size_t k = 1; k < r.size(); ++k)
                if (r[k] > r[k - 1] + 1e-12 * std::abs(r[k - 1])) {
                    out.admissible = false;
                    out.reason = std::string(names[s]) + " increases between lambda = " + fmt(lambdas[k - 1]) +
                                 " and " + fmt(lambdas[k]);
                    break;
                }
            if (out.admissible && !(r.back() < lm)) {
                out.admissible = false;
                out.reason = std::string(names[s]) + " ends above the margin";
            }
        }
        out.log10_ratio_exp.push_back(r1);
        out.log10_ratio_d2.push_back(r2);
        out.log10_ratio_b2d2.push_back(r3);
    }
    return out;
}

}  // namespace spikelab
