#include "spikelab/constants.hpp"

#include "spikelab/errors.hpp"
#include "spikelab/rules.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace spikelab {

namespace {

using boost::math::quadrature::gauss_kronrod;

// ∫₀^∞ g(t) dt through t = s/(1−s), which keeps the algebraic tails integrable.
template <class G>
double half_line(G&& g) {
    auto h = [&](double s) {
        if (s >= 1.0) return 0.0;
        const double t = s / (1.0 - s);
        return g(t) / ((1.0 - s) * (1.0 - s));
    };
    double err = 0.0;
    return gauss_kronrod<double, 61>::integrate(h, 0.0, 1.0, 20, 1e-14, &err);
}

ConstantsTable build() {
    ConstantsTable t{};
    const double pi = std::numbers::pi;
    t.c4 = 2.0 * std::numbers::sqrt2;
    t.omega3 = 2.0 * pi * pi;
    t.alpha4 = 1.0 / (2.0 * t.omega3);
    t.A = t.c4 / t.alpha4;
    t.I3 = radial_integral(3.0);
    t.I4 = radial_integral(4.0);
    t.sigma.setZero();
    for (int j = 0; j < 5; ++j) t.sigma(j, j) = sigma_entry(j, j);
    return t;
}

}  // namespace

const ConstantsTable& constants() {
    static const ConstantsTable table = build();
    return table;
}

double radial_integral(double p) {
    if (!(p > 2.0)) throw DomainError("radial_integral: integral diverges for p <= 2");
    const double omega3 = 2.0 * std::numbers::pi * std::numbers::pi;
    return omega3 / (2.0 * (p - 1.0) * (p - 2.0));
}

double radial_integral_quadrature(double p) {
    if (!(p > 2.0)) throw DomainError("radial_integral_quadrature: integral diverges for p <= 2");
    const double omega3 = 2.0 * std::numbers::pi * std::numbers::pi;
    return omega3 * half_line([p](double t) { return t * t * t * std::pow(1.0 + t * t, -p); });
}

double sigma_entry(int j, int k) {
    if (j < 0 || j > 4 || k < 0 || k > 4) throw DomainError("sigma_entry: indices must lie in 0..4");
    if (j != k) return 0.0;
    // Both ψ⁰ and ψ^j reduce to c4⁴ ω₃ ∫ t⁵ (1+t²)^{-6} dt ∙ 4 = 32π²/15 after the angular average.
    return 32.0 * std::numbers::pi * std::numbers::pi / 15.0;
}

double sigma_quadrature(int j, int k) {
    if (j < 0 || j > 4 || k < 0 || k > 4) throw DomainError("sigma_quadrature: indices must lie in 0..4");
    const double c4 = 2.0 * std::numbers::sqrt2;
    const SphereRule rule = sphere_rule(8);
    // integrand U² ψ^j ψ^k splits as radial(t) × angular(ω)
    auto angular = [&](int a, int b) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Point& w = rule.points[q];
            const double fa = a == 0 ? 1.0 : w(a - 1);
            const double fb = b == 0 ? 1.0 : w(b - 1);
            s += rule.weights[q] * fa * fb;
        }
        return s;
    };
    auto radial = [&](int a, int b) {
        return half_line([&](double t) {
            const double q = 1.0 + t * t;
            const double pa = a == 0 ? c4 * (t * t - 1.0) / (q * q) : 2.0 * c4 * t / (q * q);
            const double pb = b == 0 ? c4 * (t * t - 1.0) / (q * q) : 2.0 * c4 * t / (q * q);
            const double u = c4 / q;
            return t * t * t * u * u * pa * pb;
        });
    };
    return radial(j, k) * angular(j, k);
}

double bubble_cube_quadrature() {
    const double c4 = 2.0 * std::numbers::sqrt2;
    const SphereRule rule = sphere_rule(4);
    return half_line([&](double t) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Point y = t * rule.points[q];
            const double u = c4 / (1.0 + y.squaredNorm());
            s += rule.weights[q] * u * u * u;
        }
        return t * t * t * s;
    });
}

}  // namespace spikelab
