#include "spikelab/geometry.hpp"
#include "spikelab/rules.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spikelab {

namespace {
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
}

double halton(std::uint64_t index, int dim) {
    if (dim < 0 || dim >= 8) throw std::out_of_range("halton: dimension must be in [0, 8)");
    const std::uint64_t base = static_cast<std::uint64_t>(kPrimes[dim]);
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

std::vector<Point> sphere_points(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double shift[3] = {unif(rng), unif(rng), unif(rng)};
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w[3];
        for (int d = 0; d < 3; ++d) {
            w[d] = halton(i + 1, d) + shift[d];
            w[d] -= std::floor(w[d]);
        }
        const double s = std::sqrt(w[0]), c = std::sqrt(1.0 - w[0]);
        const double p1 = two_pi * w[1], p2 = two_pi * w[2];
        pts.emplace_back(c * std::cos(p1), c * std::sin(p1), s * std::cos(p2), s * std::sin(p2));
    }
    return pts;
}

Matrix4 random_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix4 g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix4> qr(g);
    Matrix4 q = qr.householderQ();
    Matrix4 r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 4; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule g;
    // boost returns the non-negative zeros in increasing order
    const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
    auto weight = [n](double x) {
        const double dp = boost::math::legendre_p_prime(n, x);
        return 2.0 / ((1.0 - x * x) * dp * dp);
    };
    for (auto z = zeros.rbegin(); z != zeros.rend(); ++z) {
        if (*z == 0.0) continue;
        g.nodes.push_back(-*z);
        g.weights.push_back(weight(*z));
    }
    if (n % 2 == 1) {
        g.nodes.push_back(0.0);
        g.weights.push_back(weight(0.0));
    }
    for (double z : zeros) {
        if (z == 0.0) continue;
        g.nodes.push_back(z);
        g.weights.push_back(weight(z));
    }
    return cache.emplace(n, std::move(g)).first->second;
}

SphereRule sphere_rule(int n_u, int n_phi) {
    SphereRule rule;
    const GaussRule& g = gauss_legendre(n_u);
    const double two_pi = 2.0 * std::numbers::pi;
    const double dphi = two_pi / n_phi;
    for (int a = 0; a < n_u; ++a) {
        const double u = 0.5 * (g.nodes[a] + 1.0);
        const double wu = 0.5 * g.weights[a];
        const double s = std::sqrt(u), c = std::sqrt(1.0 - u);
        for (int i = 0; i < n_phi; ++i) {
            // half-step offset keeps nodes off the coordinate planes
            const double p1 = (i + 0.5) * dphi;
            for (int j = 0; j < n_phi; ++j) {
                const double p2 = (j + 0.5) * dphi;
                rule.points.emplace_back(c * std::cos(p1), c * std::sin(p1), s * std::cos(p2), s * std::sin(p2));
                rule.weights.push_back(0.5 * wu * dphi * dphi);
            }
        }
    }
    rule.degree = std::min(n_phi - 1, 4 * n_u - 2);
    return rule;
}

SphereRule sphere_rule(int degree) {
    if (degree < 0) throw std::invalid_argument("sphere_rule: negative degree");
    const int n_phi = degree + 1;
    const int n_u = std::max(1, (degree + 2 + 3) / 4);
    SphereRule r = sphere_rule(n_u, n_phi);
    r.degree = degree;
    return r;
}

SphereRule rotated(const SphereRule& rule, const Matrix4& rotation) {
    SphereRule out = rule;
    for (auto& p : out.points) p = rotation * p;
    return out;
}

}  // namespace spikelab
