#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "monopole/errors.hpp"

namespace monopole {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] by Golub-Welsch. Rules are cached.
inline const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw ValidationError("bad-quadrature-order", "order must be >= 1");
    static std::mutex mu;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // symmetrize so that the rule is exactly antisymmetric in its nodes
        rule.nodes[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = 2.0 * v0 * v0;
    }
    for (int i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return cache.emplace(n, std::move(rule)).first->second;
}

struct SpherePoint {
    Eigen::Vector3d n;  // unit normal
    double w;           // surface weight on the unit sphere
};

/// Product rule on the unit sphere: Gauss in cos(theta), uniform in azimuth.
inline std::vector<SpherePoint> sphere_grid(int n_theta, int n_phi) {
    const auto& gl = gauss_legendre(n_theta);
    std::vector<SpherePoint> pts;
    pts.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    const double dphi = 2.0 * std::numbers::pi / n_phi;
    for (int i = 0; i < n_theta; ++i) {
        const double ct = gl.nodes[i];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < n_phi; ++j) {
            const double ph = (j + 0.5) * dphi;
            pts.push_back({Eigen::Vector3d(st * std::cos(ph), st * std::sin(ph), ct), gl.weights[i] * dphi});
        }
    }
    return pts;
}

struct BallPoint {
    Eigen::Vector3d x;
    double w;
};

/// Ball of radius R about `centre`: radial Gauss with r^2 weight times a sphere grid.
inline std::vector<BallPoint> ball_grid(const Eigen::Vector3d& centre, double R, int n_r, int n_theta, int n_phi) {
    const auto& gl = gauss_legendre(n_r);
    const auto sph = sphere_grid(n_theta, n_phi);
    std::vector<BallPoint> pts;
    pts.reserve(sph.size() * n_r);
    for (int i = 0; i < n_r; ++i) {
        const double r = 0.5 * R * (gl.nodes[i] + 1.0);
        const double wr = 0.5 * R * gl.weights[i] * r * r;
        for (const auto& s : sph) pts.push_back({centre + r * s.n, wr * s.w});
    }
    return pts;
}

}  // namespace monopole
