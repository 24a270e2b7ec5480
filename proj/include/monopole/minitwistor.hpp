#pragma once

// Oriented lines in R^3 and their mini-twistor coordinates (eta, zeta).
//
//   zeta = (u1 + i u2) / (1 - u3)
//   eta  = (v1 + i v2) + 2 v3 zeta + (-v1 + i v2) zeta^2
//
// A spectral curve eta^k + a_1(zeta) eta^(k-1) + ... + a_k(zeta) = 0 is stored
// as the coefficient polynomials a_i, each of degree <= 2i in zeta.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "monopole/errors.hpp"
#include "monopole/rational_map.hpp"
#include "monopole/su2.hpp"

namespace monopole {

struct OrientedLine {
    Vec3 u;  // unit direction
    Vec3 v;  // foot point, orthogonal to u

    OrientedLine() : u(0, 0, -1), v(Vec3::Zero()) {}
    OrientedLine(const Vec3& dir, const Vec3& foot, double tol = 1e-12) : u(dir), v(foot) {
        if (std::abs(u.norm() - 1.0) > tol) throw ValidationError("bad-line", "direction must be a unit vector");
        if (std::abs(u.dot(v)) > tol * std::max(1.0, v.norm()))
            throw ValidationError("bad-line", "foot point must be orthogonal to the direction");
    }

    /// Line through x with direction d (normalized here).
    static OrientedLine through(const Vec3& x, const Vec3& d) {
        const Vec3 u = d.normalized();
        return OrientedLine(u, x - x.dot(u) * u, 1e-10);
    }

    Vec3 at(double t) const { return v + t * u; }
    OrientedLine reversed() const { return OrientedLine(-u, v, 1e-10); }
    double distance_to(const Vec3& x) const { return (x - v - (x - v).dot(u) * u).norm(); }
};

struct TwistorCoord {
    cplx eta;
    cplx zeta;
};

/// Unit direction with coordinate zeta (the inverse stereographic map).
inline Vec3 direction_of(cplx zeta) {
    const double m = std::norm(zeta);
    return Vec3(2.0 * zeta.real() / (1.0 + m), 2.0 * zeta.imag() / (1.0 + m), (m - 1.0) / (m + 1.0));
}

/// Stereographic coordinate of a direction; throws for u = (0,0,1).
inline cplx zeta_of(const Vec3& u) {
    const double d = 1.0 - u[2];
    if (d <= 1e-14) throw ValidationError("chart-excluded", "direction (0,0,1) lies outside the zeta chart");
    return cplx(u[0], u[1]) / d;
}

inline cplx eta_of_point(const Vec3& x, cplx zeta) {
    return cplx(x[0], x[1]) + 2.0 * x[2] * zeta + cplx(-x[0], x[1]) * zeta * zeta;
}

inline TwistorCoord to_twistor(const OrientedLine& line) {
    const cplx z = zeta_of(line.u);
    return {eta_of_point(line.v, z), z};
}

inline OrientedLine from_twistor(const TwistorCoord& t) {
    const Vec3 u = direction_of(t.zeta);
    const cplx z = t.zeta, z2 = z * z;
    // eta is real-linear in v: eta = v1 (1 - z^2) + v2 i (1 + z^2) + v3 2 z
    const cplx c1 = 1.0 - z2, c2 = kI * (1.0 + z2), c3 = 2.0 * z;
    Eigen::Matrix3d M;
    M << c1.real(), c2.real(), c3.real(),
         c1.imag(), c2.imag(), c3.imag(),
         u[0], u[1], u[2];
    const Vec3 v = M.partialPivLu().solve(Vec3(t.eta.real(), t.eta.imag(), 0.0));
    OrientedLine line;
    line.u = u;
    line.v = v - v.dot(u) * u;
    return line;
}

/// tau(eta, zeta) = (-conj(eta)/conj(zeta)^2, -1/conj(zeta)): orientation reversal.
inline TwistorCoord real_structure(const TwistorCoord& t) {
    if (t.zeta == cplx(0.0)) throw ValidationError("pole-at-zero", "real structure undefined at zeta = 0 in this chart");
    const cplx zb = std::conj(t.zeta);
    return {-std::conj(t.eta) / (zb * zb), -1.0 / zb};
}

inline OrientedLine average_lines(const std::vector<OrientedLine>& lines) {
    if (lines.empty()) throw ValidationError("empty-input", "no lines to average");
    Vec3 s = Vec3::Zero();
    for (const auto& l : lines) {
        if ((l.u - lines.front().u).norm() > 1e-10)
            throw ValidationError("direction-mismatch", "lines to average must share a direction");
        s += l.v;
    }
    OrientedLine out;
    out.u = lines.front().u;
    out.v = s / static_cast<double>(lines.size());
    return out;
}

/// SU(2) lift acting on zeta: zeta(R u) = mobius(G, zeta(u)) for the rotation
/// by `angle` about `axis`.
inline Mat2 rotation_mobius(const Vec3& axis, double angle) {
    const Vec3 n = axis.normalized();
    const auto s = pauli::all();
    const Mat2 ns = n[0] * s[0] + n[1] * s[1] + n[2] * s[2];
    const Mat2 g = std::cos(0.5 * angle) * Mat2::Identity() - kI * std::sin(0.5 * angle) * ns;
    return g.conjugate();
}

inline Mat2 rotation_mobius(const Eigen::Matrix3d& R) {
    const Eigen::AngleAxisd aa(R);
    return rotation_mobius(aa.axis(), aa.angle());
}

// ---------------------------------------------------------------------------
// Spectral curve polynomials

class SpectralCurvePoly {
public:
    SpectralCurvePoly() = default;

    /// a[i-1] holds the ascending coefficients of a_i; missing high-order
    /// coefficients are zero-filled.
    SpectralCurvePoly(int k, std::vector<std::vector<cplx>> a) : k_(k), a_(std::move(a)) {
        if (k < 0) throw ValidationError("bad-charge", "charge must be >= 0");
        if (static_cast<int>(a_.size()) != k) throw ValidationError("shape-mismatch", "need exactly k coefficient polynomials");
        for (int i = 1; i <= k; ++i) {
            auto& c = a_[i - 1];
            if (static_cast<int>(c.size()) > 2 * i + 1) {
                for (std::size_t m = 2 * i + 1; m < c.size(); ++m)
                    if (c[m] != cplx(0.0)) throw ValidationError("degree-bound", "deg a_i must be <= 2i");
            }
            c.resize(2 * i + 1, cplx(0.0));
        }
    }

    static SpectralCurvePoly zero(int k) {
        std::vector<std::vector<cplx>> a;
        for (int i = 1; i <= k; ++i) a.emplace_back(2 * i + 1, cplx(0.0));
        return SpectralCurvePoly(k, a);
    }

    /// The charge-one curve eta = eta_of_point(p, zeta) of lines through p.
    static SpectralCurvePoly point(const Vec3& p) {
        return SpectralCurvePoly(1, {{-cplx(p[0], p[1]), -2.0 * p[2], -cplx(-p[0], p[1])}});
    }

    int k() const { return k_; }
    const std::vector<cplx>& coeffs(int i) const { return a_.at(i - 1); }
    std::vector<cplx>& coeffs(int i) { return a_.at(i - 1); }

    cplx coefficient(int i, cplx zeta) const {
        const auto& c = coeffs(i);
        cplx s(0.0);
        for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * zeta + *it;
        return s;
    }

    /// eta^k + a_1 eta^(k-1) + ... + a_k.
    cplx evaluate(cplx eta, cplx zeta) const {
        cplx s(1.0);
        for (int i = 1; i <= k_; ++i) s = s * eta + coefficient(i, zeta);
        return s;
    }

    /// Roots in eta at fixed zeta.
    std::vector<cplx> eta_roots(cplx zeta) const {
        if (k_ == 0) return {};
        Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(k_, k_);
        for (int i = 1; i <= k_; ++i) C(0, i - 1) = -coefficient(i, zeta);
        for (int i = 1; i < k_; ++i) C(i, i - 1) = 1.0;
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
        std::vector<cplx> r(k_);
        for (int i = 0; i < k_; ++i) r[i] = es.eigenvalues()[i];
        return r;
    }

private:
    int k_ = 0;
    std::vector<std::vector<cplx>> a_;
};

/// Union of two curves: product of their defining polynomials in eta.
inline SpectralCurvePoly curve_product(const SpectralCurvePoly& p, const SpectralCurvePoly& q) {
    const int k = p.k() + q.k();
    auto coeff = [](const SpectralCurvePoly& c, int i) {
        return i == 0 ? std::vector<cplx>{cplx(1.0)} : c.coeffs(i);
    };
    std::vector<std::vector<cplx>> a(k);
    for (int i = 1; i <= k; ++i) {
        std::vector<cplx> s(2 * i + 1, cplx(0.0));
        for (int j = std::max(0, i - q.k()); j <= std::min(i, p.k()); ++j) {
            const auto x = coeff(p, j), y = coeff(q, i - j);
            for (std::size_t m = 0; m < x.size(); ++m)
                for (std::size_t n = 0; n < y.size(); ++n) s[m + n] += x[m] * y[n];
        }
        a[i - 1] = s;
    }
    return SpectralCurvePoly(k, a);
}

/// Max deviation of the coefficients from the tau-invariance condition
/// c_m = (-1)^(i+m) conj(c_(2i-m)) for each a_i.
inline double reality_defect(const SpectralCurvePoly& poly) {
    double d = 0.0;
    for (int i = 1; i <= poly.k(); ++i) {
        const auto& c = poly.coeffs(i);
        for (int m = 0; m <= 2 * i; ++m) {
            const double sgn = ((i + m) % 2 == 0) ? 1.0 : -1.0;
            d = std::max(d, std::abs(c[m] - sgn * std::conj(c[2 * i - m])));
        }
    }
    return d;
}

/// Point read off -a_1/k through the incidence pattern.
inline Vec3 centre_of(const SpectralCurvePoly& poly, double tol = 1e-3) {
    if (poly.k() < 1) throw ValidationError("bad-charge", "centre needs k >= 1");
    if (reality_defect(poly) > tol) throw ValidationError("not-real", "curve fails the reality condition");
    const auto& a = poly.coeffs(1);
    const cplx c0 = -a[0] / double(poly.k()), c1 = -a[1] / double(poly.k()), c2 = -a[2] / double(poly.k());
    return Vec3(0.5 * (c0 - c2).real(), 0.5 * (c0 + c2).imag(), 0.5 * c1.real());
}

// ---------------------------------------------------------------------------
// Fitting curves from sampled coefficient values

struct CurveFit {
    SpectralCurvePoly poly;
    double residual = 0.0;
    std::vector<cplx> zetas;
    std::vector<std::vector<cplx>> roots;
};

/// Least-squares fit of a_i(zeta) of degree <= 2i from sampled values a_i(zeta_n).
inline CurveFit fit_curve_values(int k, const std::vector<cplx>& zetas,
                                 const std::vector<std::vector<cplx>>& values /* [n][i-1] */) {
    CurveFit fit;
    fit.zetas = zetas;
    std::vector<std::vector<cplx>> a(k);
    const int N = static_cast<int>(zetas.size());
    for (int i = 1; i <= k; ++i) {
        Eigen::MatrixXcd V(N, 2 * i + 1);
        Eigen::VectorXcd y(N);
        for (int n = 0; n < N; ++n) {
            cplx pw(1.0);
            for (int m = 0; m <= 2 * i; ++m, pw *= zetas[n]) V(n, m) = pw;
            y[n] = values[n][i - 1];
        }
        const Eigen::VectorXcd c = V.colPivHouseholderQr().solve(y);
        fit.residual = std::max(fit.residual, (V * c - y).cwiseAbs().maxCoeff());
        a[i - 1].assign(c.data(), c.data() + c.size());
    }
    fit.poly = SpectralCurvePoly(k, a);
    return fit;
}

/// Coefficients a_1..a_k of prod (eta - eta_j).
inline std::vector<cplx> curve_coefficients(const std::vector<cplx>& roots) {
    const Poly p = poly_from_roots(roots);  // ascending, monic
    const int k = static_cast<int>(roots.size());
    std::vector<cplx> a(k);
    for (int i = 1; i <= k; ++i) a[i - 1] = p[k - i];
    return a;
}

}  // namespace monopole
