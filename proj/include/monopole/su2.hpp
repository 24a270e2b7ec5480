#pragma once

// su(2) and SU(2) as explicit 2x2 complex matrices.
//
// Conventions used throughout the library:
//   basis        e^a = -(i/2) * Pauli_a, so [e^a, e^b] = eps_abc e^c
//   inner        <A,B> = -2 tr(AB), making e^a orthonormal
//   framing      Phi_inf = diag(i,-i)/2, unit norm
// Under these conventions the hedgehog BPS formula is an exact solution of
// F = *d_A Phi with |Phi| = coth r - 1/r.

#include <array>
#include <cmath>
#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "monopole/errors.hpp"

namespace monopole {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;
using Vec3 = Eigen::Vector3d;

inline constexpr cplx kI{0.0, 1.0};

namespace pauli {
inline Mat2 x() { Mat2 m; m << 0, 1, 1, 0; return m; }
inline Mat2 y() { Mat2 m; m << 0, -kI, kI, 0; return m; }
inline Mat2 z() { Mat2 m; m << 1, 0, 0, -1; return m; }
inline std::array<Mat2, 3> all() { return {x(), y(), z()}; }
}  // namespace pauli

/// Element of su(2): skew-hermitian, traceless 2x2 matrix.
class Su2Element {
public:
    Su2Element() : m_(Mat2::Zero()) {}

    /// Wraps `m` without projecting. Use `is_valid` to check the invariants,
    /// or `project` when `m` is only approximately in su(2).
    explicit Su2Element(const Mat2& m) : m_(m) {}

    /// Anti-hermitian traceless part of an arbitrary matrix.
    static Su2Element project(const Mat2& m) {
        Mat2 a = 0.5 * (m - m.adjoint());
        a -= (a.trace() / 2.0) * Mat2::Identity();
        return Su2Element(a);
    }

    /// sum_a c_a e^a in the library basis.
    static Su2Element from_components(const Vec3& c);

    const Mat2& matrix() const { return m_; }

    /// Components in the orthonormal basis e^a.
    Vec3 components() const;

    bool is_valid(double tol = 1e-12) const {
        return (m_ + m_.adjoint()).cwiseAbs().maxCoeff() < tol && std::abs(m_.trace()) < tol;
    }

    Su2Element& operator+=(const Su2Element& o) { m_ += o.m_; return *this; }
    Su2Element& operator-=(const Su2Element& o) { m_ -= o.m_; return *this; }
    Su2Element& operator*=(double s) { m_ *= s; return *this; }

    friend Su2Element operator+(Su2Element a, const Su2Element& b) { return a += b; }
    friend Su2Element operator-(Su2Element a, const Su2Element& b) { return a -= b; }
    friend Su2Element operator-(const Su2Element& a) { return Su2Element(-a.m_); }
    friend Su2Element operator*(double s, Su2Element a) { return a *= s; }
    friend Su2Element operator*(Su2Element a, double s) { return a *= s; }

private:
    Mat2 m_;
};

/// Element of SU(2): unitary with unit determinant.
class Su2Group {
public:
    Su2Group() : g_(Mat2::Identity()) {}
    explicit Su2Group(const Mat2& g) : g_(g) {}

    static Su2Group identity() { return Su2Group(); }

    const Mat2& matrix() const { return g_; }
    Su2Group inverse() const { return Su2Group(g_.adjoint()); }

    bool is_valid(double tol = 1e-12) const {
        return (g_ * g_.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff() < tol &&
               std::abs(g_.determinant() - 1.0) < tol;
    }

    /// Adjoint action g a g^-1.
    Su2Element conjugate(const Su2Element& a) const {
        return Su2Element(g_ * a.matrix() * g_.adjoint());
    }

    friend Su2Group operator*(const Su2Group& a, const Su2Group& b) {
        return Su2Group(a.g_ * b.g_);
    }

private:
    Mat2 g_;
};

namespace basis {
inline Su2Element e(int a) { return Su2Element(cplx(0.0, -0.5) * pauli::all()[a]); }
inline Su2Element e1() { return e(0); }
inline Su2Element e2() { return e(1); }
inline Su2Element e3() { return e(2); }
inline std::array<Su2Element, 3> all() { return {e(0), e(1), e(2)}; }
/// Framing value of the Higgs field at infinity along +x3.
inline Su2Element framing() {
    Mat2 m = Mat2::Zero();
    m(0, 0) = kI * 0.5;
    m(1, 1) = -kI * 0.5;
    return Su2Element(m);
}
}  // namespace basis

inline Su2Element Su2Element::from_components(const Vec3& c) {
    Mat2 m = Mat2::Zero();
    const auto s = pauli::all();
    for (int a = 0; a < 3; ++a) m += c[a] * s[a];
    return Su2Element(cplx(0.0, -0.5) * m);
}

inline Vec3 Su2Element::components() const {
    // e^a = -(i/2) s_a  =>  c_a = <m, e^a> = -2 tr(m e^a) = i tr(m s_a)
    const auto s = pauli::all();
    Vec3 c;
    for (int a = 0; a < 3; ++a) c[a] = (kI * (m_ * s[a]).trace()).real();
    return c;
}

inline double inner(const Su2Element& a, const Su2Element& b) {
    return -2.0 * (a.matrix() * b.matrix()).trace().real();
}

inline double norm(const Su2Element& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

inline Su2Element bracket(const Su2Element& a, const Su2Element& b) {
    return Su2Element(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

/// Exponential of an su(2) element, in closed form:
/// for a = theta * n.e with |n| = 1, exp(a) = cos(theta/2) I + (2/theta) sin(theta/2) a.
inline Su2Group exp(const Su2Element& a) {
    const double theta = norm(a);
    double c = std::cos(0.5 * theta);
    double s = theta < 1e-8 ? 1.0 - theta * theta / 24.0 : 2.0 * std::sin(0.5 * theta) / theta;
    return Su2Group(c * Mat2::Identity() + s * a.matrix());
}

/// Point of the Riemann sphere: a finite complex number or infinity.
class ExtComplex {
public:
    ExtComplex() = default;
    ExtComplex(cplx z) : z_(z) {}  // NOLINT: implicit from finite values is convenient
    static ExtComplex infinity() { ExtComplex e; e.inf_ = true; return e; }

    /// From homogeneous coordinates [num : den]; both zero is a caller error.
    static ExtComplex projective(cplx num, cplx den) {
        if (den == cplx(0.0)) return infinity();
        return ExtComplex(num / den);
    }

    bool is_infinite() const { return inf_; }
    cplx value() const { return z_; }

    /// Homogeneous coordinates normalized to unit length.
    Vec2c homogeneous() const {
        if (inf_) return Vec2c(1.0, 0.0);
        Vec2c h(z_, 1.0);
        return h / h.norm();
    }

private:
    cplx z_{0.0};
    bool inf_ = false;
};

/// Chordal distance on the Riemann sphere (diameter 2).
inline double chordal_distance(const ExtComplex& a, const ExtComplex& b) {
    const Vec2c ha = a.homogeneous();
    const Vec2c hb = b.homogeneous();
    return 2.0 * std::abs(ha[0] * hb[1] - ha[1] * hb[0]);
}

/// Fractional linear action zeta -> (g11 zeta + g12)/(g21 zeta + g22).
inline ExtComplex mobius(const Mat2& g, const ExtComplex& z) {
    if (z.is_infinite()) return ExtComplex::projective(g(0, 0), g(1, 0));
    const cplx w = z.value();
    return ExtComplex::projective(g(0, 0) * w + g(0, 1), g(1, 0) * w + g(1, 1));
}

inline ExtComplex mobius(const Su2Group& g, const ExtComplex& z) { return mobius(g.matrix(), z); }

}  // namespace monopole
