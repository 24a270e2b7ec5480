#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "monopole/errors.hpp"
#include "monopole/su2.hpp"

namespace monopole {

using Poly = std::vector<cplx>;  // ascending powers

/// Drops leading coefficients below rel * max|c|. The zero polynomial becomes {}.
inline Poly trim(Poly p, double rel = 0.0) {
    double m = 0.0;
    for (auto c : p) m = std::max(m, std::abs(c));
    while (!p.empty() && std::abs(p.back()) <= rel * m) p.pop_back();
    return p;
}

inline int degree(const Poly& p) { return static_cast<int>(trim(p).size()) - 1; }

inline cplx poly_eval(const Poly& p, cplx z) {
    cplx s(0.0);
    for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * z + *it;
    return s;
}

inline std::vector<cplx> poly_roots(const Poly& p_in) {
    const Poly p = trim(p_in);
    const int n = static_cast<int>(p.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) C(0, i) = -p[n - 1 - i] / p[n];
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return r;
}

/// Monic polynomial with the given roots.
inline Poly poly_from_roots(const std::vector<cplx>& roots) {
    Poly p{cplx(1.0)};
    for (auto r : roots) {
        Poly q(p.size() + 1, cplx(0.0));
        for (std::size_t i = 0; i < p.size(); ++i) {
            q[i + 1] += p[i];
            q[i] -= r * p[i];
        }
        p = q;
    }
    return p;
}

/// Resultant via the Sylvester determinant, with both inputs scaled to unit
/// max coefficient first.
inline double normalized_resultant(const Poly& a_in, const Poly& b_in) {
    Poly a = trim(a_in), b = trim(b_in);
    if (a.empty() || b.empty()) {
        // gcd(c, 0) is c: coprime only if the nonzero side is constant
        const Poly& o = a.empty() ? b : a;
        return o.size() == 1 ? 1.0 : 0.0;
    }
    auto scale = [](Poly& p) {
        double m = 0.0;
        for (auto c : p) m = std::max(m, std::abs(c));
        for (auto& c : p) c /= m;
    };
    scale(a);
    scale(b);
    const int m = static_cast<int>(a.size()) - 1, n = static_cast<int>(b.size()) - 1;
    if (m == 0 || n == 0) return 1.0;
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(m + n, m + n);
    for (int r = 0; r < n; ++r)
        for (int i = 0; i <= m; ++i) S(r, r + i) = a[m - i];
    for (int r = 0; r < m; ++r)
        for (int i = 0; i <= n; ++i) S(n + r, r + i) = b[n - i];
    return std::abs(S.determinant());
}

class RationalMap {
public:
    RationalMap() : p_{cplx(0.0)}, q_{cplx(1.0)} {}

    RationalMap(Poly p, Poly q, bool based = false, double coprime_tol = 1e-10)
        : p_(trim(std::move(p))), q_(trim(std::move(q))), based_(based) {
        if (p_.empty() && q_.empty()) throw ValidationError("degenerate-map", "p and q both vanish");
        if (normalized_resultant(p_, q_) <= coprime_tol)
            throw ValidationError("not-coprime", "p and q share a root");
        if (based_) {
            if (q_.empty() || std::abs(q_.back() - cplx(1.0)) > 1e-12)
                throw ValidationError("not-based", "q must be monic");
            if (!p_.empty() && p_.size() >= q_.size())
                throw ValidationError("not-based", "deg p must be below deg q");
        }
        if (p_.empty()) p_ = {cplx(0.0)};
        if (q_.empty()) q_ = {cplx(0.0)};
    }

    const Poly& p() const { return p_; }
    const Poly& q() const { return q_; }
    bool based() const { return based_; }

    int degree() const { return std::max(std::max(monopole::degree(p_), monopole::degree(q_)), 0); }

    ExtComplex operator()(cplx z) const { return ExtComplex::projective(poly_eval(p_, z), poly_eval(q_, z)); }

    std::vector<cplx> poles() const { return poly_roots(q_); }
    std::vector<cplx> zeros() const { return poly_roots(p_); }

private:
    Poly p_, q_;
    bool based_ = false;
};

/// Best G in GL(2) with mobius(G, a_n) ~ b_n (homogeneous least squares) and
/// the largest chordal distance left after applying it.
struct MobiusFit {
    Mat2 G;
    double residual;
};

inline MobiusFit fit_mobius(const std::vector<ExtComplex>& a, const std::vector<ExtComplex>& b) {
    if (a.size() != b.size() || a.size() < 3) throw ValidationError("insufficient-samples", "need >= 3 paired samples");
    Eigen::MatrixXcd M(a.size(), 4);
    for (std::size_t n = 0; n < a.size(); ++n) {
        const Vec2c ha = a[n].homogeneous(), hb = b[n].homogeneous();
        // (G ha)_0 hb_1 - (G ha)_1 hb_0 = 0
        M(n, 0) = ha[0] * hb[1];
        M(n, 1) = ha[1] * hb[1];
        M(n, 2) = -ha[0] * hb[0];
        M(n, 3) = -ha[1] * hb[0];
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    const Eigen::Vector4cd g = svd.matrixV().col(3);
    MobiusFit fit;
    fit.G << g[0], g[1], g[2], g[3];
    fit.residual = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
        fit.residual = std::max(fit.residual, chordal_distance(mobius(fit.G, a[n]), b[n]));
    return fit;
}

}  // namespace monopole
