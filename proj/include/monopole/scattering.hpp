#pragma once

// Hitchin's scattering equation ds/dt = (i Phi - u.A) s along oriented lines,
// decaying solutions, spectral lines and curves, and the Donaldson and Jarvis
// rational maps.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "monopole/errors.hpp"
#include "monopole/fields.hpp"
#include "monopole/minitwistor.hpp"
#include "monopole/ode.hpp"
#include "monopole/parallel.hpp"
#include "monopole/rational_map.hpp"

namespace monopole {

/// Parametrized path origin + t u.
struct Ray {
    Vec3 origin;
    Vec3 u;

    static Ray of(const OrientedLine& l) { return {l.v, l.u}; }
    Vec3 at(double t) const { return origin + t * u; }
};

struct ScatteringOptions {
    double t_max = 25.0;
    double regime_tol = 0.05;
    double min_gap_product = 20.0;
    OdeOptions ode{};
    int threads = 0;
};

enum class End { plus, minus };

namespace scattering_detail {

inline Mat2 hitchin_matrix(const FieldValue& f, const Vec3& u) {
    return kI * f.Phi.matrix() - (u[0] * f.A[0].matrix() + u[1] * f.A[1].matrix() + u[2] * f.A[2].matrix());
}

inline Vec2c to_vec(const RealState& x) { return Vec2c(cplx(x[0], x[1]), cplx(x[2], x[3])); }

inline RealState to_state(const Vec2c& s) { return {s[0].real(), s[0].imag(), s[1].real(), s[1].imag()}; }

inline auto system(const FieldConfiguration& cfg, const Ray& ray) {
    return [&cfg, ray](const RealState& x, RealState& dx, double t) {
        const Mat2 M = hitchin_matrix(cfg.eval(ray.at(t)), ray.u);
        const Vec2c d = M * to_vec(x);
        dx.resize(4);
        dx[0] = d[0].real();
        dx[1] = d[0].imag();
        dx[2] = d[1].real();
        dx[3] = d[1].imag();
    };
}

/// Unit vector with its larger component made real and positive.
inline Vec2c fix_phase(Vec2c v) {
    const int j = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
    if (std::abs(v[j]) > 0.0) v *= std::conj(v[j]) / std::abs(v[j]);
    return v / v.norm();
}

struct Seed {
    Vec2c vec;          // eigenvector of i Phi with the requested sign
    Vec2c other;        // the complementary eigenvector
    double gap = 0.0;   // eigenvalue separation
    double deviation = 0.0;
};

/// Eigen-decomposition of i Phi at ray.at(t). `negative` selects the
/// eigenvector whose eigenvalue is negative (decaying towards +infinity).
inline Seed asymptotic_seed(const FieldConfiguration& cfg, const Ray& ray, double t, bool negative,
                            const ScatteringOptions& opt) {
    const Su2Element phi = cfg.higgs(ray.at(t));
    Seed s;
    s.deviation = std::abs(norm(phi) - cfg.asymptotic_norm());
    if (s.deviation > opt.regime_tol)
        throw NumericError("asymptotic-regime-not-reached",
                           "|Phi| deviates from its limit by " + std::to_string(s.deviation) + " at t=" + std::to_string(t));
    Mat2 H = kI * phi.matrix();
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat2> es(H);
    s.gap = es.eigenvalues()[1] - es.eigenvalues()[0];
    if (s.gap * std::abs(t) <= opt.min_gap_product)
        throw NumericError("eigenvalue-gap-too-small", "gap * t_max = " + std::to_string(s.gap * std::abs(t)));
    const int idx = negative ? 0 : 1;
    s.vec = fix_phase(es.eigenvectors().col(idx));
    s.other = fix_phase(es.eigenvectors().col(1 - idx));
    return s;
}

}  // namespace scattering_detail

inline Vec2c integrate_hitchin(const FieldConfiguration& cfg, const Ray& ray, const Vec2c& s0, double t0, double t1,
                               const OdeOptions& opt = {}) {
    RealState x = scattering_detail::to_state(s0);
    integrate_to(scattering_detail::system(cfg, ray), x, t0, t1, opt);
    return scattering_detail::to_vec(x);
}

inline Vec2c integrate_hitchin(const FieldConfiguration& cfg, const OrientedLine& line, const Vec2c& s0, double t0,
                               double t1, const OdeOptions& opt = {}) {
    return integrate_hitchin(cfg, Ray::of(line), s0, t0, t1, opt);
}

/// Solution decaying towards the chosen end, at t = 0, unit length.
inline Vec2c decaying_solution(const FieldConfiguration& cfg, const Ray& ray, End end,
                               const ScatteringOptions& opt = {}) {
    const double t_end = end == End::plus ? opt.t_max : -opt.t_max;
    const auto seed = scattering_detail::asymptotic_seed(cfg, ray, t_end, end == End::plus, opt);
    const Vec2c s = integrate_hitchin(cfg, ray, seed.vec, t_end, 0.0, opt.ode);
    return s / s.norm();
}

inline Vec2c decaying_solution(const FieldConfiguration& cfg, const OrientedLine& line, End end,
                               const ScatteringOptions& opt = {}) {
    return decaying_solution(cfg, Ray::of(line), end, opt);
}

struct ScatteringSolution {
    OrientedLine line;
    double t_max = 0.0;
    Vec2c s_plus, s_minus;
    cplx det;
    struct {
        double gap_product_plus = 0.0, gap_product_minus = 0.0;
        double regime_deviation_plus = 0.0, regime_deviation_minus = 0.0;
    } cond;
};

inline ScatteringSolution scatter(const FieldConfiguration& cfg, const OrientedLine& line,
                                  const ScatteringOptions& opt = {}) {
    using namespace scattering_detail;
    const Ray ray = Ray::of(line);
    ScatteringSolution s;
    s.line = line;
    s.t_max = opt.t_max;
    const auto sp = asymptotic_seed(cfg, ray, opt.t_max, true, opt);
    const auto sm = asymptotic_seed(cfg, ray, -opt.t_max, false, opt);
    s.s_plus = integrate_hitchin(cfg, ray, sp.vec, opt.t_max, 0.0, opt.ode);
    s.s_minus = integrate_hitchin(cfg, ray, sm.vec, -opt.t_max, 0.0, opt.ode);
    s.s_plus /= s.s_plus.norm();
    s.s_minus /= s.s_minus.norm();
    s.det = s.s_plus[0] * s.s_minus[1] - s.s_plus[1] * s.s_minus[0];
    s.cond.gap_product_plus = sp.gap * opt.t_max;
    s.cond.gap_product_minus = sm.gap * opt.t_max;
    s.cond.regime_deviation_plus = sp.deviation;
    s.cond.regime_deviation_minus = sm.deviation;
    return s;
}

/// det[s_plus, s_minus] of the unit decaying solutions at t = 0; zero exactly
/// on spectral lines.
inline cplx spectral_determinant(const FieldConfiguration& cfg, const OrientedLine& line,
                                 const ScatteringOptions& opt = {}) {
    return scatter(cfg, line, opt).det;
}

// ---------------------------------------------------------------------------
// Locating spectral lines in a one-complex-parameter family

struct RootSearchOptions {
    cplx centre{0.0};
    double radius = 2.5;      // half-width of the coarse square
    int grid = 21;            // coarse samples per side
    int max_newton = 40;
    double residual_tol = 1e-8;
    double fd_step = 1e-6;
    double dedupe = 1e-5;
};

struct RootSearchResult {
    std::vector<cplx> roots;
    std::vector<double> residuals;
    bool complete = false;   // exactly the requested number found
    int evaluations = 0;
};

/// Zeros of w -> spectral_determinant(line_of(w)), by a coarse |det| scan
/// followed by Newton on the phase-fixed determinant viewed as a map R^2 -> R^2.
inline RootSearchResult find_spectral_zeros(const FieldConfiguration& cfg,
                                            const std::function<OrientedLine(cplx)>& line_of, int k,
                                            const RootSearchOptions& ro = {}, const ScatteringOptions& so = {}) {
    RootSearchResult out;
    const int n = std::max(ro.grid, 3);
    std::vector<cplx> pts(static_cast<std::size_t>(n) * n);
    std::vector<double> mag(pts.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pts[i * n + j] = ro.centre + cplx(-ro.radius + 2.0 * ro.radius * i / (n - 1),
                                              -ro.radius + 2.0 * ro.radius * j / (n - 1));
    parallel_for(pts.size(), [&](std::size_t m) { mag[m] = std::abs(scatter(cfg, line_of(pts[m]), so).det); },
                 so.threads);
    out.evaluations += static_cast<int>(pts.size());

    // local minima of the coarse map, best first
    std::vector<int> cand;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di || dj) && a >= 0 && a < n && b >= 0 && b < n && mag[a * n + b] < mag[i * n + j]) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) cand.push_back(i * n + j);
        }
    std::sort(cand.begin(), cand.end(), [&](int a, int b) { return mag[a] < mag[b]; });
    if (static_cast<int>(cand.size()) > 3 * std::max(k, 1)) cand.resize(3 * std::max(k, 1));

    for (int c : cand) {
        cplx w = pts[c];
        const auto s0 = scatter(cfg, line_of(w), so);
        const int jp = std::abs(s0.s_plus[0]) >= std::abs(s0.s_plus[1]) ? 0 : 1;
        const int jm = std::abs(s0.s_minus[0]) >= std::abs(s0.s_minus[1]) ? 0 : 1;
        auto F = [&](cplx x) {
            const auto s = scatter(cfg, line_of(x), so);
            ++out.evaluations;
            const cplx ph = (std::conj(s.s_plus[jp]) / std::abs(s.s_plus[jp])) *
                            (std::conj(s.s_minus[jm]) / std::abs(s.s_minus[jm]));
            return s.det * ph;
        };
        cplx f = F(w);
        for (int it = 0; it < ro.max_newton && std::abs(f) > 1e-3 * ro.residual_tol; ++it) {
            const double h = ro.fd_step;
            const cplx fx = (F(w + h) - F(w - h)) / (2.0 * h);
            const cplx fy = (F(w + cplx(0, h)) - F(w - cplx(0, h))) / (2.0 * h);
            Eigen::Matrix2d J;
            J << fx.real(), fy.real(), fx.imag(), fy.imag();
            const Eigen::Vector2d d = J.fullPivLu().solve(Eigen::Vector2d(-f.real(), -f.imag()));
            if (!d.allFinite()) break;
            cplx step(d[0], d[1]);
            double lam = 1.0;
            cplx wn = w + step, fn = F(wn);
            while (std::abs(fn) >= std::abs(f) && lam > 1e-3) {
                lam *= 0.5;
                wn = w + lam * step;
                fn = F(wn);
            }
            if (std::abs(fn) >= std::abs(f)) break;
            w = wn;
            f = fn;
            if (std::abs(w - ro.centre) > 3.0 * ro.radius) break;
            if (std::abs(lam * step) < 1e-14) break;
        }
        if (std::abs(f) >= ro.residual_tol) continue;
        bool dup = false;
        for (auto r : out.roots)
            if (std::abs(r - w) < ro.dedupe) dup = true;
        if (dup) continue;
        out.roots.push_back(w);
        out.residuals.push_back(std::abs(f));
        if (static_cast<int>(out.roots.size()) == k) break;
    }
    out.complete = static_cast<int>(out.roots.size()) == k;
    return out;
}

inline RootSearchResult find_spectral_etas(const FieldConfiguration& cfg, cplx zeta, int k,
                                           const RootSearchOptions& ro = {}, const ScatteringOptions& so = {}) {
    if (k < 1) throw ValidationError("bad-charge", "k must be >= 1");
    return find_spectral_zeros(
        cfg, [zeta](cplx eta) { return from_twistor({eta, zeta}); }, k, ro, so);
}

/// Deterministic, evenly spread points in the disk |zeta| <= max_radius
/// (Vogel spiral).
inline std::vector<cplx> disk_samples(int count, double max_radius = 0.9) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<cplx> z;
    for (int n = 0; n < count; ++n) z.push_back(std::polar(max_radius * std::sqrt((n + 0.5) / count), n * golden));
    return z;
}

inline CurveFit fit_spectral_curve(const FieldConfiguration& cfg, int k, const std::vector<cplx>& zetas,
                                   const RootSearchOptions& ro = {}, const ScatteringOptions& so = {}) {
    if (k < 1) throw ValidationError("bad-charge", "k must be >= 1");
    if (static_cast<int>(zetas.size()) < 3 * (2 * k + 1))
        throw ValidationError("insufficient-samples", "need at least 3(2k+1) zeta samples");
    std::vector<std::vector<cplx>> roots(zetas.size()), vals(zetas.size());
    ScatteringOptions inner = so;
    inner.threads = 1;
    parallel_for(
        zetas.size(),
        [&](std::size_t n) {
            const auto r = find_spectral_etas(cfg, zetas[n], k, ro, inner);
            if (!r.complete)
                throw NumericError("roots-not-found", "found " + std::to_string(r.roots.size()) + " of " +
                                                          std::to_string(k) + " roots at zeta sample " + std::to_string(n));
            roots[n] = r.roots;
            vals[n] = curve_coefficients(r.roots);
        },
        so.threads);
    CurveFit fit = fit_curve_values(k, zetas, vals);
    fit.roots = roots;
    return fit;
}

// ---------------------------------------------------------------------------
// Rational maps

/// Orthonormal frame; lines run along n3 with feet x n1 + y n2, z = x + i y.
struct SplittingFrame {
    Vec3 n1{1, 0, 0}, n2{0, 1, 0}, n3{0, 0, 1};
};

struct DonaldsonOptions {
    cplx centre{0.0};
    double half_width = 3.0;
    int grid = 17;
    double based_ratio = 1.0;  // boundary |a| must fall below this fraction of the inner ring
    ScatteringOptions scattering{};
};

struct DonaldsonResult {
    RationalMap map;
    SplittingFrame frame;
    std::vector<cplx> poles;
    std::vector<cplx> a_at_poles;
    std::vector<double> residuals;
    double inner_ring_a = 0.0;     // mean |a| on the ring of half the grid width
    double boundary_a = 0.0;       // mean |a| on the grid boundary
};

/// Coefficient a(z) of the +infinity-decaying solution along the decaying
/// direction at -t_max, scaled by the model-equation factors.
inline cplx donaldson_a(const FieldConfiguration& cfg, const OrientedLine& line, const ScatteringOptions& opt = {}) {
    using namespace scattering_detail;
    const Ray ray = Ray::of(line);
    const auto sp = asymptotic_seed(cfg, ray, opt.t_max, true, opt);
    const Vec2c s = integrate_hitchin(cfg, ray, sp.vec, opt.t_max, -opt.t_max, opt.ode);
    const auto sm = asymptotic_seed(cfg, ray, -opt.t_max, false, opt);
    // s = alpha w_dec + beta w_grow in the eigenbasis at -t_max
    Mat2 W;
    W.col(0) = sm.vec;
    W.col(1) = sm.other;
    const Vec2c c = W.partialPivLu().solve(s);
    return c[0] * std::pow(opt.t_max, cfg.charge());
}

inline DonaldsonResult donaldson_map(const FieldConfiguration& cfg, int k, const SplittingFrame& frame = {},
                                     const DonaldsonOptions& opt = {}) {
    if (k < 1) throw ValidationError("bad-charge", "k must be >= 1");
    const Eigen::Matrix3d Fm = (Eigen::Matrix3d() << frame.n1, frame.n2, frame.n3).finished();
    if ((Fm.transpose() * Fm - Eigen::Matrix3d::Identity()).norm() > 1e-10)
        throw ValidationError("bad-frame", "splitting frame must be orthonormal");
    auto line_of = [frame](cplx z) { return OrientedLine(frame.n3, z.real() * frame.n1 + z.imag() * frame.n2, 1e-10); };

    RootSearchOptions ro;
    ro.centre = opt.centre;
    ro.radius = opt.half_width;
    ro.grid = opt.grid;
    const auto found = find_spectral_zeros(cfg, line_of, k, ro, opt.scattering);
    if (!found.complete)
        throw NumericError("pole-count-mismatch",
                           "found " + std::to_string(found.roots.size()) + " spectral lines, expected " + std::to_string(k));

    DonaldsonResult res;
    res.frame = frame;
    res.poles = found.roots;
    res.residuals = found.residuals;
    for (auto b : res.poles) res.a_at_poles.push_back(donaldson_a(cfg, line_of(b), opt.scattering));

    // basedness: |a| on the boundary against a ring of half the width
    const int m = 16;
    std::vector<double> outer(m), inner(m);
    parallel_for(
        2 * m,
        [&](std::size_t j) {
            const double ang = 2.0 * std::numbers::pi * (j % m) / m;
            const double r = j < static_cast<std::size_t>(m) ? opt.half_width : 0.5 * opt.half_width;
            const double a = std::abs(donaldson_a(cfg, line_of(opt.centre + std::polar(r, ang)), opt.scattering));
            (j < static_cast<std::size_t>(m) ? outer : inner)[j % m] = a;
        },
        opt.scattering.threads);
    for (int j = 0; j < m; ++j) {
        res.boundary_a += outer[j] / m;
        res.inner_ring_a += inner[j] / m;
    }
    if (!(res.boundary_a < opt.based_ratio * res.inner_ring_a))
        throw NumericError("basedness-violated", "|a| on the boundary " + std::to_string(res.boundary_a) +
                                                     " vs inner ring " + std::to_string(res.inner_ring_a));

    // p interpolates a at the poles (Lagrange, degree < k)
    Poly p(k, cplx(0.0));
    for (int i = 0; i < k; ++i) {
        std::vector<cplx> others;
        cplx denom(1.0);
        for (int j = 0; j < k; ++j)
            if (j != i) {
                others.push_back(res.poles[j]);
                denom *= res.poles[i] - res.poles[j];
            }
        const Poly li = poly_from_roots(others);
        for (std::size_t c = 0; c < li.size(); ++c) p[c] += res.a_at_poles[i] * li[c] / denom;
    }
    res.map = RationalMap(p, poly_from_roots(res.poles), true);
    return res;
}

struct JarvisOptions {
    int max_extra_degree = 1;     // sweep degrees 0..k+max_extra_degree
    double threshold_per_sample = 1e-6;
    ScatteringOptions scattering{};
};

struct JarvisResult {
    Vec3 base;
    std::vector<cplx> zetas;
    std::vector<ExtComplex> samples;
    std::vector<double> residual_by_degree;
    int degree = -1;
    double residual = 0.0;
    RationalMap fit;
};

/// Sample of the Jarvis map at direction zeta: the forward-decaying solution
/// on the ray base + t u(zeta) at t = 0, as the point conj(s0 / s1).
inline ExtComplex jarvis_sample(const FieldConfiguration& cfg, const Vec3& base, cplx zeta,
                                const ScatteringOptions& opt = {}) {
    const Vec2c s = decaying_solution(cfg, Ray{base, direction_of(zeta)}, End::plus, opt);
    return ExtComplex::projective(std::conj(s[0]), std::conj(s[1]));
}

/// Homogeneous least-squares fit P(z) h1 = Q(z) h0 with deg P, deg Q <= d.
/// Returns the smallest singular value and the coefficients.
inline double fit_rational_degree(const std::vector<cplx>& zetas, const std::vector<ExtComplex>& samples, int d,
                                  Poly& P, Poly& Q) {
    const int N = static_cast<int>(zetas.size());
    Eigen::MatrixXcd M(N, 2 * (d + 1));
    for (int n = 0; n < N; ++n) {
        const Vec2c h = samples[n].homogeneous();
        double rn = 0.0;
        cplx pw(1.0);
        for (int j = 0; j <= d; ++j, pw *= zetas[n]) {
            M(n, j) = h[1] * pw;
            M(n, d + 1 + j) = -h[0] * pw;
            rn += std::norm(pw);
        }
        M.row(n) /= std::sqrt(rn);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    const Eigen::VectorXcd v = svd.matrixV().col(2 * (d + 1) - 1);
    P.assign(v.data(), v.data() + d + 1);
    Q.assign(v.data() + d + 1, v.data() + 2 * (d + 1));
    return svd.singularValues()[svd.singularValues().size() - 1];
}

inline JarvisResult jarvis_map(const FieldConfiguration& cfg, const Vec3& base, const std::vector<cplx>& zetas,
                               const JarvisOptions& opt = {}) {
    const int k = cfg.charge();
    JarvisResult res;
    res.base = base;
    res.zetas = zetas;
    res.samples.resize(zetas.size());
    ScatteringOptions so = opt.scattering;
    parallel_for(zetas.size(), [&](std::size_t n) { res.samples[n] = jarvis_sample(cfg, base, zetas[n], so); },
                 so.threads);
    const double thr = opt.threshold_per_sample * static_cast<double>(zetas.size());
    for (int d = 0; d <= k + opt.max_extra_degree; ++d) {
        if (static_cast<int>(zetas.size()) < 2 * (d + 1) + 1) break;
        Poly P, Q;
        const double r = fit_rational_degree(zetas, res.samples, d, P, Q);
        res.residual_by_degree.push_back(r);
        if (r < thr && res.degree < 0) {
            res.degree = d;
            res.residual = r;
            res.fit = RationalMap(trim(P, 1e-8), trim(Q, 1e-8));
        }
    }
    if (res.degree < 0) throw NumericError("degree-estimate-unstable", "no degree up to k+1 fits the samples");
    return res;
}

/// Largest chordal distance between two sampled maps after the best Mobius
/// correction; small values mean the maps agree up to a fractional linear map.
inline double mobius_equivalence_residual(const std::vector<ExtComplex>& a, const std::vector<ExtComplex>& b) {
    return fit_mobius(a, b).residual;
}

}  // namespace monopole
