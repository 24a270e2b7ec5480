#pragma once

// Field configurations (A, Phi) on R^3 and the differential operators acting
// on them. Derivatives come from an analytic jet when one is attached, and
// from second-order central differences otherwise.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "monopole/errors.hpp"
#include "monopole/quadrature.hpp"
#include "monopole/su2.hpp"

namespace monopole {

using Vec3Array = std::array<Su2Element, 3>;

struct FieldValue {
    Vec3Array A;
    Su2Element Phi;
};

/// Value plus first derivatives. dA[i][j] = d_i A_j, dPhi[i] = d_i Phi.
struct FieldJet {
    FieldValue value;
    std::array<Vec3Array, 3> dA;
    Vec3Array dPhi;
};

inline constexpr double kMinStep = 1e-8;
inline constexpr double kDefaultStep = 1e-4;

inline void check_step(double h) {
    if (!(h >= kMinStep)) throw ValidationError("step-too-small", "finite-difference step below 1e-8");
}

class FieldConfiguration {
public:
    using ValueFn = std::function<FieldValue(const Vec3&)>;
    using JetFn = std::function<FieldJet(const Vec3&)>;

    FieldConfiguration(ValueFn value, int charge, double asymptotic_norm = 1.0, JetFn jet = {})
        : value_(std::move(value)), jet_(std::move(jet)), charge_(charge), asym_(asymptotic_norm) {
        if (charge < 0) throw ValidationError("bad-charge", "charge must be >= 0");
    }

    FieldValue eval(const Vec3& x) const { return value_(x); }
    Su2Element higgs(const Vec3& x) const { return value_(x).Phi; }

    bool has_analytic_derivatives() const { return static_cast<bool>(jet_); }

    /// Jet at x: analytic when available, else central differences of step h.
    FieldJet jet(const Vec3& x, double h = kDefaultStep) const {
        if (jet_) return jet_(x);
        check_step(h);
        FieldJet out;
        out.value = value_(x);
        for (int i = 0; i < 3; ++i) {
            Vec3 xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const FieldValue vp = value_(xp);
            const FieldValue vm = value_(xm);
            const double s = 0.5 / h;
            for (int j = 0; j < 3; ++j) out.dA[i][j] = s * (vp.A[j] - vm.A[j]);
            out.dPhi[i] = s * (vp.Phi - vm.Phi);
        }
        return out;
    }

    int charge() const { return charge_; }
    /// Limit of |Phi| at infinity; the scattering asymptotics compare against it.
    double asymptotic_norm() const { return asym_; }

    const ValueFn& value_fn() const { return value_; }
    const JetFn& jet_fn() const { return jet_; }

    /// Same fields with the analytic jet dropped, forcing finite differences.
    FieldConfiguration without_derivatives() const { return FieldConfiguration(value_, charge_, asym_); }

private:
    ValueFn value_;
    JetFn jet_;
    int charge_;
    double asym_;
};

/// Components (F23, F31, F12) from a jet.
inline Vec3Array curvature_from_jet(const FieldJet& j) {
    Vec3Array F;
    constexpr int P[3][2] = {{1, 2}, {2, 0}, {0, 1}};
    for (int c = 0; c < 3; ++c) {
        const int a = P[c][0], b = P[c][1];
        F[c] = j.dA[a][b] - j.dA[b][a] + bracket(j.value.A[a], j.value.A[b]);
    }
    return F;
}

inline Vec3Array cov_deriv_from_jet(const FieldJet& j) {
    Vec3Array D;
    for (int i = 0; i < 3; ++i) D[i] = j.dPhi[i] + bracket(j.value.A[i], j.value.Phi);
    return D;
}

inline Vec3Array curvature(const FieldConfiguration& cfg, const Vec3& x, double h = kDefaultStep) {
    check_step(h);
    return curvature_from_jet(cfg.jet(x, h));
}

inline Vec3Array cov_deriv_higgs(const FieldConfiguration& cfg, const Vec3& x, double h = kDefaultStep) {
    check_step(h);
    return cov_deriv_from_jet(cfg.jet(x, h));
}

inline double bogomolny_residual_from_jet(const FieldJet& j) {
    const Vec3Array F = curvature_from_jet(j);
    const Vec3Array D = cov_deriv_from_jet(j);
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r = std::max(r, norm(F[i] - D[i]));
    return r;
}

inline double bogomolny_residual(const FieldConfiguration& cfg, const Vec3& x, double h = kDefaultStep) {
    check_step(h);
    return bogomolny_residual_from_jet(cfg.jet(x, h));
}

/// printed: (1/2)|F|^2 + (1/4) sum <D_i Phi, D_i Phi>, the literal density.
/// laplacian: |F|^2 + sum <D_i Phi, D_i Phi>, equal to Lap<Phi,Phi> on solutions.
enum class EnergyNormalization { printed, laplacian };

inline double energy_density(const FieldConfiguration& cfg, const Vec3& x, double h = kDefaultStep,
                             EnergyNormalization norm_kind = EnergyNormalization::printed) {
    check_step(h);
    const FieldJet j = cfg.jet(x, h);
    const Vec3Array F = curvature_from_jet(j);
    const Vec3Array D = cov_deriv_from_jet(j);
    double f2 = 0.0, d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        f2 += inner(F[i], F[i]);
        d2 += inner(D[i], D[i]);
    }
    if (norm_kind == EnergyNormalization::printed) return 0.5 * f2 + 0.25 * d2;
    return f2 + d2;
}

/// Second central differences of <Phi, Phi>.
inline double energy_density_laplacian(const FieldConfiguration& cfg, const Vec3& x, double h = 1e-3) {
    check_step(h);
    auto q = [&](const Vec3& y) {
        const Su2Element p = cfg.higgs(y);
        return inner(p, p);
    };
    const double q0 = q(x);
    double lap = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vec3 xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        lap += q(xp) - 2.0 * q0 + q(xm);
    }
    return lap / (h * h);
}

// ---------------------------------------------------------------------------
// Gauge transformations

struct GaugeJet {
    Mat2 g;
    std::array<Mat2, 3> dg;                  // d_i g
    std::array<std::array<Mat2, 3>, 3> d2g;  // d_i d_j g
};

class GaugeTransform {
public:
    using ValueFn = std::function<Mat2(const Vec3&)>;
    using JetFn = std::function<GaugeJet(const Vec3&)>;

    GaugeTransform(ValueFn g, JetFn jet = {}) : g_(std::move(g)), jet_(std::move(jet)) {}

    static GaugeTransform identity() { return constant(Su2Group::identity()); }

    static GaugeTransform constant(const Su2Group& g) {
        const Mat2 m = g.matrix();
        return GaugeTransform([m](const Vec3&) { return m; },
                              [m](const Vec3&) {
                                  GaugeJet j;
                                  j.g = m;
                                  for (auto& d : j.dg) d = Mat2::Zero();
                                  for (auto& r : j.d2g)
                                      for (auto& d : r) d = Mat2::Zero();
                                  return j;
                              });
    }

    /// g(x) = exp(f(x) X) with f(x) = amplitude * exp(-|x - centre|^2 / width^2)
    /// and X a fixed su(2) direction. Tends to the identity at infinity.
    static GaugeTransform bump(const Su2Element& X, const Vec3& centre, double amplitude, double width) {
        const Mat2 Xm = X.matrix();
        // exp(f X) = cos(f|X|/2) I + (2/|X|) sin(f|X|/2) X for X in su(2)
        const double nx = norm(X);
        auto eval = [=](const Vec3& x, double& f, Vec3& df, Eigen::Matrix3d& ddf) {
            const Vec3 y = x - centre;
            const double w2 = width * width;
            f = amplitude * std::exp(-y.squaredNorm() / w2);
            df = (-2.0 / w2) * f * y;
            ddf = (-2.0 / w2) * f * Eigen::Matrix3d::Identity() + (4.0 / (w2 * w2)) * f * y * y.transpose();
        };
        auto gexp = [=](double f) {
            if (nx == 0.0) return Mat2(Mat2::Identity());
            return Mat2(std::cos(0.5 * f * nx) * Mat2::Identity() + (2.0 / nx) * std::sin(0.5 * f * nx) * Xm);
        };
        return GaugeTransform(
            [=](const Vec3& x) {
                double f;
                Vec3 df;
                Eigen::Matrix3d ddf;
                eval(x, f, df, ddf);
                return gexp(f);
            },
            [=](const Vec3& x) {
                double f;
                Vec3 df;
                Eigen::Matrix3d ddf;
                eval(x, f, df, ddf);
                GaugeJet j;
                j.g = gexp(f);
                const Mat2 gX = j.g * Xm;
                const Mat2 gXX = gX * Xm;
                for (int i = 0; i < 3; ++i) {
                    j.dg[i] = df[i] * gX;
                    for (int k = 0; k < 3; ++k) j.d2g[i][k] = ddf(i, k) * gX + df[i] * df[k] * gXX;
                }
                return j;
            });
    }

    Mat2 operator()(const Vec3& x) const { return g_(x); }
    bool has_analytic_derivatives() const { return static_cast<bool>(jet_); }

    /// Jet with first derivatives by central differences if none is attached.
    /// Second derivatives are only meaningful for analytic jets.
    GaugeJet jet(const Vec3& x, double h = 1e-5) const {
        if (jet_) return jet_(x);
        GaugeJet j;
        j.g = g_(x);
        for (int i = 0; i < 3; ++i) {
            Vec3 xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            j.dg[i] = (g_(xp) - g_(xm)) / (2.0 * h);
            for (auto& d : j.d2g[i]) d = Mat2::Zero();
        }
        return j;
    }

    /// Pointwise product (this * other).
    GaugeTransform compose(const GaugeTransform& other) const {
        const GaugeTransform a = *this, b = other;
        JetFn jet;
        if (a.has_analytic_derivatives() && b.has_analytic_derivatives()) {
            jet = [a, b](const Vec3& x) {
                const GaugeJet ja = a.jet(x), jb = b.jet(x);
                GaugeJet j;
                j.g = ja.g * jb.g;
                for (int i = 0; i < 3; ++i) {
                    j.dg[i] = ja.dg[i] * jb.g + ja.g * jb.dg[i];
                    for (int k = 0; k < 3; ++k)
                        j.d2g[i][k] = ja.d2g[i][k] * jb.g + ja.dg[i] * jb.dg[k] + ja.dg[k] * jb.dg[i] +
                                      ja.g * jb.d2g[i][k];
                }
                return j;
            };
        }
        return GaugeTransform([a, b](const Vec3& x) { return Mat2(a(x) * b(x)); }, jet);
    }

private:
    ValueFn g_;
    JetFn jet_;
};

/// (g A g^-1 + g d(g^-1), g Phi g^-1). The result carries an analytic jet
/// when both inputs do.
inline FieldConfiguration gauge_apply(const FieldConfiguration& cfg, const GaugeTransform& gt) {
    auto value = [cfg, gt](const Vec3& x) {
        const GaugeJet j = gt.jet(x);
        const Mat2 gi = j.g.adjoint();
        const FieldValue v = cfg.eval(x);
        FieldValue out;
        for (int i = 0; i < 3; ++i)
            out.A[i] = Su2Element(j.g * v.A[i].matrix() * gi - j.dg[i] * gi);
        out.Phi = Su2Element(j.g * v.Phi.matrix() * gi);
        return out;
    };
    FieldConfiguration::JetFn jet;
    if (cfg.has_analytic_derivatives() && gt.has_analytic_derivatives()) {
        jet = [cfg, gt](const Vec3& x) {
            const GaugeJet j = gt.jet(x);
            const FieldJet f = cfg.jet(x);
            const Mat2& g = j.g;
            const Mat2 gi = g.adjoint();
            FieldJet out;
            for (int i = 0; i < 3; ++i)
                out.value.A[i] = Su2Element(g * f.value.A[i].matrix() * gi - j.dg[i] * gi);
            out.value.Phi = Su2Element(g * f.value.Phi.matrix() * gi);
            for (int i = 0; i < 3; ++i) {
                const Mat2 dgi = j.dg[i].adjoint();  // d_i (g^-1) for unitary g
                for (int k = 0; k < 3; ++k) {
                    const Mat2& Ak = f.value.A[k].matrix();
                    out.dA[i][k] = Su2Element(j.dg[i] * Ak * gi + g * f.dA[i][k].matrix() * gi + g * Ak * dgi -
                                              j.d2g[i][k] * gi - j.dg[k] * dgi);
                }
                const Mat2& P = f.value.Phi.matrix();
                out.dPhi[i] = Su2Element(j.dg[i] * P * gi + g * f.dPhi[i].matrix() * gi + g * P * dgi);
            }
            return out;
        };
    }
    return FieldConfiguration(value, cfg.charge(), cfg.asymptotic_norm(), jet);
}

/// (c A(c x), c Phi(c x)).
inline FieldConfiguration scale(const FieldConfiguration& cfg, double c) {
    if (!(c > 0.0)) throw ValidationError("bad-scale", "scale factor must be positive");
    auto value = [cfg, c](const Vec3& x) {
        FieldValue v = cfg.eval(c * x);
        for (auto& a : v.A) a *= c;
        v.Phi *= c;
        return v;
    };
    FieldConfiguration::JetFn jet;
    if (cfg.has_analytic_derivatives()) {
        jet = [cfg, c](const Vec3& x) {
            FieldJet j = cfg.jet(c * x);
            for (auto& a : j.value.A) a *= c;
            j.value.Phi *= c;
            for (auto& row : j.dA)
                for (auto& d : row) d *= c * c;
            for (auto& d : j.dPhi) d *= c * c;
            return j;
        };
    }
    return FieldConfiguration(value, cfg.charge(), c * cfg.asymptotic_norm(), jet);
}

/// Pushes the configuration forward by a rotation R: Phi'(x) = Phi(R^T x)
/// and A' is the rotated one-form.
inline FieldConfiguration rotate(const FieldConfiguration& cfg, const Eigen::Matrix3d& R) {
    auto value = [cfg, R](const Vec3& x) {
        const FieldValue v = cfg.eval(R.transpose() * x);
        FieldValue out;
        for (int i = 0; i < 3; ++i) {
            out.A[i] = Su2Element();
            for (int j = 0; j < 3; ++j) out.A[i] += R(i, j) * v.A[j];
        }
        out.Phi = v.Phi;
        return out;
    };
    FieldConfiguration::JetFn jet;
    if (cfg.has_analytic_derivatives()) {
        jet = [cfg, R](const Vec3& x) {
            const FieldJet f = cfg.jet(R.transpose() * x);
            FieldJet out;
            for (int i = 0; i < 3; ++i) {
                out.value.A[i] = Su2Element();
                for (int j = 0; j < 3; ++j) out.value.A[i] += R(i, j) * f.value.A[j];
            }
            out.value.Phi = f.value.Phi;
            for (int i = 0; i < 3; ++i) {
                out.dPhi[i] = Su2Element();
                for (int m = 0; m < 3; ++m) out.dPhi[i] += R(i, m) * f.dPhi[m];
                for (int j = 0; j < 3; ++j) {
                    out.dA[i][j] = Su2Element();
                    for (int m = 0; m < 3; ++m)
                        for (int l = 0; l < 3; ++l) out.dA[i][j] += (R(i, m) * R(j, l)) * f.dA[m][l];
                }
            }
            return out;
        };
    }
    return FieldConfiguration(value, cfg.charge(), cfg.asymptotic_norm(), jet);
}

/// A = 0, Phi = framing constant.
inline FieldConfiguration vacuum() {
    auto value = [](const Vec3&) {
        FieldValue v;
        v.Phi = basis::framing();
        return v;
    };
    auto jet = [value](const Vec3& x) {
        FieldJet j;
        j.value = value(x);
        return j;
    };
    return FieldConfiguration(value, 0, 1.0, jet);
}

// ---------------------------------------------------------------------------
// Energy integrals

struct TotalEnergyOptions {
    int n_theta = 32;
    int n_phi = 64;
    double h = kDefaultStep;
    double rel_tol = 1e-3;          // agreement between successive extrapolants
    int ball_radial = 0;            // 0 skips the ball cross-check
};

struct TotalEnergyReport {
    std::vector<double> radii;
    std::vector<double> flux;         // surface pairing of F with Phi on each sphere
    double flux_extrapolated = 0.0;   // R -> infinity
    double energy = 0.0;              // Laplacian-normalized total, twice the flux
    double ball_energy = 0.0;         // ball integral of the Laplacian-normalized density, largest R
    double ball_defect = 0.0;         // ball integral of |F - *D Phi|^2, largest R
};

/// Surface integral over the sphere of radius R about the origin of the
/// pairing <*F . n, Phi>.
inline double surface_flux(const FieldConfiguration& cfg, double R, const TotalEnergyOptions& opt = {}) {
    const auto grid = sphere_grid(opt.n_theta, opt.n_phi);
    double sum = 0.0;
    for (const auto& s : grid) {
        const Vec3 x = R * s.n;
        const FieldJet j = cfg.jet(x, opt.h);
        const Vec3Array F = curvature_from_jet(j);
        double v = 0.0;
        for (int i = 0; i < 3; ++i) v += s.n[i] * inner(F[i], j.value.Phi);
        sum += s.w * v;
    }
    return sum * R * R;
}

/// Polynomial extrapolation in 1/R to 1/R = 0 (Neville).
inline double extrapolate_inverse_radius(const std::vector<double>& R, const std::vector<double>& f) {
    const std::size_t n = R.size();
    std::vector<double> x(n), p(f);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 / R[i];
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
    return p[0];
}

inline TotalEnergyReport total_energy(const FieldConfiguration& cfg, const std::vector<double>& radii,
                                      const TotalEnergyOptions& opt = {}) {
    if (radii.empty()) throw ValidationError("bad-radii", "need at least one radius");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw ValidationError("bad-radii", "radii must be increasing");
    TotalEnergyReport rep;
    rep.radii = radii;
    for (double R : radii) rep.flux.push_back(surface_flux(cfg, R, opt));
    rep.flux_extrapolated = extrapolate_inverse_radius(radii, rep.flux);
    if (radii.size() >= 3) {
        std::vector<double> r2(radii.begin(), radii.end() - 1), f2(rep.flux.begin(), rep.flux.end() - 1);
        const double prev = extrapolate_inverse_radius(r2, f2);
        const double scale_ref = std::max(1.0, std::abs(rep.flux_extrapolated));
        if (std::abs(prev - rep.flux_extrapolated) > opt.rel_tol * scale_ref)
            throw NumericError("quadrature-not-converged", "extrapolants disagree: " + std::to_string(prev) +
                                                               " vs " + std::to_string(rep.flux_extrapolated));
    }
    rep.energy = 2.0 * rep.flux_extrapolated;
    if (opt.ball_radial > 0) {
        const auto pts = ball_grid(Vec3::Zero(), radii.back(), opt.ball_radial, opt.n_theta, opt.n_phi);
        for (const auto& b : pts) {
            const FieldJet j = cfg.jet(b.x, opt.h);
            const Vec3Array F = curvature_from_jet(j);
            const Vec3Array D = cov_deriv_from_jet(j);
            double e = 0.0, d = 0.0;
            for (int i = 0; i < 3; ++i) {
                e += inner(F[i], F[i]) + inner(D[i], D[i]);
                const Su2Element diff = F[i] - D[i];
                d += inner(diff, diff);
            }
            rep.ball_energy += b.w * e;
            rep.ball_defect += b.w * d;
        }
    }
    return rep;
}

}  // namespace monopole
