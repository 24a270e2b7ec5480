#pragma once

// Nahm's equations for anti-hermitian k x k triples, T1' = [T2,T3] and
// cyclic. Hermitian "position" matrices are X = 2iT; with that scaling a
// constant k=1 triple X = p is a monopole centred at p.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "monopole/errors.hpp"
#include "monopole/minitwistor.hpp"
#include "monopole/ode.hpp"
#include "monopole/su2.hpp"

namespace monopole {

using CMat = Eigen::MatrixXcd;
using NahmTriple = std::array<CMat, 3>;

inline int triple_size(const NahmTriple& T) {
    const auto n = T[0].rows();
    for (const auto& m : T)
        if (m.rows() != n || m.cols() != n) throw ValidationError("shape-mismatch", "Nahm matrices must be square and equal size");
    return static_cast<int>(n);
}

inline NahmTriple nahm_rhs(const NahmTriple& T) {
    triple_size(T);
    auto br = [](const CMat& a, const CMat& b) -> CMat { return a * b - b * a; };
    return {br(T[1], T[2]), br(T[2], T[0]), br(T[0], T[1])};
}

inline NahmTriple position_matrices(const NahmTriple& T) {
    const cplx s(0.0, 2.0);
    return {s * T[0], s * T[1], s * T[2]};
}

inline double anti_hermitian_defect(const NahmTriple& T) {
    double d = 0.0;
    for (const auto& m : T) d = std::max(d, (m + m.adjoint()).cwiseAbs().maxCoeff());
    return d;
}

/// Residues: T ~ plus/(1 - z) near z = 1 and T ~ minus/(1 + z) near z = -1.
struct PoleMeta {
    std::optional<NahmTriple> plus;
    std::optional<NahmTriple> minus;
    bool complete() const { return plus.has_value() && minus.has_value(); }
    bool empty() const { return !plus && !minus; }
};

class NahmData {
public:
    using Function = std::function<NahmTriple(double)>;

    NahmData() = default;

    static NahmData constant(const NahmTriple& T, int n_samples = 3) {
        triple_size(T);
        NahmData d = analytic([T](double) { return T; }, -1.0, 1.0, {}, n_samples);
        d.constant_ = true;
        d.const_value_ = T;
        return d;
    }

    /// f must be finite on [z_min, z_max] except at ends carrying a residue
    /// in `poles`; stored samples then stop `sample_eps` short of that end.
    static NahmData analytic(Function f, double z_min, double z_max, PoleMeta poles = {}, int n_samples = 201,
                             double sample_eps = 0.05) {
        if (!(z_max > z_min)) throw ValidationError("bad-window", "z_max must exceed z_min");
        if (n_samples < 2) throw ValidationError("insufficient-samples", "need at least two samples");
        NahmData d;
        d.fn_ = std::move(f);
        d.z_lo_ = z_min;
        d.z_hi_ = z_max;
        d.poles_ = std::move(poles);
        const double lo = z_min + (d.poles_.minus && z_min <= -1.0 ? sample_eps : 0.0);
        const double hi = z_max - (d.poles_.plus && z_max >= 1.0 ? sample_eps : 0.0);
        d.z_.resize(n_samples);
        d.T_.resize(n_samples);
        for (int i = 0; i < n_samples; ++i) {
            d.z_[i] = lo + (hi - lo) * i / (n_samples - 1);
            d.T_[i] = d.fn_(d.z_[i]);
        }
        d.k_ = triple_size(d.T_[0]);
        return d;
    }

    static NahmData sampled(std::vector<double> z, std::vector<NahmTriple> T, PoleMeta poles = {}) {
        if (z.size() != T.size()) throw ValidationError("shape-mismatch", "z and T sample counts differ");
        if (z.size() < 2) throw ValidationError("insufficient-samples", "need at least two samples");
        if (z.front() > z.back()) {
            std::reverse(z.begin(), z.end());
            std::reverse(T.begin(), T.end());
        }
        for (std::size_t i = 1; i < z.size(); ++i)
            if (!(z[i] > z[i - 1])) throw ValidationError("bad-window", "z samples must be strictly monotone");
        NahmData d;
        d.k_ = triple_size(T[0]);
        for (const auto& t : T)
            if (triple_size(t) != d.k_) throw ValidationError("shape-mismatch", "inconsistent matrix size across samples");
        d.z_ = std::move(z);
        d.T_ = std::move(T);
        d.z_lo_ = d.z_.front();
        d.z_hi_ = d.z_.back();
        d.poles_ = std::move(poles);
        return d;
    }

    int k() const { return k_; }
    double z_min() const { return z_lo_; }
    double z_max() const { return z_hi_; }
    bool is_constant() const { return constant_; }
    /// The value of constant data (empty matrices otherwise).
    const NahmTriple& constant_value() const { return const_value_; }
    bool is_analytic() const { return static_cast<bool>(fn_); }
    const std::vector<double>& z_samples() const { return z_; }
    const std::vector<NahmTriple>& samples() const { return T_; }
    const PoleMeta& pole_meta() const { return poles_; }
    void set_pole_meta(PoleMeta p) { poles_ = std::move(p); }

    bool in_window(double z) const { return z >= z_lo_ && z <= z_hi_; }

    /// Value at z. Sampled data uses cubic Hermite interpolation with slopes
    /// taken from the Nahm right-hand side at the nodes.
    NahmTriple at(double z) const {
        if (!in_window(z))
            throw ValidationError("out-of-window", "z=" + std::to_string(z) + " outside [" + std::to_string(z_lo_) + ", " +
                                                       std::to_string(z_hi_) + "]");
        if (fn_) return fn_(z);
        auto it = std::upper_bound(z_.begin(), z_.end(), z);
        std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - z_.begin(), 1), z_.size() - 1);
        const double z0 = z_[j - 1], z1 = z_[j], h = z1 - z0, t = (z - z0) / h;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        const NahmTriple m0 = nahm_rhs(T_[j - 1]), m1 = nahm_rhs(T_[j]);
        NahmTriple out;
        for (int a = 0; a < 3; ++a)
            out[a] = h00 * T_[j - 1][a] + (h10 * h) * m0[a] + h01 * T_[j][a] + (h11 * h) * m1[a];
        return out;
    }

    double anti_hermitian_defect() const {
        double d = 0.0;
        for (const auto& t : T_) d = std::max(d, monopole::anti_hermitian_defect(t));
        return d;
    }

private:
    int k_ = 0;
    double z_lo_ = -1.0, z_hi_ = 1.0;
    bool constant_ = false;
    NahmTriple const_value_;
    Function fn_;
    std::vector<double> z_;
    std::vector<NahmTriple> T_;
    PoleMeta poles_;
};

// ---------------------------------------------------------------------------
// Evolution

struct EvolveOptions {
    double tol = 1e-10;
    int n_samples = 181;
    double blowup_eps = 1e-6;  // abort once an entry exceeds 1/eps
    double initial_step = 1e-3;
};

inline NahmData evolve(const NahmTriple& T0, double z0, double z1, const EvolveOptions& opt = {}) {
    const int k = triple_size(T0);
    if (!(std::abs(z0) < 1.0) || !(std::abs(z1) < 1.0))
        throw ValidationError("out-of-window", "evolve endpoints must lie in (-1, 1)");
    if (z0 == z1) throw ValidationError("bad-window", "z0 and z1 coincide");
    if (opt.n_samples < 2) throw ValidationError("insufficient-samples", "need at least two output samples");
    if (!(opt.tol > 0.0)) throw ValidationError("bad-tolerance", "tol must be positive");

    const std::size_t kk = static_cast<std::size_t>(k) * k;
    auto unpack_triple = [&](const RealState& x) {
        NahmTriple T;
        for (int a = 0; a < 3; ++a) {
            T[a].resize(k, k);
            unpack(x, kk, T[a].data(), 2 * kk * a);
        }
        return T;
    };
    auto sys = [&](const RealState& x, RealState& dx, double) {
        const NahmTriple d = nahm_rhs(unpack_triple(x));
        dx.resize(x.size());
        for (int a = 0; a < 3; ++a) pack(d[a].data(), kk, dx, 2 * kk * a);
    };

    RealState x(6 * kk);
    for (int a = 0; a < 3; ++a) {
        const CMat m = T0[a];
        pack(m.data(), kk, x, 2 * kk * a);
    }
    std::vector<double> zs(opt.n_samples);
    for (int i = 0; i < opt.n_samples; ++i) zs[i] = z0 + (z1 - z0) * i / (opt.n_samples - 1);
    zs.back() = z1;
    std::vector<NahmTriple> Ts(opt.n_samples);

    OdeOptions oo;
    oo.abs_tol = opt.tol;
    oo.rel_tol = opt.tol;
    oo.initial_step = opt.initial_step;
    const double limit = 1.0 / opt.blowup_eps;
    auto guard = [&](double z, const RealState& s) {
        for (double v : s)
            if (!(std::abs(v) <= limit))
                throw NumericError("blow-up-detected", "matrix entries exceed " + std::to_string(limit) + " at z=" + std::to_string(z));
    };
    integrate_outputs(sys, x, z0, zs, [&](std::size_t i, const RealState& s) { Ts[i] = unpack_triple(s); }, oo, guard);
    return NahmData::sampled(std::move(zs), std::move(Ts));
}

// ---------------------------------------------------------------------------
// Lax pair and spectral curve

inline CMat lax_polynomial(const NahmTriple& T, cplx zeta) {
    triple_size(T);
    const cplx i(0.0, 1.0);
    return (T[0] + i * T[1]) + (2.0 * zeta) * T[2] + (zeta * zeta) * (-T[0] + i * T[1]);
}

/// Partner with dA/dz = [A_+, A] along solutions.
inline CMat a_plus(const NahmTriple& T, cplx zeta) {
    triple_size(T);
    const cplx i(0.0, 1.0);
    return i * T[2] - zeta * (i * T[0] + T[1]);
}

/// a_1..a_k with det(eta - A) = eta^k + a_1 eta^(k-1) + ... + a_k
/// (Faddeev-LeVerrier).
inline std::vector<cplx> char_poly_coefficients(const CMat& A) {
    const int k = static_cast<int>(A.rows());
    std::vector<cplx> a(k);
    CMat M = CMat::Zero(k, k);
    cplx prev(1.0);
    for (int m = 1; m <= k; ++m) {
        M = A * M + prev * CMat::Identity(k, k);
        prev = -(A * M).trace() / double(m);
        a[m - 1] = prev;
    }
    return a;
}

/// Curve coefficients at a single z: char poly of the Lax matrix built from
/// the position matrices.
inline std::vector<cplx> nahm_curve_values(const NahmTriple& T, cplx zeta) {
    return char_poly_coefficients(lax_polynomial(position_matrices(T), zeta));
}

inline double default_curve_z(const NahmData& data) {
    if (data.in_window(0.0)) return 0.0;
    const auto& z = data.z_samples();
    return z[z.size() / 2];
}

inline CurveFit nahm_spectral_curve(const NahmData& data, const std::vector<cplx>& zetas,
                                    double z = std::numeric_limits<double>::quiet_NaN()) {
    const int k = data.k();
    if (zetas.size() < static_cast<std::size_t>(2 * k + 1))
        throw ValidationError("insufficient-samples", "need at least 2k+1 zeta samples");
    if (std::isnan(z)) z = default_curve_z(data);
    const NahmTriple T = data.at(z);
    std::vector<std::vector<cplx>> vals(zetas.size());
    for (std::size_t n = 0; n < zetas.size(); ++n) vals[n] = nahm_curve_values(T, zetas[n]);
    return fit_curve_values(k, zetas, vals);
}

/// Max drift of the char-poly coefficients across the stored samples,
/// relative to the first sample.
inline double conservation_report(const NahmData& traj, const std::vector<cplx>& zetas) {
    const auto& Ts = traj.samples();
    double drift = 0.0;
    for (const cplx& zeta : zetas) {
        const auto ref = nahm_curve_values(Ts.front(), zeta);
        for (std::size_t j = 1; j < Ts.size(); ++j) {
            const auto cur = nahm_curve_values(Ts[j], zeta);
            for (std::size_t i = 0; i < cur.size(); ++i) drift = std::max(drift, std::abs(cur[i] - ref[i]));
        }
    }
    return drift;
}

/// Max entry of (central-difference dT/dz - rhs) over interior samples.
inline double nahm_residual(const NahmData& data) {
    const auto& z = data.z_samples();
    const auto& T = data.samples();
    if (z.size() < 3) throw ValidationError("insufficient-samples", "need at least three samples");
    double r = 0.0;
    for (std::size_t j = 1; j + 1 < z.size(); ++j) {
        const NahmTriple rhs = nahm_rhs(T[j]);
        const double dz = z[j + 1] - z[j - 1];
        for (int a = 0; a < 3; ++a) {
            const CMat d = (T[j + 1][a] - T[j - 1][a]) / dz - rhs[a];
            r = std::max(r, d.cwiseAbs().maxCoeff());
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Reference solutions

/// Irreducible triple with [rho_2, rho_3] = rho_1 (cyclic); for k=2 this is
/// -(i/2) Pauli.
inline NahmTriple su2_triple(int k) {
    if (k < 1) throw ValidationError("bad-charge", "k must be >= 1");
    const double j = 0.5 * (k - 1);
    CMat Jp = CMat::Zero(k, k), J3 = CMat::Zero(k, k);
    for (int n = 0; n < k; ++n) {
        const double m = j - n;
        J3(n, n) = m;
        if (n > 0) Jp(n - 1, n) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    const CMat Jm = Jp.adjoint();
    const cplx i(0.0, 1.0);
    const CMat J1 = 0.5 * (Jp + Jm), J2 = (-0.5 * i) * (Jp - Jm);
    return {-i * J1, -i * J2, -i * J3};
}

/// k=1 data whose monopole is centred at p.
inline NahmData nahm_point(const Vec3& p) {
    NahmTriple T;
    for (int a = 0; a < 3; ++a) T[a] = CMat::Constant(1, 1, cplx(0.0, -0.5 * p[a]));
    return NahmData::constant(T);
}

/// T_a = rho_a / (c - z), which solves the equations for any triple with the
/// su(2) brackets.
inline NahmData nahm_pole_solution(const NahmTriple& rho, double c = 1.0, int n_samples = 201) {
    triple_size(rho);
    PoleMeta meta;
    if (c == 1.0) meta.plus = rho;
    const double hi = std::min(1.0, c);
    return NahmData::analytic(
        [rho, c](double z) {
            const double f = 1.0 / (c - z);
            return NahmTriple{f * rho[0], f * rho[1], f * rho[2]};
        },
        -1.0, hi, meta, n_samples);
}

/// Axially symmetric k=2 data with simple poles at both ends.
inline NahmData nahm_torus(int n_samples = 201) {
    const NahmTriple rho = su2_triple(2);
    PoleMeta meta;
    meta.plus = rho;
    meta.minus = NahmTriple{rho[0], rho[1], CMat(-rho[2])};
    const double q = 0.5 * std::numbers::pi;
    return NahmData::analytic(
        [rho, q](double z) {
            const double f1 = q / std::cos(q * z), f3 = q * std::tan(q * z);
            return NahmTriple{f1 * rho[0], f1 * rho[1], f3 * rho[2]};
        },
        -1.0, 1.0, meta, n_samples);
}

/// Random anti-hermitian triple, entries of size ~scale. Keep scale small
/// (<= 0.4) if the flow must stay regular on [-0.9, 0.9].
inline NahmTriple random_nahm_triple(int k, double scale, std::mt19937_64& rng) {
    if (k < 1) throw ValidationError("bad-charge", "k must be >= 1");
    std::normal_distribution<double> n;
    NahmTriple T;
    for (auto& t : T) {
        CMat M(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) M(i, j) = cplx(n(rng), n(rng));
        t = 0.5 * scale * (M - M.adjoint());
    }
    return T;
}

}  // namespace monopole
