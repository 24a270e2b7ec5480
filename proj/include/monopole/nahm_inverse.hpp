#pragma once

// Inverse Nahm transform. For a point x the kernel of d/dz - M(x, z) on
// (-1, 1) with M = sum_a (x_a - X_a) (x) sigma_a/2, X = 2iT, is two
// dimensional; an L2-orthonormal basis v_1, v_2 gives
//   Phi = (i/2) traceless part of H,  H_ba = int z v_b^+ v_a dz,
//   A_i = anti-hermitian traceless part of int v^+ d_i v dz.
// Frames are placed in one global gauge before differencing: a fixed 2x2
// projection of v(z=0) is made hermitian positive.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "monopole/errors.hpp"
#include "monopole/fields.hpp"
#include "monopole/grid.hpp"
#include "monopole/nahm.hpp"
#include "monopole/ode.hpp"
#include "monopole/parallel.hpp"
#include "monopole/quadrature.hpp"
#include "monopole/su2.hpp"

namespace monopole {

struct KernelOptions {
    int quad_order = 64;
    double ode_tol = 1e-12;
    double pole_offset = 1e-6;  // start distance from a pole for analytic data
    bool force_ode = false;     // integrate numerically even for constant data
    // Constant k=1 data: integrate the exponential solutions exactly instead
    // of by Gauss quadrature. Node values are then left empty.
    bool exact_constant = false;
};

namespace nahm_inverse_detail {

inline CMat coupling(const std::array<CMat, 3>& X, const Vec3& x, int k) {
    const auto& s = pauli::all();
    CMat M = CMat::Zero(2 * k, 2 * k);
    for (int a = 0; a < 3; ++a) {
        const CMat c = x[a] * CMat::Identity(k, k) - X[a];
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) M.block<2, 2>(2 * i, 2 * j) += (0.5 * c(i, j)) * s[a];
    }
    return M;
}

}  // namespace nahm_inverse_detail

/// Hermitian 2k x 2k generator of the kernel ODE dv/dz = M v. Index 2i+alpha
/// pairs C^k slot i with spinor slot alpha.
inline CMat kernel_ode_matrix(const NahmData& data, const Vec3& x, double z) {
    const NahmTriple T = data.at(z);
    return nahm_inverse_detail::coupling(position_matrices(T), x, data.k());
}

/// Leading coefficient of M near a pole: (1-z)M -> K+ and (1+z)M -> K-.
inline CMat pole_coefficient(const NahmTriple& residue) {
    const int k = triple_size(residue);
    return nahm_inverse_detail::coupling(position_matrices(residue), Vec3::Zero(), k);
}

struct KernelDiagnostics {
    bool closed_form = false;
    int dim_plus = 0, dim_minus = 0;
    double matching_gap = 1.0;      // smallest/largest singular value of the matching system
    double gram_condition = 1.0;
    double orthonormality = 0.0;    // max |<v_b, v_a> - delta_ab| after orthonormalization
    double reference_condition = 1.0;
};

namespace nahm_inverse_detail {

/// int_{-1}^{1} z^p e^{cz} dz for p = 0, 1.
inline double exp_moment(double c, int p) {
    if (std::abs(c) < 1e-3) {
        const double c2 = c * c;
        return p == 0 ? 2.0 + c2 / 3.0 + c2 * c2 / 60.0 : c * (2.0 / 3.0 + c2 / 15.0 + c2 * c2 / 420.0);
    }
    return p == 0 ? 2.0 * std::sinh(c) / c : 2.0 * (c * std::cosh(c) - std::sinh(c)) / (c * c);
}

}  // namespace nahm_inverse_detail

/// Basis v(z) = Q diag(e^{lam z}) C of a constant k=1 kernel.
struct ExponentialFrame {
    Mat2 Q = Mat2::Identity();
    std::array<double, 2> lam{0.0, 0.0};
    Mat2 C = Mat2::Identity();
};

struct KernelFrame {
    Vec3 x = Vec3::Zero();
    int k = 0;
    std::vector<double> nodes, weights;
    std::vector<CMat> values;  // 2k x 2 at each node (quadrature form)
    std::optional<ExponentialFrame> exact;
    CMat v0;                   // 2k x 2 at z = 0
    KernelDiagnostics diag;

    /// int z^p v^+ v dz, p = 0 or 1.
    Mat2 moment(int p) const {
        Mat2 m = Mat2::Zero();
        if (exact) {
            const auto& e = *exact;
            Mat2 I = Mat2::Zero();
            for (int i = 0; i < 2; ++i) I(i, i) = nahm_inverse_detail::exp_moment(2.0 * e.lam[i], p);
            return e.C.adjoint() * I * e.C;  // Q is unitary
        }
        for (std::size_t n = 0; n < nodes.size(); ++n)
            m += (weights[n] * (p == 0 ? 1.0 : nodes[n])) * (values[n].adjoint() * values[n]);
        return m;
    }

    /// Right-multiplies every basis by U (a change of frame).
    void rotate(const Mat2& U) {
        for (auto& v : values) v = v * U;
        if (exact) exact->C = exact->C * U;
        v0 = v0 * U;
    }
};

namespace nahm_inverse_detail {

struct Half {
    CMat at_zero;               // 2k x d
    std::vector<CMat> at_nodes; // aligned with the node subset
};

/// Integrates the matrix ODE with d columns from z_start to 0, recording the
/// nodes (given in integration order).
inline Half integrate_half(const NahmData& data, const Vec3& x, const CMat& seeds, double z_start,
                           const std::vector<double>& zs, const KernelOptions& opt) {
    const int n = static_cast<int>(seeds.rows()), d = static_cast<int>(seeds.cols());
    const std::size_t len = std::size_t(n) * d;
    RealState s(2 * len);
    pack(seeds.data(), len, s);
    auto sys = [&](const RealState& y, RealState& dy, double z) {
        CMat Y(n, d);
        unpack(y, len, Y.data());
        const CMat D = kernel_ode_matrix(data, x, z) * Y;
        dy.resize(y.size());
        pack(D.data(), len, dy);
    };
    std::vector<double> outs = zs;
    outs.push_back(0.0);
    Half h;
    h.at_nodes.resize(zs.size());
    OdeOptions oo;
    oo.abs_tol = opt.ode_tol;
    oo.rel_tol = opt.ode_tol;
    oo.initial_step = std::min(1e-3, 0.1 * std::max(1e-12, 1.0 - std::abs(z_start)));
    integrate_outputs(
        sys, s, z_start, outs,
        [&](std::size_t i, const RealState& y) {
            CMat Y(n, d);
            unpack(y, len, Y.data());
            if (i < zs.size())
                h.at_nodes[i] = Y;
            else
                h.at_zero = Y;
        },
        oo);
    return h;
}

inline CMat admissible_seeds(const CMat& K, bool plus_end) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (K + K.adjoint()));
    std::vector<int> keep;
    for (int i = 0; i < K.rows(); ++i) {
        const double kappa = es.eigenvalues()[i];
        if (plus_end ? kappa < 0.5 : kappa > -0.5) keep.push_back(i);
    }
    CMat S(K.rows(), keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) S.col(j) = es.eigenvectors().col(keep[j]);
    return S;
}

/// Fixed 2k x 2 isometry whose projection of v(0) fixes the gauge. For k=1
/// it is the identity; for k >= 2 the entries are generic so that symmetric
/// points (the torus axis, say) do not make the projection singular.
inline CMat reference_isometry(int k) {
    if (k == 1) return CMat::Identity(2, 2);
    CMat E(2 * k, 2);
    for (int r = 0; r < 2 * k; ++r)
        for (int c = 0; c < 2; ++c) E(r, c) = cplx(std::cos(1.3 * r + 0.7 * c + 0.4), std::sin(0.9 * r - 1.7 * c + 0.2));
    Eigen::HouseholderQR<CMat> qr(E);
    return qr.householderQ() * CMat::Identity(2 * k, 2);
}

/// Orthonormalizes raw basis values against the Gauss weights and puts the
/// frame in the reference gauge.
inline void finish_frame(KernelFrame& f) {
    Mat2 G = f.moment(0);
    G = 0.5 * (G + G.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat2> ge(G);
    const double gmin = ge.eigenvalues()[0], gmax = ge.eigenvalues()[1];
    if (!(gmin > 0.0) || gmin < 1e-14 * gmax)
        throw NumericError("subspace-selection-failed", "Gram matrix of the kernel basis has rank < 2");
    f.diag.gram_condition = gmax / gmin;
    Eigen::LLT<Mat2> llt(G);
    const Mat2 Linv_adj = Mat2(llt.matrixL()).inverse().adjoint();
    f.rotate(Linv_adj);

    const Mat2 B = reference_isometry(f.k).adjoint() * f.v0;
    Eigen::JacobiSVD<Mat2> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    f.diag.reference_condition = sv[0] > 0.0 ? sv[1] / sv[0] : 0.0;
    if (!(sv[1] > 1e-10 * sv[0]))
        throw NumericError("frame-alignment-failed", "reference block of v(0) is singular; gauge cannot be fixed");
    const Mat2 W = svd.matrixU() * svd.matrixV().adjoint();
    f.rotate(W.adjoint());

    const Mat2 G2 = f.moment(0);
    f.diag.orthonormality = (G2 - Mat2::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace nahm_inverse_detail

inline KernelFrame kernel_frame(const NahmData& data, const Vec3& x, const KernelOptions& opt = {}) {
    using namespace nahm_inverse_detail;
    const int k = data.k();
    if (k < 1) throw ValidationError("bad-charge", "Nahm data must have k >= 1");
    KernelFrame f;
    f.x = x;
    f.k = k;
    const bool poles = k >= 2;
    if (poles && !data.pole_meta().complete())
        throw ValidationError("pole-data-missing", "k >= 2 needs residues at both ends");
    const bool exact = !poles && data.is_constant() && !opt.force_ode && opt.exact_constant;
    if (!exact) {
        const auto& rule = gauss_legendre(opt.quad_order);
        f.nodes = rule.nodes;
        f.weights = rule.weights;
        f.values.resize(rule.nodes.size());
    }

    if (!poles && data.is_constant() && !opt.force_ode) {
        // v(z) = Q e^{lam z} Q^+ v(0), so the eigen-solutions form a basis
        const NahmTriple& T = data.constant_value();
        Mat2 M = Mat2::Zero();
        for (int a = 0; a < 3; ++a) M += (0.5 * (x[a] - cplx(0.0, 2.0) * T[a](0, 0))) * pauli::all()[a];
        Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (M + M.adjoint()));
        const Mat2 Q = es.eigenvectors();
        const auto& lam = es.eigenvalues();
        if (exact) {
            f.exact = ExponentialFrame{Q, {lam[0], lam[1]}, Mat2::Identity()};
        } else {
            for (std::size_t n = 0; n < f.nodes.size(); ++n) {
                Mat2 E = Mat2::Zero();
                E(0, 0) = std::exp(lam[0] * f.nodes[n]);
                E(1, 1) = std::exp(lam[1] * f.nodes[n]);
                f.values[n] = Q * E;
            }
        }
        f.v0 = Q;
        f.diag.closed_form = true;
        f.diag.dim_plus = f.diag.dim_minus = 2;
        finish_frame(f);
        return f;
    }

    std::vector<std::size_t> plus_idx, minus_idx;
    for (std::size_t n = 0; n < f.nodes.size(); ++n) (f.nodes[n] >= 0.0 ? plus_idx : minus_idx).push_back(n);
    std::sort(plus_idx.begin(), plus_idx.end(), [&](auto a, auto b) { return f.nodes[a] > f.nodes[b]; });
    std::sort(minus_idx.begin(), minus_idx.end(), [&](auto a, auto b) { return f.nodes[a] < f.nodes[b]; });
    std::vector<double> zp, zm;
    for (auto i : plus_idx) zp.push_back(f.nodes[i]);
    for (auto i : minus_idx) zm.push_back(f.nodes[i]);

    if (!poles) {
        // regular k = 1 data: identity at z = 0, integrated outward
        const CMat I = CMat::Identity(2, 2);
        std::vector<double> up(zp.rbegin(), zp.rend()), down(zm.rbegin(), zm.rend());
        const Half hp = integrate_half(data, x, I, 0.0, up, opt);
        const Half hm = integrate_half(data, x, I, 0.0, down, opt);
        for (std::size_t j = 0; j < up.size(); ++j) f.values[plus_idx[up.size() - 1 - j]] = hp.at_nodes[j];
        for (std::size_t j = 0; j < down.size(); ++j) f.values[minus_idx[down.size() - 1 - j]] = hm.at_nodes[j];
        f.v0 = I;
        f.diag.dim_plus = f.diag.dim_minus = 2;
        finish_frame(f);
        return f;
    }

    const PoleMeta& pm = data.pole_meta();
    const CMat Sp = admissible_seeds(pole_coefficient(*pm.plus), true);
    const CMat Sm = admissible_seeds(pole_coefficient(*pm.minus), false);
    f.diag.dim_plus = static_cast<int>(Sp.cols());
    f.diag.dim_minus = static_cast<int>(Sm.cols());
    const int nd = f.diag.dim_plus + f.diag.dim_minus - 2 * k;
    if (nd != 2)
        throw NumericError("subspace-selection-failed",
                           "admissible dimensions " + std::to_string(f.diag.dim_plus) + "+" +
                               std::to_string(f.diag.dim_minus) + " do not leave a 2-dimensional kernel");

    const double zs_plus = data.is_analytic() ? std::min(data.z_max(), 1.0 - opt.pole_offset) : data.z_max();
    const double zs_minus = data.is_analytic() ? std::max(data.z_min(), -1.0 + opt.pole_offset) : data.z_min();
    for (double z : zp)
        if (z > zs_plus) throw ValidationError("out-of-window", "Gauss node beyond the data window");
    for (double z : zm)
        if (z < zs_minus) throw ValidationError("out-of-window", "Gauss node beyond the data window");

    const Half hp = integrate_half(data, x, Sp, zs_plus, zp, opt);
    const Half hm = integrate_half(data, x, Sm, zs_minus, zm, opt);

    CMat match(2 * k, Sp.cols() + Sm.cols());
    match << hp.at_zero, -hm.at_zero;
    Eigen::JacobiSVD<CMat> svd(match, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    f.diag.matching_gap = sv[2 * k - 1] / sv[0];
    if (!(f.diag.matching_gap > 1e-10))
        throw NumericError("subspace-selection-failed", "matching system is rank deficient; kernel dimension exceeds 2");
    const CMat null = svd.matrixV().rightCols(2);
    const CMat cp = null.topRows(Sp.cols()), cm = null.bottomRows(Sm.cols());
    for (std::size_t j = 0; j < zp.size(); ++j) f.values[plus_idx[j]] = hp.at_nodes[j] * cp;
    for (std::size_t j = 0; j < zm.size(); ++j) f.values[minus_idx[j]] = hm.at_nodes[j] * cm;
    f.v0 = hp.at_zero * cp;
    finish_frame(f);
    return f;
}

/// Higgs field from a frame: (i/2)(H - tr H / 2).
inline Su2Element higgs_from_frame(const KernelFrame& f) {
    const Mat2 H = f.moment(1);
    const Mat2 Hh = 0.5 * (H + H.adjoint());
    return Su2Element(cplx(0.0, 0.5) * (Hh - (Hh.trace() / 2.0) * Mat2::Identity()));
}

inline Su2Element reconstruct_higgs(const NahmData& data, const Vec3& x, const KernelOptions& opt = {}) {
    return higgs_from_frame(kernel_frame(data, x, opt));
}

namespace nahm_inverse_detail {

/// int v^+ w dz for two frames of the same data.
inline Mat2 overlap(const KernelFrame& a, const KernelFrame& b) {
    if (a.exact && b.exact) {
        const auto &ea = *a.exact, &eb = *b.exact;
        Mat2 K = ea.Q.adjoint() * eb.Q;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) K(i, j) *= exp_moment(ea.lam[i] + eb.lam[j], 0);
        return ea.C.adjoint() * K * eb.C;
    }
    if (a.exact || b.exact || a.nodes.size() != b.nodes.size())
        throw ValidationError("frame-mismatch", "frames use different representations");
    Mat2 m = Mat2::Zero();
    for (std::size_t n = 0; n < a.nodes.size(); ++n) m += a.weights[n] * (a.values[n].adjoint() * b.values[n]);
    return m;
}

inline void check_alignment(const KernelFrame& c, const KernelFrame& o) {
    const double d = (overlap(c, o) - Mat2::Identity()).norm();
    if (!(d < 0.5))
        throw NumericError("frame-alignment-failed", "neighbouring kernel frames differ by " + std::to_string(d) +
                                                         "; the reference gauge jumps here");
}

}  // namespace nahm_inverse_detail

inline Vec3Array connection_from_frames(const KernelFrame& c, const std::array<KernelFrame, 3>& plus,
                                        const std::array<KernelFrame, 3>& minus, double h) {
    using namespace nahm_inverse_detail;
    Vec3Array A;
    for (int i = 0; i < 3; ++i) {
        check_alignment(c, plus[i]);
        check_alignment(c, minus[i]);
        const Mat2 D = (overlap(c, plus[i]) - overlap(c, minus[i])) / (2.0 * h);
        A[i] = Su2Element::project(D);
    }
    return A;
}

inline Vec3Array reconstruct_connection(const NahmData& data, const Vec3& x, const KernelOptions& opt = {},
                                        double h = 1e-4) {
    check_step(h);
    const KernelFrame c = kernel_frame(data, x, opt);
    std::array<KernelFrame, 3> p, m;
    for (int i = 0; i < 3; ++i) {
        Vec3 xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        p[i] = kernel_frame(data, xp, opt);
        m[i] = kernel_frame(data, xm, opt);
    }
    return connection_from_frames(c, p, m, h);
}

/// Both fields from seven frames.
inline FieldValue reconstruct(const NahmData& data, const Vec3& x, const KernelOptions& opt = {}, double h = 1e-4) {
    check_step(h);
    const KernelFrame c = kernel_frame(data, x, opt);
    std::array<KernelFrame, 3> p, m;
    for (int i = 0; i < 3; ++i) {
        Vec3 xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        p[i] = kernel_frame(data, xp, opt);
        m[i] = kernel_frame(data, xm, opt);
    }
    return FieldValue{connection_from_frames(c, p, m, h), higgs_from_frame(c)};
}

/// Reconstructed monopole as a field configuration (evaluated on demand).
inline FieldConfiguration nahm_field(const NahmData& data, const KernelOptions& opt = {}, double h = 1e-4) {
    check_step(h);
    return FieldConfiguration([data, opt, h](const Vec3& x) { return reconstruct(data, x, opt, h); }, data.k(), 1.0);
}

struct PointFailure {
    std::size_t index;
    std::string kind;
    std::string message;
};

struct ReconstructedGrid {
    GridSpec grid;
    std::vector<FieldValue> values;
    std::vector<double> higgs_norm;  // NaN where the point failed
    std::vector<char> valid;
    std::vector<PointFailure> failures;
};

inline ReconstructedGrid reconstruct_grid(const NahmData& data, const GridSpec& grid, const KernelOptions& opt = {},
                                          double h = 1e-4, int threads = 0) {
    grid.validate();
    ReconstructedGrid out;
    out.grid = grid;
    const std::size_t N = grid.size();
    out.values.resize(N);
    out.higgs_norm.assign(N, std::numeric_limits<double>::quiet_NaN());
    out.valid.assign(N, 0);
    std::vector<std::optional<PointFailure>> fails(N);
    parallel_for(
        N,
        [&](std::size_t n) {
            try {
                out.values[n] = reconstruct(data, grid.point(n), opt, h);
                out.higgs_norm[n] = norm(out.values[n].Phi);
                out.valid[n] = 1;
            } catch (const Error& e) {
                fails[n] = PointFailure{n, e.kind(), e.what()};
            }
        },
        threads);
    for (auto& f : fails)
        if (f) out.failures.push_back(*f);
    return out;
}

/// Grid-backed configuration; points outside the box (or next to failed
/// samples) are reconstructed directly.
inline FieldConfiguration sampled_nahm_field(const NahmData& data, const ReconstructedGrid& g,
                                             const KernelOptions& opt = {}, double h = 1e-4) {
    return sampled_field(g.grid, g.values, data.k(), 1.0, g.valid,
                         [data, opt, h](const Vec3& x) { return reconstruct(data, x, opt, h); });
}

}  // namespace monopole
