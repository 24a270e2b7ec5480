#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monopole/nahm.hpp"
#include "test_util.hpp"

using namespace monopole;
using testutil::uniform;

namespace {

CMat random_anti_hermitian(int k, double scale) {
    CMat m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = cplx(uniform(), uniform()) * scale;
    return 0.5 * (m - m.adjoint());
}

NahmTriple random_triple(int k, double scale = 0.2) {
    return {random_anti_hermitian(k, scale), random_anti_hermitian(k, scale), random_anti_hermitian(k, scale)};
}

double max_diff(const NahmTriple& a, const NahmTriple& b) {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return d;
}

NahmTriple scaled(const NahmTriple& T, double f) { return {f * T[0], f * T[1], f * T[2]}; }

std::vector<cplx> zeta_samples() { return {cplx(0.1, 0.2), cplx(-0.3, 0.4), cplx(0.5, -0.1), cplx(0.7, 0.6),
                                           cplx(-0.8, -0.2), cplx(0.05, -0.9), cplx(1.3, 0.4), cplx(-0.6, 1.1),
                                           cplx(0.2, 0.0)}; }

}  // namespace

TEST(NahmRhs, ScalarsCommute) {
    NahmTriple T{CMat::Constant(1, 1, cplx(0, 0.3)), CMat::Constant(1, 1, cplx(0, -1.0)), CMat::Constant(1, 1, cplx(0, 2.0))};
    const auto r = nahm_rhs(T);
    for (const auto& m : r) EXPECT_EQ(std::abs(m(0, 0)), 0.0);
}

TEST(NahmRhs, Su2TripleScalesQuadratically) {
    const auto rho = su2_triple(2);
    const double f = 1.7;
    const auto r = nahm_rhs(scaled(rho, f));
    EXPECT_LT(max_diff(r, scaled(rho, f * f)), 1e-14);
}

TEST(NahmRhs, PreservesAntiHermiticity) {
    for (int k = 2; k <= 4; ++k) EXPECT_LT(anti_hermitian_defect(nahm_rhs(random_triple(k))), 1e-14);
}

TEST(NahmRhs, ShapeMismatch) {
    NahmTriple T{CMat::Zero(2, 2), CMat::Zero(3, 3), CMat::Zero(2, 2)};
    try {
        nahm_rhs(T);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.kind(), "shape-mismatch");
    }
}

TEST(Su2Triple, BracketsForSeveralSizes) {
    for (int k = 1; k <= 4; ++k) {
        const auto rho = su2_triple(k);
        EXPECT_LT(max_diff(nahm_rhs(rho), rho), 1e-13) << k;
        EXPECT_LT(anti_hermitian_defect(rho), 1e-15);
    }
    const auto rho = su2_triple(2);
    for (int a = 0; a < 3; ++a) EXPECT_LT((rho[a] - cplx(0, -0.5) * pauli::all()[a]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Evolve, ConstantForScalars) {
    const Vec3 p(0.3, -0.2, 0.5);
    const auto T0 = nahm_point(p).at(0.0);
    const auto traj = evolve(T0, -0.9, 0.9);
    for (const auto& T : traj.samples()) EXPECT_LT(max_diff(T, T0), 1e-15);
}

TEST(Evolve, ExactPoleSolution) {
    const auto rho = su2_triple(2);
    const auto traj = evolve(rho, 0.0, 0.9);
    double err = 0.0;
    for (std::size_t j = 0; j < traj.z_samples().size(); ++j) {
        const double z = traj.z_samples()[j];
        err = std::max(err, max_diff(traj.samples()[j], scaled(rho, 1.0 / (1.0 - z))));
    }
    EXPECT_LT(err, 1e-8);
    EXPECT_NEAR(traj.z_samples().back(), 0.9, 1e-15);
}

TEST(Evolve, PoleSolutionForSpinOne) {
    const auto rho = su2_triple(3);
    const auto traj = evolve(rho, 0.0, -0.9);
    double err = 0.0;
    for (std::size_t j = 0; j < traj.z_samples().size(); ++j) {
        const double z = traj.z_samples()[j];
        err = std::max(err, max_diff(traj.samples()[j], scaled(rho, 1.0 / (1.0 - z))));
    }
    EXPECT_LT(err, 1e-9);
}

TEST(Evolve, TimeReversal) {
    const auto T0 = random_triple(3);
    const auto fwd = evolve(T0, -0.4, 0.8);
    const auto back = evolve(fwd.samples().back(), 0.8, -0.4);
    // sampled() sorts ascending, so the original z0 is the first stored sample
    EXPECT_NEAR(back.z_samples().front(), -0.4, 1e-15);
    EXPECT_LT(max_diff(back.samples().front(), T0), 1e-8);
}

TEST(Evolve, PreservesAntiHermiticity) {
    const double tol = 1e-10;
    EvolveOptions opt;
    opt.tol = tol;
    const auto traj = evolve(random_triple(3), -0.9, 0.9, opt);
    EXPECT_LT(traj.anti_hermitian_defect(), 10 * tol);
}

TEST(Evolve, DetectsBlowUp) {
    // pole of rho/(c - z) at c = 0.5
    const auto T0 = scaled(su2_triple(2), 2.0);
    try {
        evolve(T0, 0.0, 0.9);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_EQ(e.kind(), "blow-up-detected");
        EXPECT_NE(std::string(e.what()).find("z=0.5"), std::string::npos) << e.what();
    }
}

TEST(Evolve, RejectsOutOfWindow) {
    EXPECT_THROW(evolve(su2_triple(2), 0.0, 1.0), ValidationError);
    EXPECT_THROW(evolve(su2_triple(2), 0.3, 0.3), ValidationError);
}

TEST(NahmData, HermiteInterpolationOfEvolvedTrajectory) {
    const auto rho = su2_triple(2);
    EvolveOptions opt;
    opt.n_samples = 361;
    const auto traj = evolve(scaled(rho, 1.0 / 1.9), -0.9, 0.9, opt);
    for (double z : {-0.777, -0.3031, 0.0123, 0.41, 0.5555}) {
        EXPECT_LT(max_diff(traj.at(z), scaled(rho, 1.0 / (1.0 - z))), 1e-8) << z;
    }
    EXPECT_THROW(traj.at(0.95), ValidationError);
}

TEST(NahmData, SampledValidation) {
    EXPECT_THROW(NahmData::sampled({0.0}, {su2_triple(2)}), ValidationError);
    EXPECT_THROW(NahmData::sampled({0.0, 0.1}, {su2_triple(2)}), ValidationError);
    EXPECT_THROW(NahmData::sampled({0.0, 0.0}, {su2_triple(2), su2_triple(2)}), ValidationError);
    EXPECT_THROW(NahmData::sampled({0.0, 0.1}, {su2_triple(2), su2_triple(3)}), ValidationError);
}

TEST(Lax, PointDataGivesEta) {
    const Vec3 p(0.3, -0.2, 0.5);
    const auto T = nahm_point(p).at(0.0);
    for (const cplx& z : zeta_samples()) {
        const CMat A = lax_polynomial(position_matrices(T), z);
        EXPECT_LT(std::abs(A(0, 0) - eta_of_point(p, z)), 1e-14);
    }
}

TEST(Lax, ConstantTerm) {
    const auto T = random_triple(3);
    EXPECT_LT((lax_polynomial(T, 0.0) - (T[0] + cplx(0, 1) * T[1])).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lax, IdentityAlgebraic) {
    const auto T = random_triple(3);
    const auto dT = nahm_rhs(T);
    for (const cplx& z : zeta_samples()) {
        const CMat A = lax_polynomial(T, z), Ap = a_plus(T, z);
        EXPECT_LT((lax_polynomial(dT, z) - (Ap * A - A * Ap)).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Lax, IdentityAlongTrajectory) {
    // five-point stencil on the stored samples
    EvolveOptions opt;
    opt.tol = 1e-13;
    opt.n_samples = 361;
    const auto traj = evolve(random_triple(2), -0.9, 0.9, opt);
    const auto& z = traj.z_samples();
    const auto& T = traj.samples();
    const double h = z[1] - z[0];
    const cplx zeta(0.4, -0.3);
    double worst = 0.0;
    for (std::size_t j = 2; j + 2 < z.size(); j += 7) {
        const CMat dA = (lax_polynomial(T[j - 2], zeta) - 8.0 * lax_polynomial(T[j - 1], zeta) +
                         8.0 * lax_polynomial(T[j + 1], zeta) - lax_polynomial(T[j + 2], zeta)) /
                        (12.0 * h);
        const CMat A = lax_polynomial(T[j], zeta), Ap = a_plus(T[j], zeta);
        worst = std::max(worst, (dA - (Ap * A - A * Ap)).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(CharPoly, MatchesEigenvalues) {
    const auto T = random_triple(3);
    const CMat A = lax_polynomial(T, cplx(0.3, 0.2));
    const auto a = char_poly_coefficients(A);
    Eigen::ComplexEigenSolver<CMat> es(A);
    for (int i = 0; i < 3; ++i) {
        const cplx l = es.eigenvalues()[i];
        EXPECT_LT(std::abs(l * l * l + a[0] * l * l + a[1] * l + a[2]), 1e-12);
    }
    EXPECT_LT(std::abs(a[0] + A.trace()), 1e-14);
    EXPECT_LT(std::abs(a[2] + A.determinant()), 1e-13);
}

TEST(NahmCurve, PointDataCentre) {
    const Vec3 p(0.3, -0.2, 0.5);
    const auto fit = nahm_spectral_curve(nahm_point(p), zeta_samples());
    EXPECT_LT(fit.residual, 1e-13);
    EXPECT_LT((centre_of(fit.poly) - p).norm(), 1e-13);
    const Vec3 q(-1.0, 2.0, 0.25);
    EXPECT_LT(std::abs(fit.poly.evaluate(eta_of_point(p, cplx(0.2, 0.3)), cplx(0.2, 0.3))), 1e-13);
    EXPECT_GT(std::abs(fit.poly.evaluate(eta_of_point(q, cplx(0.2, 0.3)), cplx(0.2, 0.3))), 0.1);
}

TEST(NahmCurve, PoleSolutionIsEtaSquared) {
    const auto data = nahm_pole_solution(su2_triple(2));
    for (double z : {-0.5, 0.0, 0.6, 0.9}) {
        const auto fit = nahm_spectral_curve(data, zeta_samples(), z);
        for (int i = 1; i <= 2; ++i)
            for (const cplx& c : fit.poly.coeffs(i)) EXPECT_LT(std::abs(c), 1e-12) << z;
    }
}

TEST(NahmCurve, DegreeBoundsAndReality) {
    for (int k = 2; k <= 3; ++k) {
        const auto T = random_triple(k);
        const auto data = NahmData::constant(T);
        const auto fit = nahm_spectral_curve(data, zeta_samples());
        for (int i = 1; i <= k; ++i) EXPECT_EQ(fit.poly.coeffs(i).size(), std::size_t(2 * i + 1));
        EXPECT_LT(fit.residual, 1e-12);
        EXPECT_LT(reality_defect(fit.poly), 1e-8);
    }
}

TEST(NahmCurve, NeedsEnoughZetas) {
    EXPECT_THROW(nahm_spectral_curve(nahm_torus(), {cplx(0.1), cplx(0.2), cplx(0.3)}), ValidationError);
}

TEST(Conservation, ConstantsGiveZero) {
    EXPECT_EQ(conservation_report(nahm_point(Vec3(1, 2, 3)), zeta_samples()), 0.0);
}

TEST(Conservation, RandomK2AndK3) {
    EvolveOptions opt;
    opt.tol = 1e-10;
    const auto t2 = evolve(random_triple(2), -0.9, 0.9, opt);
    const auto t3 = evolve(random_triple(3), -0.9, 0.9, opt);
    EXPECT_LT(conservation_report(t2, zeta_samples()), 1e-8);
    EXPECT_LT(conservation_report(t3, zeta_samples()), 1e-7);
}

TEST(Conservation, DriftShrinksWithTolerance) {
    const auto T0 = random_triple(3, 0.4);
    EvolveOptions loose, tight;
    loose.tol = 1e-6;
    tight.tol = 1e-9;
    const double d1 = conservation_report(evolve(T0, -0.9, 0.9, loose), zeta_samples());
    const double d2 = conservation_report(evolve(T0, -0.9, 0.9, tight), zeta_samples());
    EXPECT_LT(d2, d1);
}

TEST(Conservation, TorusCurveIsConstant) {
    const auto data = nahm_torus();
    EXPECT_LT(conservation_report(data, zeta_samples()), 1e-11);
    const auto fit = nahm_spectral_curve(data, zeta_samples());
    EXPECT_LT(reality_defect(fit.poly), 1e-10);
}

TEST(NahmResidual, ConstantData) { EXPECT_LT(nahm_residual(nahm_point(Vec3(0.1, 0.2, 0.3))), 1e-14); }

TEST(NahmResidual, SecondOrderOnTrajectory) {
    const auto T0 = random_triple(2, 0.4);
    EvolveOptions a, b;
    a.n_samples = 181;
    b.n_samples = 361;
    a.tol = b.tol = 1e-12;
    const double r1 = nahm_residual(evolve(T0, -0.9, 0.9, a));
    const double r2 = nahm_residual(evolve(T0, -0.9, 0.9, b));
    EXPECT_NEAR(std::log2(r1 / r2), 2.0, 0.2);
}

TEST(NahmResidual, DetectsNoise) {
    const auto traj = evolve(random_triple(2), -0.9, 0.9);
    auto T = traj.samples();
    std::mt19937_64 g(7);
    std::normal_distribution<double> n(0.0, 1e-3);
    for (auto& t : T)
        for (auto& m : t)
            for (int i = 0; i < m.size(); ++i) m.data()[i] += cplx(n(g), n(g));
    const auto noisy = NahmData::sampled(traj.z_samples(), T);
    EXPECT_GT(nahm_residual(noisy), 1e-4);
    EXPECT_THROW(nahm_residual(NahmData::sampled({0.0, 0.1}, {T[0], T[1]})), ValidationError);
}

TEST(PoleFamily, SolvesPointwise) {
    for (int k = 2; k <= 3; ++k) {
        const auto rho = su2_triple(k);
        for (double c : {1.0, 1.4, 3.0}) {
            const auto data = nahm_pole_solution(rho, c);
            for (double z : {-0.9, -0.2, 0.3, 0.8}) {
                const double f = 1.0 / (c - z);
                EXPECT_LT(max_diff(nahm_rhs(data.at(z)), scaled(rho, f * f)), 1e-10);
            }
        }
    }
}

TEST(Torus, SolvesPointwiseAndHasResidues) {
    const auto data = nahm_torus();
    const double q = 0.5 * std::numbers::pi;
    const auto rho = su2_triple(2);
    for (double z : {-0.95, -0.3, 0.0, 0.5, 0.97}) {
        const double d1 = q * q * std::sin(q * z) / std::pow(std::cos(q * z), 2);
        const double d3 = q * q / std::pow(std::cos(q * z), 2);
        const NahmTriple dT{d1 * rho[0], d1 * rho[1], d3 * rho[2]};
        EXPECT_LT(max_diff(nahm_rhs(data.at(z)), dT), 1e-10 * (1 + d3));
    }
    ASSERT_TRUE(data.pole_meta().complete());
    const double e = 1e-7;
    EXPECT_LT(max_diff(scaled(data.at(1 - e), e), *data.pole_meta().plus), 1e-6);
    EXPECT_LT(max_diff(scaled(data.at(-1 + e), e), *data.pole_meta().minus), 1e-6);
    EXPECT_NEAR(data.z_samples().front(), -0.95, 1e-15);
}
