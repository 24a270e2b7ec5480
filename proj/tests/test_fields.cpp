#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "monopole/bps.hpp"
#include "monopole/fields.hpp"
#include "test_util.hpp"

using namespace monopole;
using namespace testutil;

namespace {

FieldConfiguration zero_config() {
    return FieldConfiguration([](const Vec3&) { return FieldValue{}; }, 0, 0.0,
                              [](const Vec3&) { return FieldJet{}; });
}

// Smooth field with polynomial coefficients; not a Bogomolny solution.
FieldConfiguration polynomial_config() {
    return FieldConfiguration(
        [](const Vec3& x) {
            FieldValue v;
            v.A[0] = Su2Element::from_components(Vec3(0.3 * x[1], 0.2 * x[2] * x[2], -0.1));
            v.A[1] = Su2Element::from_components(Vec3(0.5 * x[0] * x[2], 0.0, 0.4 * x[1]));
            v.A[2] = Su2Element::from_components(Vec3(-0.2, 0.7 * x[0], 0.1 * x[0] * x[1]));
            v.Phi = Su2Element::from_components(Vec3(x[0] * x[1], 0.5 + x[2], -0.3 * x[0]));
            return v;
        },
        1);
}

double max_diff(const Vec3Array& a, const Vec3Array& b) {
    double m = 0.0;
    for (int i = 0; i < 3; ++i) m = std::max(m, norm(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(Curvature, VacuumVanishes) {
    const auto cfg = vacuum();
    const Vec3 x = random_vec(3.0);
    for (const auto& F : curvature(cfg, x)) EXPECT_LT(norm(F), 1e-15);
    for (const auto& D : cov_deriv_higgs(cfg, x)) EXPECT_LT(norm(D), 1e-15);
    EXPECT_EQ(bogomolny_residual(cfg, x), 0.0);
    EXPECT_EQ(energy_density(cfg, x), 0.0);
    // finite-difference path as well
    EXPECT_LT(bogomolny_residual(cfg.without_derivatives(), x), 1e-12);
}

TEST(Curvature, RejectsTinyStep) {
    const auto cfg = bps_config();
    EXPECT_THROW(curvature(cfg.without_derivatives(), Vec3(1, 0, 0), 1e-9), ValidationError);
    EXPECT_THROW(bogomolny_residual(cfg, Vec3(1, 0, 0), 0.0), ValidationError);
}

TEST(Curvature, FiniteDifferenceConvergesAtSecondOrder) {
    const auto cfg = bps_config(Vec3(0.1, 0.2, -0.1));
    const auto fd = cfg.without_derivatives();
    for (int n = 0; n < 5; ++n) {
        const Vec3 x = random_in_ball(2.0) + Vec3(0.3, 0.3, 0.3);
        const auto exact = curvature(cfg, x);
        const double e1 = max_diff(curvature(fd, x, 1e-2), exact);
        const double e2 = max_diff(curvature(fd, x, 5e-3), exact);
        EXPECT_GE(std::log2(e1 / e2), 1.9) << "e1=" << e1 << " e2=" << e2;
        const auto dexact = cov_deriv_higgs(cfg, x);
        const double d1 = max_diff(cov_deriv_higgs(fd, x, 1e-2), dexact);
        const double d2 = max_diff(cov_deriv_higgs(fd, x, 5e-3), dexact);
        EXPECT_GE(std::log2(d1 / d2), 1.9);
    }
}

TEST(Curvature, PureGaugeIsFlat) {
    const auto gt = GaugeTransform::bump(random_su2(), Vec3(0.2, -0.1, 0.3), 2.0, 1.5)
                        .compose(GaugeTransform::constant(random_group()));
    const auto cfg = gauge_apply(zero_config(), gt);
    const double h = 1e-3;
    for (int n = 0; n < 20; ++n) {
        const Vec3 x = random_in_ball(2.0);
        for (const auto& F : curvature(cfg.without_derivatives(), x, h)) EXPECT_LT(norm(F), 10 * h * h);
        // the analytic gauge jet gives exact flatness
        for (const auto& F : curvature(cfg, x)) EXPECT_LT(norm(F), 1e-12);
    }
}

TEST(CovDeriv, LinearHiggs) {
    const FieldConfiguration cfg(
        [](const Vec3& x) {
            FieldValue v;
            v.Phi = x[0] * basis::e1();
            return v;
        },
        0);
    const auto D = cov_deriv_higgs(cfg, Vec3(0.4, -1.0, 2.0));
    EXPECT_LT(norm(D[0] - basis::e1()), 1e-10);
    EXPECT_LT(norm(D[1]), 1e-12);
    EXPECT_LT(norm(D[2]), 1e-12);
}

TEST(CovDeriv, BpsNormIsRadial) {
    const Vec3 p(0.3, -0.2, 0.5);
    const auto cfg = bps_config(p);
    for (double R : {0.3, 1.0, 2.5}) {
        double lo = 1e300, hi = -1e300;
        for (int n = 0; n < 30; ++n) {
            const auto D = cov_deriv_higgs(cfg, p + R * random_unit());
            const double s = std::sqrt(inner(D[0], D[0]) + inner(D[1], D[1]) + inner(D[2], D[2]));
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        EXPECT_LT(hi - lo, 1e-8);
    }
}

TEST(Bogomolny, BpsAnalyticPoint) {
    EXPECT_LT(bogomolny_residual(bps_config(), Vec3(0.7, -0.3, 0.2)), 1e-10);
}

TEST(Bogomolny, GenericFieldFails) {
    const auto cfg = polynomial_config();
    for (int n = 0; n < 10; ++n) EXPECT_GT(bogomolny_residual(cfg, random_in_ball(2.0)), 0.01);
}

TEST(Energy, BpsCentreValues) {
    const auto cfg = bps_config();
    const Vec3 x(1e-4, 0, 0);
    EXPECT_NEAR(energy_density(cfg, x, kDefaultStep, EnergyNormalization::laplacian), 2.0 / 3.0, 1e-7);
    EXPECT_NEAR(energy_density(cfg, x), 0.25, 1e-7);
}

TEST(Energy, NormalizationsDifferByEightThirdsOnSolutions) {
    const auto cfg = bps_config(Vec3(0.1, 0.0, 0.0));
    for (int n = 0; n < 10; ++n) {
        const Vec3 x = random_in_ball(3.0);
        const double printed = energy_density(cfg, x);
        const double lap = energy_density(cfg, x, kDefaultStep, EnergyNormalization::laplacian);
        EXPECT_NEAR(lap, 8.0 / 3.0 * printed, 1e-10);
    }
}

TEST(Energy, LaplacianMatchesClosedFormAtOne) {
    const auto cfg = bps_config();
    const double h = 1e-3;
    const double fd = energy_density_laplacian(cfg, Vec3(0.6, 0.0, 0.8), h);
    EXPECT_NEAR(fd, 0.43609029934483986189, 10 * h * h);
    EXPECT_NEAR(fd, energy_density(cfg, Vec3(0.6, 0.0, 0.8), kDefaultStep, EnergyNormalization::laplacian), 10 * h * h);
}

TEST(Energy, LaplacianLimits) {
    const auto cfg = bps_config();
    EXPECT_NEAR(energy_density_laplacian(cfg, Vec3(0, 0, 0), 1e-3), 2.0 / 3.0, 1e-5);
    EXPECT_LT(energy_density_laplacian(cfg, Vec3(0, 0, 30.0), 1e-2), 1e-4);
}

TEST(Energy, NonNegative) {
    const auto cfg = polynomial_config();
    for (int n = 0; n < 20; ++n) EXPECT_GE(energy_density(cfg, random_in_ball(2.0)), 0.0);
}

TEST(Gauge, IdentityLeavesFieldsUnchanged) {
    const auto cfg = bps_config(Vec3(0.2, 0.1, 0.0));
    const auto g = gauge_apply(cfg, GaugeTransform::identity());
    const Vec3 x = random_vec(2.0);
    const auto a = cfg.eval(x), b = g.eval(x);
    EXPECT_LT(norm(a.Phi - b.Phi), 1e-15);
    for (int i = 0; i < 3; ++i) EXPECT_LT(norm(a.A[i] - b.A[i]), 1e-15);
}

TEST(Gauge, ConstantTransformConjugates) {
    const auto cfg = bps_config(Vec3(0.2, 0.1, 0.0));
    const auto G = random_group();
    const auto g = gauge_apply(cfg, GaugeTransform::constant(G));
    for (int n = 0; n < 20; ++n) {
        const Vec3 x = random_in_ball(3.0);
        const auto a = cfg.eval(x), b = g.eval(x);
        EXPECT_LT(norm(G.conjugate(a.Phi) - b.Phi), 1e-14);
        for (int i = 0; i < 3; ++i) EXPECT_LT(norm(G.conjugate(a.A[i]) - b.A[i]), 1e-14);
        EXPECT_NEAR(bogomolny_residual(g, x), bogomolny_residual(cfg, x), 1e-12);
    }
}

TEST(Gauge, BumpTransformPreservesInvariants) {
    const auto cfg = bps_config(Vec3(0.2, 0.1, 0.0));
    const auto g = gauge_apply(cfg, GaugeTransform::bump(basis::e3(), Vec3(0.5, 0.0, 0.0), 1.7, 1.2));
    for (int n = 0; n < 20; ++n) {
        const Vec3 x = random_in_ball(3.0);
        EXPECT_NEAR(norm(g.higgs(x)), norm(cfg.higgs(x)), 1e-12);
        EXPECT_NEAR(energy_density(g, x), energy_density(cfg, x), 1e-8);
        EXPECT_LT(bogomolny_residual(g, x), 1e-10);
        // the finite-difference path agrees within O(h^2)
        EXPECT_NEAR(energy_density(g.without_derivatives(), x, 1e-4), energy_density(cfg, x), 1e-6);
    }
}

TEST(Gauge, GenericFieldInvariantsPreserved) {
    const auto cfg = polynomial_config();
    const auto g = gauge_apply(cfg, GaugeTransform::bump(random_su2(), Vec3(0.0, 0.3, 0.0), 1.1, 0.9));
    for (int n = 0; n < 10; ++n) {
        const Vec3 x = random_in_ball(1.5);
        EXPECT_NEAR(energy_density(g, x, 1e-4), energy_density(cfg, x, 1e-4), 1e-6);
        EXPECT_NEAR(bogomolny_residual(g, x, 1e-4), bogomolny_residual(cfg, x, 1e-4), 1e-6);
    }
}

TEST(Scale, UnitScaleIsIdentity) {
    const auto cfg = bps_config(Vec3(0.1, 0.2, 0.3));
    const auto s = scale(cfg, 1.0);
    const Vec3 x = random_vec(2.0);
    EXPECT_LT(norm(s.higgs(x) - cfg.higgs(x)), 1e-15);
    EXPECT_THROW(scale(cfg, 0.0), ValidationError);
}

TEST(Scale, PreservesBogomolny) {
    const auto s = scale(bps_config(), 2.0);
    EXPECT_DOUBLE_EQ(s.asymptotic_norm(), 2.0);
    for (int n = 0; n < 20; ++n) {
        const Vec3 x = random_in_ball(3.0);
        EXPECT_LT(bogomolny_residual(s, x), 1e-9);
        EXPECT_LT(bogomolny_residual(s.without_derivatives(), x, 1e-4), 1e-6);
    }
    EXPECT_NEAR(norm(s.higgs(Vec3(0, 0, 500.0))), 2.0, 1e-2);
}

TEST(Rotate, RotatedBpsIsBpsAtRotatedCentre) {
    const Vec3 p(0.3, -0.2, 0.5);
    const Eigen::Matrix3d R = rotation(Vec3(1, 2, -1), 0.9);
    const auto rc = rotate(bps_config(p), R);
    const auto ref = bps_config(R * p);
    for (int n = 0; n < 10; ++n) {
        const Vec3 x = random_in_ball(3.0);
        EXPECT_NEAR(norm(rc.higgs(x)), norm(ref.higgs(x)), 1e-13);
        EXPECT_LT(bogomolny_residual(rc, x), 1e-10);
        EXPECT_NEAR(energy_density(rc, x), energy_density(ref, x), 1e-12);
    }
}

TEST(TotalEnergy, BpsIsEightPi) {
    const auto rep = total_energy(bps_config(), {10.0, 20.0, 40.0});
    EXPECT_NEAR(rep.flux_extrapolated, 4.0 * std::numbers::pi, 1e-5);
    EXPECT_NEAR(rep.energy / (8.0 * std::numbers::pi), 1.0, 5e-3);
    // surface-flux oracle 4 pi R^2 phi phi'
    EXPECT_NEAR(rep.flux[0], 11.309724280286302674, 1e-8);
}

TEST(TotalEnergy, OffCentreBps) {
    const auto rep = total_energy(bps_config(Vec3(0.3, -0.2, 0.5)), {10.0, 20.0, 40.0});
    EXPECT_NEAR(rep.energy / (8.0 * std::numbers::pi), 1.0, 5e-3);
}

TEST(TotalEnergy, VacuumIsZero) {
    const auto rep = total_energy(vacuum(), {5.0, 10.0, 20.0});
    EXPECT_NEAR(rep.energy, 0.0, 1e-12);
}

TEST(TotalEnergy, ScalesLinearly) {
    const auto rep = total_energy(scale(bps_config(), 2.0), {10.0, 20.0, 40.0});
    EXPECT_NEAR(rep.energy / (16.0 * std::numbers::pi), 1.0, 1e-2);
}

TEST(TotalEnergy, BoundIdentityOnBall) {
    TotalEnergyOptions opt;
    opt.ball_radial = 48;
    opt.n_theta = 16;
    opt.n_phi = 16;
    const auto rep = total_energy(bps_config(), {5.0}, opt);
    EXPECT_LT(rep.ball_defect, 1e-18);
    EXPECT_NEAR(rep.ball_energy, rep.ball_defect + 2.0 * rep.flux[0], 1e-6);
    // flux at R = 5 from the oracle 4 pi R^2 phi phi'
    EXPECT_NEAR(rep.flux[0], 10.008587255090591505, 1e-8);
}

TEST(TotalEnergy, RejectsBadRadii) {
    EXPECT_THROW(total_energy(vacuum(), {}), ValidationError);
    EXPECT_THROW(total_energy(vacuum(), {2.0, 1.0}), ValidationError);
}

TEST(TotalEnergy, NonConvergenceIsReported) {
    // a field whose flux grows linearly in R cannot be extrapolated
    const FieldConfiguration cfg(
        [](const Vec3& x) {
            FieldValue v;
            const double r = x.norm();
            v.Phi = Su2Element::from_components(x / std::max(r, 1e-12) * std::sqrt(r));
            for (int j = 0; j < 3; ++j)
                v.A[j] = (1.0 / std::max(r * r, 1e-12)) *
                         bracket(Su2Element::from_components(x), basis::e(j));
            return v;
        },
        1);
    EXPECT_THROW(total_energy(cfg, {2.0, 4.0, 8.0}), NumericError);
}
