#pragma once

// Charge-one BPS monopole centred at an arbitrary point.
//
//   Phi = f(r) (y.e),        f = phi/r,  phi = 1/r - coth r
//   A_j = g(r) [y.e, e^j],   g = a/r,    a   = 1/sinh r - 1/r
//
// with y = x - p. Below kSeriesRadius the profiles come from their Taylor
// series (Bernoulli numbers) to avoid cancellation in 1/r - coth r.

#include <array>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include "monopole/fields.hpp"

namespace monopole {

namespace bps_detail {

inline constexpr double kSeriesRadius = 0.5;
inline constexpr int kSeriesTerms = 20;

// phi(r) = sum_n cp[n] r^(2n-1), a(r) = sum_n ca[n] r^(2n-1), n >= 1
struct Coefficients {
    std::array<double, kSeriesTerms + 1> cp{}, ca{};
    Coefficients() {
        for (int n = 1; n <= kSeriesTerms; ++n) {
            const double b = boost::math::bernoulli_b2n<double>(n);
            const double fact = boost::math::factorial<double>(2 * n);
            const double p2n = std::ldexp(1.0, 2 * n);
            cp[n] = -p2n * b / fact;
            ca[n] = 2.0 * (1.0 - 0.5 * p2n) * b / fact;
        }
    }
};

inline const Coefficients& coeffs() {
    static const Coefficients c;
    return c;
}

struct Profile {
    double f, fp_over_r;  // phi/r and (d/dr)(phi/r) / r
    double g, gp_over_r;  // a/r and (d/dr)(a/r) / r
};

inline Profile profile(double r) {
    Profile p{};
    if (r < kSeriesRadius) {
        const auto& c = coeffs();
        const double r2 = r * r;
        // phi/r = sum c[n] r^(2n-2); its derivative over r = sum (2n-2) c[n] r^(2n-4)
        double pw = 1.0;  // r^(2n-2)
        double pwm = 1.0; // r^(2n-4) for n >= 2
        for (int n = 1; n <= kSeriesTerms; ++n) {
            p.f += c.cp[n] * pw;
            p.g += c.ca[n] * pw;
            if (n >= 2) {
                p.fp_over_r += (2.0 * n - 2.0) * c.cp[n] * pwm;
                p.gp_over_r += (2.0 * n - 2.0) * c.ca[n] * pwm;
                pwm *= r2;
            }
            pw *= r2;
        }
        return p;
    }
    const double cth = 1.0 / std::tanh(r);
    const double csch = 1.0 / std::sinh(r);
    const double phi = 1.0 / r - cth;
    const double dphi = -1.0 / (r * r) + csch * csch;
    const double a = csch - 1.0 / r;
    const double da = -csch * cth + 1.0 / (r * r);
    p.f = phi / r;
    p.fp_over_r = (dphi / r - phi / (r * r)) / r;
    p.g = a / r;
    p.gp_over_r = (da / r - a / (r * r)) / r;
    return p;
}

}  // namespace bps_detail

/// coth r - 1/r, the norm of the BPS Higgs field at distance r.
inline double bps_higgs_norm(double r) {
    if (r < bps_detail::kSeriesRadius) return -r * bps_detail::profile(r).f;
    return 1.0 / std::tanh(r) - 1.0 / r;
}

inline FieldConfiguration bps_config(const Vec3& p = Vec3::Zero()) {
    const auto E = basis::all();
    auto value = [p, E](const Vec3& x) {
        const Vec3 y = x - p;
        const auto pr = bps_detail::profile(y.norm());
        const Su2Element ye = Su2Element::from_components(y);
        FieldValue v;
        v.Phi = pr.f * ye;
        for (int j = 0; j < 3; ++j) v.A[j] = pr.g * bracket(ye, E[j]);
        return v;
    };
    auto jet = [p, E](const Vec3& x) {
        const Vec3 y = x - p;
        const auto pr = bps_detail::profile(y.norm());
        const Su2Element ye = Su2Element::from_components(y);
        std::array<Su2Element, 3> ye_ej;
        for (int j = 0; j < 3; ++j) ye_ej[j] = bracket(ye, E[j]);
        FieldJet out;
        out.value.Phi = pr.f * ye;
        for (int j = 0; j < 3; ++j) out.value.A[j] = pr.g * ye_ej[j];
        for (int i = 0; i < 3; ++i) {
            out.dPhi[i] = (pr.fp_over_r * y[i]) * ye + pr.f * E[i];
            for (int j = 0; j < 3; ++j)
                out.dA[i][j] = (pr.gp_over_r * y[i]) * ye_ej[j] + pr.g * bracket(E[i], E[j]);
        }
        return out;
    };
    return FieldConfiguration(value, 1, 1.0, jet);
}

/// The closed-form energy density
///   6/tanh^4 r - 8/tanh^2 r + 2 + 2/r^4 - 8/(r tanh^3 r) + 8/(r tanh r),
/// which equals Lap(phi^2). Small r uses the series of Lap(phi^2).
inline double bps_energy_density_closed(double r) {
    if (r < 0.0) throw ValidationError("bad-radius", "r must be >= 0");
    if (r < bps_detail::kSeriesRadius) {
        // phi^2 = sum_m s_m r^(2m), Lap r^(2m) = 2m(2m+1) r^(2m-2)
        const auto& c = bps_detail::coeffs().cp;
        double e = 0.0, pw = 1.0;
        for (int m = 1; m < bps_detail::kSeriesTerms; ++m) {
            double s = 0.0;
            for (int n = 1; n <= m; ++n) s += c[n] * c[m + 1 - n];
            e += 2.0 * m * (2.0 * m + 1.0) * s * pw;
            pw *= r * r;
        }
        return e;
    }
    const double t = std::tanh(r);
    const double t2 = t * t;
    const double r4 = r * r * r * r;
    return 6.0 / (t2 * t2) - 8.0 / t2 + 2.0 + 2.0 / r4 - 8.0 / (r * t2 * t) + 8.0 / (r * t);
}

}  // namespace monopole
