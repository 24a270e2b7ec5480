#pragma once

// Regular 3D grids and a field configuration backed by grid samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "monopole/errors.hpp"
#include "monopole/fields.hpp"
#include "monopole/parallel.hpp"
#include "monopole/su2.hpp"

namespace monopole {

struct GridSpec {
    Vec3 origin = Vec3(-2.0, -2.0, -2.0);
    Vec3 spacing = Vec3(0.2, 0.2, 0.2);
    std::array<int, 3> counts{21, 21, 21};

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (counts[a] < 2) throw ValidationError("bad-grid", "grid counts must be >= 2 per axis");
            if (!(spacing[a] > 0.0)) throw ValidationError("bad-grid", "grid spacing must be positive");
        }
    }

    std::size_t size() const { return std::size_t(counts[0]) * counts[1] * counts[2]; }

    /// Flat index with iz fastest.
    std::size_t index(int ix, int iy, int iz) const {
        return (std::size_t(ix) * counts[1] + iy) * counts[2] + iz;
    }

    std::array<int, 3> unflatten(std::size_t n) const {
        const int iz = static_cast<int>(n % counts[2]);
        n /= counts[2];
        const int iy = static_cast<int>(n % counts[1]);
        return {static_cast<int>(n / counts[1]), iy, iz};
    }

    Vec3 point(int ix, int iy, int iz) const {
        return origin + Vec3(ix * spacing[0], iy * spacing[1], iz * spacing[2]);
    }
    Vec3 point(std::size_t n) const {
        const auto i = unflatten(n);
        return point(i[0], i[1], i[2]);
    }

    Vec3 upper() const {
        return origin + Vec3((counts[0] - 1) * spacing[0], (counts[1] - 1) * spacing[1], (counts[2] - 1) * spacing[2]);
    }

    bool contains(const Vec3& x) const {
        const Vec3 hi = upper();
        for (int a = 0; a < 3; ++a)
            if (x[a] < origin[a] || x[a] > hi[a]) return false;
        return true;
    }

    /// Cube [-L, L]^3 with n points per axis.
    static GridSpec cube(double L, int n) {
        GridSpec g;
        g.origin = Vec3(-L, -L, -L);
        const double h = 2.0 * L / (n - 1);
        g.spacing = Vec3(h, h, h);
        g.counts = {n, n, n};
        return g;
    }

    static GridSpec centred(const Vec3& c, double L, int n) {
        GridSpec g = cube(L, n);
        g.origin += c;
        return g;
    }
};

/// Evaluates f at every grid point. Deterministic for any thread count.
template <class T, class F>
std::vector<T> sample_grid(const GridSpec& g, F&& f, int threads = 0) {
    g.validate();
    std::vector<T> out(g.size());
    parallel_for(g.size(), [&](std::size_t n) { out[n] = f(g.point(n)); }, threads);
    return out;
}

namespace grid_detail {

/// Cubic Lagrange weights on nodes 0,1,2,3 at fractional position s.
inline std::array<double, 4> cubic_weights(double s) {
    return {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0, -s * (s - 1) * (s - 3) / 2.0,
            s * (s - 1) * (s - 2) / 6.0};
}

}  // namespace grid_detail

/// Field sampled on a grid: tricubic Lagrange interpolation inside the box,
/// `fallback` (if given) outside it or where a stencil point failed.
inline FieldConfiguration sampled_field(const GridSpec& g, std::vector<FieldValue> values, int charge,
                                        double asymptotic_norm = 1.0, std::vector<char> valid = {},
                                        FieldConfiguration::ValueFn fallback = {}) {
    g.validate();
    if (values.size() != g.size()) throw ValidationError("shape-mismatch", "value count does not match the grid");
    for (int a = 0; a < 3; ++a)
        if (g.counts[a] < 4) throw ValidationError("bad-grid", "interpolation needs >= 4 points per axis");
    if (valid.empty()) valid.assign(values.size(), 1);
    struct Store {
        GridSpec g;
        std::vector<FieldValue> v;
        std::vector<char> ok;
        FieldConfiguration::ValueFn fallback;
    };
    auto st = std::make_shared<const Store>(Store{g, std::move(values), std::move(valid), std::move(fallback)});
    auto fn = [st](const Vec3& x) -> FieldValue {
        const GridSpec& g = st->g;
        auto outside = [&]() -> FieldValue {
            if (st->fallback) return st->fallback(x);
            throw ValidationError("out-of-grid", "point outside the sampled box and no fallback set");
        };
        if (!g.contains(x)) return outside();
        std::array<int, 3> base;
        std::array<std::array<double, 4>, 3> w;
        for (int a = 0; a < 3; ++a) {
            const double u = (x[a] - g.origin[a]) / g.spacing[a];
            int b = static_cast<int>(std::floor(u)) - 1;
            b = std::clamp(b, 0, g.counts[a] - 4);
            base[a] = b;
            w[a] = grid_detail::cubic_weights(u - b);
        }
        Mat2 A[3] = {Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
        Mat2 P = Mat2::Zero();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int l = 0; l < 4; ++l) {
                    const std::size_t n = g.index(base[0] + i, base[1] + j, base[2] + l);
                    if (!st->ok[n]) return outside();
                    const double c = w[0][i] * w[1][j] * w[2][l];
                    const FieldValue& f = st->v[n];
                    for (int a = 0; a < 3; ++a) A[a] += c * f.A[a].matrix();
                    P += c * f.Phi.matrix();
                }
        return FieldValue{{Su2Element(A[0]), Su2Element(A[1]), Su2Element(A[2])}, Su2Element(P)};
    };
    return FieldConfiguration(fn, charge, asymptotic_norm);
}

/// Bogomolny residual at each interior node from central differences of the
/// stored samples. Boundary nodes, and nodes next to invalid samples, get NaN.
inline std::vector<double> grid_bogomolny_residuals(const GridSpec& g, const std::vector<FieldValue>& values,
                                                    const std::vector<char>& valid = {}) {
    g.validate();
    if (values.size() != g.size()) throw ValidationError("shape-mismatch", "value count does not match the grid");
    auto ok = [&](std::size_t n) { return valid.empty() || valid[n]; };
    std::vector<double> out(g.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto c = g.unflatten(n);
        bool inside = ok(n);
        std::size_t nb[3][2];
        for (int i = 0; i < 3 && inside; ++i) {
            if (c[i] == 0 || c[i] == g.counts[i] - 1) {
                inside = false;
                break;
            }
            auto lo = c, hi = c;
            --lo[i];
            ++hi[i];
            nb[i][0] = g.index(lo[0], lo[1], lo[2]);
            nb[i][1] = g.index(hi[0], hi[1], hi[2]);
            inside = ok(nb[i][0]) && ok(nb[i][1]);
        }
        if (!inside) continue;
        FieldJet j;
        j.value = values[n];
        for (int i = 0; i < 3; ++i) {
            const double s = 0.5 / g.spacing[i];
            const FieldValue& m = values[nb[i][0]];
            const FieldValue& p = values[nb[i][1]];
            for (int a = 0; a < 3; ++a) j.dA[i][a] = s * (p.A[a] - m.A[a]);
            j.dPhi[i] = s * (p.Phi - m.Phi);
        }
        out[n] = bogomolny_residual_from_jet(j);
    }
    return out;
}

}  // namespace monopole
