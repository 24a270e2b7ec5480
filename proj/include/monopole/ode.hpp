#pragma once

// Adaptive Runge-Kutta driver over Boost.Odeint's controlled Dormand-Prince
// stepper. Complex-valued problems are packed into real vectors as
// (re, im) pairs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "monopole/errors.hpp"

namespace monopole {

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double initial_step = 1e-2;
    std::size_t max_steps = 2'000'000;
};

using RealState = std::vector<double>;

/// Integrates `sys(x, dxdt, t)` from t0 through each time in `outputs`
/// (monotone in the direction of integration), calling `observe(i, x)` at
/// each output. An optional `after_step(t, x)` runs after every accepted step
/// and may throw to abort.
template <class System, class Observer>
void integrate_outputs(System&& sys, RealState& x, double t0, const std::vector<double>& outputs,
                       Observer&& observe, const OdeOptions& opt = {},
                       const std::function<void(double, const RealState&)>& after_step = {}) {
    namespace oi = boost::numeric::odeint;
    auto stepper = oi::make_controlled(opt.abs_tol, opt.rel_tol, oi::runge_kutta_dopri5<RealState>());
    double t = t0;
    double dir = 0.0;
    for (double target : outputs) {
        if (target != t0) { dir = target > t0 ? 1.0 : -1.0; break; }
    }
    double dt = dir * opt.initial_step;
    std::size_t steps = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double target = outputs[i];
        while ((target - t) * dir > 0.0) {
            const double remaining = target - t;
            bool clipped = false;
            double trial = dt;
            if (std::abs(trial) >= std::abs(remaining)) { trial = remaining; clipped = true; }
            double tt = t;
            const auto res = stepper.try_step(sys, x, tt, trial);
            if (res == oi::success) {
                // a clipped step should not shrink the running step size
                if (!clipped || std::abs(trial) > std::abs(dt)) dt = trial;
                if (clipped) tt = target;
                t = tt;
                if (after_step) after_step(t, x);
                if (++steps > opt.max_steps)
                    throw NumericError("tolerance-not-met", "step budget exhausted at t=" + std::to_string(t));
            } else {
                dt = trial;
            }
            if (std::abs(dt) < 1e-13 * (1.0 + std::abs(t)))
                throw NumericError("step-underflow", "adaptive step collapsed at t=" + std::to_string(t));
        }
        observe(i, x);
    }
}

/// Single-target convenience wrapper.
template <class System>
void integrate_to(System&& sys, RealState& x, double t0, double t1, const OdeOptions& opt = {}) {
    if (t0 == t1) return;
    integrate_outputs(std::forward<System>(sys), x, t0, std::vector<double>{t1},
                      [](std::size_t, const RealState&) {}, opt);
}

inline void pack(const std::complex<double>* src, std::size_t n, RealState& dst, std::size_t offset = 0) {
    for (std::size_t i = 0; i < n; ++i) {
        dst[offset + 2 * i] = src[i].real();
        dst[offset + 2 * i + 1] = src[i].imag();
    }
}

inline void unpack(const RealState& src, std::size_t n, std::complex<double>* dst, std::size_t offset = 0) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = {src[offset + 2 * i], src[offset + 2 * i + 1]};
}

}  // namespace monopole
