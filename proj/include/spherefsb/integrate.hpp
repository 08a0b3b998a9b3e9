// Adaptive integrators.
//
//  * integrate_dopri_through: Dormand-Prince 5(4) embedded pair with a
//    proportional-integral step controller, for small fixed-size vector
//    states.  An optional per-step projection keeps constrained states (unit
//    vectors) on their manifold.
//
//  * integrate_cf4_through: 4th-order commutator-free Lie-group stepper on
//    SO(3) for equations A' = A * cross_matrix(w(t, A)).  Every update is a
//    product of exponentials, so iterates stay orthonormal to round-off; for
//    a constant generator each step is exact.  Error control by step doubling
//    with the same PI controller.
//
// Both walk through a strictly increasing checkpoint list, landing on every
// checkpoint exactly (no interpolation) and invoking a sink there, while the
// adaptive step size persists across checkpoints.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spherefsb/errors.hpp"
#include "spherefsb/so3.hpp"

namespace spherefsb {

struct StepControl {
    double rel = 1e-10;
    double abs = 1e-10;
    double hmax = std::numeric_limits<double>::infinity();
    double safety = 0.9;
};

namespace detail {

inline void check_checkpoints(const std::vector<double>& times) {
    if (times.size() < 2) {
        throw ValidationError("integrator: need at least start and end checkpoints");
    }
    for (size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw ValidationError("integrator: checkpoints must be strictly increasing");
        }
    }
}

// PI controller: new step from the current and previous scaled error norms.
// `order` is the order of the error estimator (estimate ~ h^{order+1}).
inline double pi_step_factor(double err, double err_prev, int order, double safety) {
    const double k = 1.0 / (order + 1.0);
    const double e = std::max(err, 1e-10);
    const double ep = std::max(err_prev, 1e-10);
    const double factor = safety * std::pow(e, -0.7 * k) * std::pow(ep, 0.4 * k);
    return std::clamp(factor, 0.2, 5.0);
}

inline void check_step_not_underflowed(double h, double t_scale) {
    if (!(h > 1e-14 * std::max(1.0, t_scale))) {
        throw StepSizeUnderflow("integrator: step size underflow (h = " + std::to_string(h) +
                                ")");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

// f          : (t, y) -> dy/dt
// project    : y -> void, applied in place after each accepted step
// sink       : (t, y) called at every checkpoint except the first
template <int N, class F, class Project, class Sink>
void integrate_dopri_through(F&& f, const std::vector<double>& times,
                             Eigen::Matrix<double, N, 1>& y, const StepControl& ctrl,
                             Project&& project, Sink&& sink) {
    using State = Eigen::Matrix<double, N, 1>;
    detail::check_checkpoints(times);
    const double t_scale = std::max(std::abs(times.front()), std::abs(times.back()));

    double h = std::min({ctrl.hmax, (times.back() - times.front()) / 16.0});
    double err_prev = 1.0;

    double t = times.front();
    for (size_t seg = 1; seg < times.size(); ++seg) {
        const double t_target = times[seg];
        while (t < t_target) {
            double hs = std::min(h, ctrl.hmax);
            bool last = false;
            // Stretch up to 1% so grid-aligned steps cannot leave a one-ulp
            // sliver behind (which would trip the underflow floor).
            if (1.01 * hs >= t_target - t) {
                hs = t_target - t;
                last = true;
            }
            detail::check_step_not_underflowed(hs, t_scale);

            const State k1 = f(t, y);
            const State k2 = f(t + hs / 5.0, State(y + hs * (k1 / 5.0)));
            const State k3 =
                f(t + 3.0 * hs / 10.0, State(y + hs * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2)));
            const State k4 = f(t + 4.0 * hs / 5.0,
                               State(y + hs * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3)));
            const State k5 =
                f(t + 8.0 * hs / 9.0,
                  State(y + hs * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                  64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4)));
            const State k6 = f(t + hs, State(y + hs * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                                       46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                                       5103.0 / 18656.0 * k5)));
            const State y5 = y + hs * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                                       125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
            const State k7 = f(t + hs, y5);

            const State err_vec =
                hs * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4 -
                      17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7);
            double err_sq = 0.0;
            for (int i = 0; i < N; ++i) {
                const double scale =
                    ctrl.abs + ctrl.rel * std::max(std::abs(y[i]), std::abs(y5[i]));
                const double e = err_vec[i] / scale;
                err_sq += e * e;
            }
            const double err = std::sqrt(err_sq / N);

            if (err <= 1.0) {
                t = last ? t_target : t + hs;
                y = y5;
                project(y);
                h = hs * detail::pi_step_factor(err, err_prev, 4, ctrl.safety);
                err_prev = err;
            } else {
                h = hs * std::clamp(ctrl.safety * std::pow(err, -0.2), 0.1, 0.9);
            }
        }
        t = t_target;
        sink(t, y);
    }
}

// ---------------------------------------------------------------------------
// Commutator-free 4th order on SO(3)
// ---------------------------------------------------------------------------

namespace detail {
inline Mat3 exp_axis(const Vec3& v) { return exp_so3(AlgebraElement(v), 1.0).matrix(); }
} // namespace detail

// One CF4 step of size h for A' = A * cross_matrix(w(t, A)).
template <class W>
Mat3 cf4_step(W&& w, double t, const Mat3& a, double h) {
    const Vec3 k1 = w(t, a);
    const Mat3 a2 = a * detail::exp_axis(0.5 * h * k1);
    const Vec3 k2 = w(t + 0.5 * h, a2);
    const Mat3 a3 = a * detail::exp_axis(0.5 * h * k2);
    const Vec3 k3 = w(t + 0.5 * h, a3);
    const Mat3 a4 = a2 * detail::exp_axis(h * k3 - 0.5 * h * k1);
    const Vec3 k4 = w(t + h, a4);
    return a * detail::exp_axis(h / 12.0 * (3.0 * k1 + 2.0 * k2 + 2.0 * k3 - k4)) *
           detail::exp_axis(h / 12.0 * (-k1 + 2.0 * k2 + 2.0 * k3 + 3.0 * k4));
}

// Adaptive CF4 by step doubling.  `w(t, A)` returns the generator axis;
// `sink(t, A)` fires at every checkpoint except the first.
template <class W, class Sink>
void integrate_cf4_through(W&& w, const std::vector<double>& times, Mat3& a,
                           const StepControl& ctrl, Sink&& sink) {
    detail::check_checkpoints(times);
    const double t_scale = std::max(std::abs(times.front()), std::abs(times.back()));
    const double err_scale = ctrl.abs + ctrl.rel; // rotation entries are O(1)

    double h = std::min(ctrl.hmax, (times.back() - times.front()) / 16.0);
    double err_prev = 1.0;

    double t = times.front();
    for (size_t seg = 1; seg < times.size(); ++seg) {
        const double t_target = times[seg];
        while (t < t_target) {
            double hs = std::min(h, ctrl.hmax);
            bool last = false;
            // Stretch up to 1% so grid-aligned steps cannot leave a one-ulp
            // sliver behind (which would trip the underflow floor).
            if (1.01 * hs >= t_target - t) {
                hs = t_target - t;
                last = true;
            }
            detail::check_step_not_underflowed(hs, t_scale);

            const Mat3 full = cf4_step(w, t, a, hs);
            const Mat3 half = cf4_step(w, t, a, 0.5 * hs);
            const Mat3 two_halves = cf4_step(w, t + 0.5 * hs, half, 0.5 * hs);
            const double err = (full - two_halves).cwiseAbs().maxCoeff() / 15.0 / err_scale;

            if (err <= 1.0) {
                t = last ? t_target : t + hs;
                a = two_halves;
                if (orthogonality_error_of(a) > tol::renorm_trigger) {
                    a = polar_orthonormalize(a);
                }
                h = hs * detail::pi_step_factor(err, err_prev, 4, ctrl.safety);
                err_prev = err;
            } else {
                h = hs * std::clamp(ctrl.safety * std::pow(err, -0.2), 0.1, 0.9);
            }
        }
        t = t_target;
        sink(t, a);
    }
}

} // namespace spherefsb
