// First-order angular drift of the return map over one turn of the chart
// longitude:
//
//   I(phi) = integral_0^{2pi} [ G2(s(phi,t)) cos t - G3(s(phi,t)) sin t ] dt,
//
// with s(phi, t) the chart point at colatitude phi and longitude t.  Simple
// zeros of I are the colatitudes where an invariant circle of the
// unperturbed flow survives as a periodic orbit of the projected flow; the
// sign of I' there carries its first-order stability.
//
// For polynomial field components the integrand is a trigonometric
// polynomial in t, so the periodic trapezoid rule is exact once the node
// count clears the top frequency; nodes are doubled from 16 until two
// consecutive levels agree to the quadrature tolerance (relative to the
// field's natural drift magnitude).
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"

namespace spherefsb {

namespace detail {

inline void check_band_phi(double phi) {
    if (!(phi > 0.0 && phi < kPi)) {
        throw ValidationError("melnikov: phi = " + std::to_string(phi) +
                              " not strictly inside (0, pi)");
    }
}

// Periodic trapezoid with node doubling from 16 until two levels agree to
// tolerance * scale.
template <class G>
double doubling_quadrature(G&& g, double tolerance, double scale) {
    auto level = [&g](int n) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += g(kTwoPi * k / n);
        return kTwoPi * sum / n;
    };
    int n = 16;
    double value = level(n);
    for (; n <= (1 << 20); ) {
        n *= 2;
        const double refined = level(n);
        if (std::abs(refined - value) <= tolerance * scale) return refined;
        value = refined;
    }
    throw ValidationError("melnikov: quadrature failed to settle by " +
                          std::to_string(1 << 20) + " nodes");
}

} // namespace detail

// Natural magnitude of the drift integral: 2 pi times the sum of the
// transverse coefficient magnitudes.  All root and degeneracy thresholds are
// relative to this.
inline double melnikov_scale(const PerturbationField& f) { return kTwoPi * f.drift_scale(); }

inline double melnikov_I(const PerturbationField& f, double phi, double quad_tol = 1e-12) {
    detail::check_band_phi(phi);
    const double scale = melnikov_scale(f);
    if (scale == 0.0) return 0.0;
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    auto integrand = [&](double t) {
        const double st = std::sin(t);
        const double ct = std::cos(t);
        const Vec3 s(sp * ct, sp * st, cp);
        return f.eval(FieldComponent::G2, s) * ct - f.eval(FieldComponent::G3, s) * st;
    };
    return detail::doubling_quadrature(integrand, quad_tol, scale);
}

// dI/dphi by quadrature of the exactly differentiated integrand
// (ds/dphi = (cos phi cos t, cos phi sin t, -sin phi)).
inline double melnikov_I_derivative(const PerturbationField& f, double phi,
                                    double quad_tol = 1e-12) {
    detail::check_band_phi(phi);
    const double scale = melnikov_scale(f);
    if (scale == 0.0) return 0.0;
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    auto integrand = [&](double t) {
        const double st = std::sin(t);
        const double ct = std::cos(t);
        const Vec3 s(sp * ct, sp * st, cp);
        const Vec3 ds_dphi(cp * ct, cp * st, -sp);
        auto directional = [&](FieldComponent c) {
            return f.eval_partial(c, 0, s) * ds_dphi.x() +
                   f.eval_partial(c, 1, s) * ds_dphi.y() +
                   f.eval_partial(c, 2, s) * ds_dphi.z();
        };
        return directional(FieldComponent::G2) * ct - directional(FieldComponent::G3) * st;
    };
    return detail::doubling_quadrature(integrand, quad_tol, scale);
}

struct MelnikovRoot {
    double phi0 = 0.0;       // colatitude of the zero
    double derivative = 0.0; // I'(phi0)
    bool simple = false;     // |I'| >= 1e-8 * scale
};

struct MelnikovProfile {
    std::vector<double> phis;   // sample grid across the polar band
    std::vector<double> values; // I at each sample
    std::vector<MelnikovRoot> roots;
    bool degenerate = false; // I vanishes identically at the working precision
    double scale = 0.0;      // melnikov_scale of the field

    bool has_non_simple() const {
        return std::any_of(roots.begin(), roots.end(),
                           [](const MelnikovRoot& r) { return !r.simple; });
    }
};

// Sample I across (phi_min, pi - phi_min) on grid_n equally spaced points
// (endpoints included), then isolate its zeros by bracketing sign changes
// and bisecting.  Zeros landing exactly on grid nodes are taken directly.
inline MelnikovProfile melnikov_profile(const PerturbationField& f, double phi_min = 1e-3,
                                        double quad_tol = 1e-12, int grid_n = 720) {
    if (!(phi_min > 0.0) || !(phi_min < kPi / 2.0)) {
        throw ValidationError("melnikov_profile: phi_min must lie in (0, pi/2)");
    }
    if (grid_n < 2) {
        throw ValidationError("melnikov_profile: grid needs at least 2 points");
    }

    MelnikovProfile profile;
    profile.scale = melnikov_scale(f);
    profile.phis.resize(static_cast<size_t>(grid_n));
    profile.values.resize(static_cast<size_t>(grid_n));
    const double lo = phi_min;
    const double hi = kPi - phi_min;
    for (int k = 0; k < grid_n; ++k) {
        const double phi = lo + (hi - lo) * k / (grid_n - 1);
        profile.phis[static_cast<size_t>(k)] = phi;
        profile.values[static_cast<size_t>(k)] = melnikov_I(f, phi, quad_tol);
    }

    double max_abs = 0.0;
    for (double v : profile.values) max_abs = std::max(max_abs, std::abs(v));
    if (profile.scale == 0.0 || max_abs <= 1e-12 * profile.scale) {
        profile.degenerate = true;
        return profile;
    }

    const double node_zero = 1e-12 * profile.scale;
    std::vector<double> locations;
    for (int k = 0; k < grid_n; ++k) {
        if (std::abs(profile.values[static_cast<size_t>(k)]) <= node_zero) {
            locations.push_back(profile.phis[static_cast<size_t>(k)]);
        }
    }
    for (int k = 0; k + 1 < grid_n; ++k) {
        const double va = profile.values[static_cast<size_t>(k)];
        const double vb = profile.values[static_cast<size_t>(k) + 1];
        if (std::abs(va) <= node_zero || std::abs(vb) <= node_zero) continue;
        if (va * vb >= 0.0) continue;
        double a = profile.phis[static_cast<size_t>(k)];
        double b = profile.phis[static_cast<size_t>(k) + 1];
        double fa = va;
        for (int iter = 0; iter < 80 && b - a > 1e-14; ++iter) {
            const double mid = 0.5 * (a + b);
            const double fm = melnikov_I(f, mid, quad_tol);
            if (fm == 0.0) {
                a = b = mid;
                break;
            }
            if (fa * fm < 0.0) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        locations.push_back(0.5 * (a + b));
    }

    std::sort(locations.begin(), locations.end());
    for (double phi0 : locations) {
        if (!profile.roots.empty() && phi0 - profile.roots.back().phi0 < 1e-9) continue;
        MelnikovRoot root;
        root.phi0 = phi0;
        root.derivative = melnikov_I_derivative(f, phi0, quad_tol);
        root.simple = std::abs(root.derivative) >= 1e-8 * profile.scale;
        profile.roots.push_back(root);
    }
    return profile;
}

} // namespace spherefsb
