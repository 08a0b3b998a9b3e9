// Periodic orbits of the projected flow continued from simple zeros of the
// drift integral.
//
// The chart longitude always decreases under the physical flow, so one full
// turn defines an angular return map on a longitude section.  The map is
// computed in the formal increasing-longitude direction, where to first
// order P(phi) - phi = (eps/|X0|) I(phi); a simple zero of I therefore seeds
// a Newton search for a genuine fixed point.  Reported period and multiplier
// belong to the physical orbit: the period is the positive duration of the
// turn, and the physical multiplier is the reciprocal of the formal map's
// slope at the fixed point.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/flows.hpp"
#include "spherefsb/melnikov.hpp"
#include "spherefsb/scenario.hpp"
#include "spherefsb/stability.hpp"

namespace spherefsb {

struct PoincareReturn {
    double phi_return = 0.0; // colatitude after one formal turn
    double t_return = 0.0;   // positive physical duration of the turn
};

inline PoincareReturn poincare_map(const Scenario& scn, double phi, double theta0 = 0.0) {
    const ChartTrajectory traj = flow_chart(scn, phi, theta0, theta0 + kTwoPi, 2);
    return {traj.final_phi(), traj.duration()};
}

// Ambient samples of one full turn at the given colatitude, swept in the
// physical direction from the theta0 section (n samples, endpoints
// included; for a fixed point of the return map the last sample closes onto
// the first).
inline std::vector<UnitVector> orbit_trace(const Scenario& scn, double fixed_phi,
                                           double theta0, int n) {
    if (n < 2) throw ValidationError("orbit_trace: need at least 2 samples");
    const ChartTrajectory traj = flow_chart(scn, fixed_phi, theta0, theta0 - kTwoPi, n);
    const Mat3 b = scn.frame().matrix();
    std::vector<UnitVector> points;
    points.reserve(traj.samples.size());
    for (const ChartSample& s : traj.samples) {
        points.push_back(UnitVector::normalized(b.transpose() *
                                                SphericalPoint(s.phi, s.theta).cartesian()));
    }
    return points;
}

struct PeriodicOrbitBranch {
    double phi0 = 0.0;            // seeding drift-integral zero
    double epsilon = 0.0;
    double theta0 = 0.0;          // longitude section of the return map
    double fixed_phi = 0.0;       // fixed point of the angular return map
    double period_physical = 0.0; // positive duration of one turn
    double multiplier = 1.0;      // physical return-map slope at the fixed point
    Stability stability = Stability::marginal;
    std::vector<UnitVector> orbit_samples; // one period in ambient coordinates
};

// Newton continuation of the return-map fixed point from a simple
// drift-integral zero.  Iterates leaving the polar band or the O(1)
// neighborhood of the seed, a flow that exits the band mid-evaluation, or a
// residual that cannot be driven down all convert to NewtonDivergence;
// seeding from a non-simple zero is refused outright.
inline PeriodicOrbitBranch continue_periodic_orbit(const Scenario& scn, const MelnikovRoot& root,
                                                   int n_samples = 256) {
    if (!root.simple) {
        throw NonSimpleRoot("continue_periodic_orbit: drift-integral zero at phi = " +
                            std::to_string(root.phi0) +
                            " is not simple; the orbit does not continue cleanly");
    }
    const double phi_min = scn.tolerances().phi_min;
    const double theta0 = 0.0;

    auto ensure_in_band = [&](double phi) {
        if (!(phi > phi_min && phi < kPi - phi_min) || std::abs(phi - root.phi0) > 0.5) {
            throw NewtonDivergence(
                "continue_periodic_orbit: iterate phi = " + std::to_string(phi) +
                " left the search region around " + std::to_string(root.phi0));
        }
    };
    auto map_at = [&](double phi) {
        ensure_in_band(phi);
        try {
            return poincare_map(scn, phi, theta0);
        } catch (const PolarBandExit&) {
            throw NewtonDivergence("continue_periodic_orbit: return-map sweep from phi = " +
                                   std::to_string(phi) + " left the polar band");
        }
    };

    constexpr int kMaxIterations = 30;
    constexpr double kDerivativeStep = 1e-4;
    // Acceptance on the per-turn angular displacement: clean convergence to
    // the Newton tolerance when the flow allows it, with an integration-noise
    // ceiling for maps that cannot be resolved more finely.
    const double target = scn.tolerances().newton;
    constexpr double kNoiseCeiling = 1e-8;

    double phi = root.phi0;
    PoincareReturn ret = map_at(phi);
    double residual = ret.phi_return - phi;
    double best_phi = phi;
    double best_abs = std::abs(residual);
    PoincareReturn best_ret = ret;

    int iter = 0;
    while (std::abs(residual) > target) {
        if (iter++ >= kMaxIterations) {
            if (best_abs <= kNoiseCeiling) break;
            throw NewtonDivergence(
                "continue_periodic_orbit: residual " + std::to_string(best_abs) +
                " not reduced to tolerance after " + std::to_string(kMaxIterations) +
                " iterations");
        }
        const double slope =
            (map_at(phi + kDerivativeStep).phi_return - map_at(phi - kDerivativeStep).phi_return) /
            (2.0 * kDerivativeStep);
        const double denom = slope - 1.0;
        if (!(std::abs(denom) > 1e-14)) {
            throw NewtonDivergence(
                "continue_periodic_orbit: return map is tangent to the identity at phi = " +
                std::to_string(phi));
        }
        phi -= residual / denom;
        ret = map_at(phi);
        residual = ret.phi_return - phi;
        if (std::abs(residual) < best_abs) {
            best_abs = std::abs(residual);
            best_phi = phi;
            best_ret = ret;
        }
    }
    if (std::abs(residual) <= target) {
        best_phi = phi;
        best_ret = ret;
    }

    PeriodicOrbitBranch branch;
    branch.phi0 = root.phi0;
    branch.epsilon = scn.epsilon();
    branch.theta0 = theta0;
    branch.fixed_phi = best_phi;
    branch.period_physical = best_ret.t_return;

    const double formal_slope = (map_at(best_phi + kDerivativeStep).phi_return -
                                 map_at(best_phi - kDerivativeStep).phi_return) /
                                (2.0 * kDerivativeStep);
    if (!(std::abs(formal_slope) > 1e-12)) {
        throw ValidationError("continue_periodic_orbit: return map folds at the fixed point");
    }
    branch.multiplier = 1.0 / formal_slope;
    branch.stability = classify_multiplier(branch.multiplier);
    branch.orbit_samples = orbit_trace(scn, best_phi, theta0, n_samples);
    return branch;
}

} // namespace spherefsb
