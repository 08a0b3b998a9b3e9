// Reconstruction of full rotating and modulated rotating waves from the
// reduced objects on the sphere.
//
// The symmetry group acts on lifted states by rotations about the axis q.
// An equilibrium y of the projected flow lifts to a rotating wave
// A(t) = e^{freq t K_q} A_eps whose trajectory never leaves the symmetry
// orbit of A_eps; its frequency is read off algebraically by conjugating the
// generator into the co-moving frame.  A periodic orbit is lifted in the
// inverted variable C = A^{-1} (which carries the base point: C q = x):
// after one relative period C(T) = C0 R with R a rotation about q, the drift
// is the lattice-reduced angle rate beta = -theta_R/T, and
// B(t) = C(t) e^{beta t K_q} is the T-periodic shape.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spherefsb/equilibrium.hpp"
#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/flows.hpp"
#include "spherefsb/periodic.hpp"
#include "spherefsb/scenario.hpp"
#include "spherefsb/so3.hpp"

namespace spherefsb {

enum class WaveKind { rotating, modulated_rotating };

inline const char* to_string(WaveKind k) {
    return k == WaveKind::rotating ? "rotating_wave" : "modulated_rotating_wave";
}

struct WaveReconstruction {
    WaveKind kind = WaveKind::rotating;
    // The t = 0 lift: the group state A_eps for a rotating wave
    // (project(A_eps) = equilibrium), the co-moving frame C0 with
    // C0 q = x(0) for a modulated one.
    Rotation base_rotation = Rotation::identity();
    double frequency = 0.0;       // signed drift rate about the symmetry axis
    double relative_period = 0.0; // 0 for a pure rotating wave
    std::vector<double> sample_times;
    std::vector<Rotation> periodic_part_samples; // B(t) for modulated waves
    double residual_off_axis = 0.0;
    double closure = 0.0; // ||B(T) - B(0)||_F for modulated waves
};

// Frobenius distance from a rotation to the symmetry orbit
// {e^{theta K_q} base : theta}.  With Z = a base^{-1} and the Rodrigues
// expansion of e^{theta K_q}, the alignment <e^{theta K_q}, Z>_F equals
// c + a_c cos(theta) + b_c sin(theta), so the minimum distance is available
// in closed form.
inline double distance_to_symmetry_orbit(const Rotation& a, const Rotation& base,
                                         const UnitVector& q) {
    const Mat3 z = a.matrix() * base.matrix().transpose();
    const Vec3& qv = q.coords();
    const double c = qv.dot(z * qv);
    const double a_c = z.trace() - c;
    const double b_c = (z.transpose() * cross_matrix(qv)).trace();
    const double best_alignment = c + std::sqrt(a_c * a_c + b_c * b_c);
    return std::sqrt(std::max(0.0, 6.0 - 2.0 * best_alignment));
}

// Signed rotation angle of z about the axis q, assuming z is (close to) a
// rotation about that axis.
inline double angle_about_axis(const Mat3& z, const UnitVector& q) {
    const Vec3& qv = q.coords();
    const double c = qv.dot(z * qv);
    return std::atan2((z.transpose() * cross_matrix(qv)).trace(), z.trace() - c);
}

inline WaveReconstruction lift_equilibrium(const Scenario& scn, const EquilibriumBranch& eq) {
    constexpr double kOffAxisTol = 1e-9;
    constexpr double kResidenceTol = 1e-7;
    const UnitVector q = UnitVector::normalized(scn.q().axis);
    const UnitVector& y = eq.location;

    // A_eps = F(q)^{-1} F(y) projects to y; its inverse C_eps maps q to y.
    const Rotation a_eps = frame_to_pole(q).inverse() * frame_to_pole(y);
    const Vec3 generator = scn.generator_axis_at(y.coords());
    const double frequency = generator.dot(y.coords());
    const double residual = (a_eps.matrix() * generator - frequency * q.coords()).norm();
    if (residual > kOffAxisTol) {
        throw OffAxisResidualExceeded(
            "lift_equilibrium: conjugated generator misses the symmetry axis by " +
            std::to_string(residual) + " (equilibrium not converged or epsilon too large)");
    }

    // Residence cross-check: the actual group flow from A_eps must stay on
    // the symmetry orbit of A_eps for three unperturbed periods.
    const Trajectory traj = flow_group(scn, a_eps, 3.0 * scn.unperturbed_period());
    double worst = 0.0;
    for (const Rotation& r : traj.rotations) {
        worst = std::max(worst, distance_to_symmetry_orbit(r, a_eps, q));
    }
    if (worst > kResidenceTol) {
        throw OffAxisResidualExceeded(
            "lift_equilibrium: lifted trajectory leaves the symmetry orbit by " +
            std::to_string(worst) + " over three periods");
    }

    WaveReconstruction wave;
    wave.kind = WaveKind::rotating;
    wave.base_rotation = a_eps;
    wave.frequency = frequency;
    wave.relative_period = 0.0;
    wave.residual_off_axis = residual;
    wave.closure = 0.0;
    return wave;
}

// Lattice reduction of the per-period monodromy angle: the drift rate is the
// representative of (-theta_R + 2 pi k)/T nearest zero; a near-tie between
// two representatives (within 1e-3/T) cannot be resolved and is refused.
inline double select_drift_branch(double theta_R, double period) {
    if (!(period > 0.0)) {
        throw ValidationError("select_drift_branch: period must be positive");
    }
    std::array<double, 3> candidates = {(-theta_R - kTwoPi) / period, -theta_R / period,
                                        (-theta_R + kTwoPi) / period};
    std::sort(candidates.begin(), candidates.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (std::abs(std::abs(candidates[0]) - std::abs(candidates[1])) < 1e-3 / period) {
        throw AmbiguousBranch(
            "select_drift_branch: two drift candidates of nearly equal size (" +
            std::to_string(candidates[0]) + " and " + std::to_string(candidates[1]) +
            "); the monodromy winding cannot be resolved");
    }
    return candidates[0];
}

inline WaveReconstruction lift_periodic(const Scenario& scn, const PeriodicOrbitBranch& orbit,
                                        int n_samples = 256) {
    constexpr double kMonodromyAxisTol = 1e-9;
    if (n_samples < 2) throw ValidationError("lift_periodic: need at least 2 samples");
    const UnitVector q = UnitVector::normalized(scn.q().axis);
    const Vec3& qv = q.coords();
    const double period = orbit.period_physical;
    if (!(period > 0.0)) throw ValidationError("lift_periodic: orbit period must be positive");

    // Base point of the orbit at its section, and the co-moving frame C0
    // with C0 q = x0 (deterministic pole-frame composition).
    const UnitVector x0 = UnitVector::normalized(
        scn.frame().matrix().transpose() *
        SphericalPoint(orbit.fixed_phi, orbit.theta0).cartesian());
    const Rotation c0 = frame_to_pole(x0).inverse() * frame_to_pole(q);

    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        times.push_back(period * i / (n_samples - 1));
    }
    const Trajectory traj = flow_group(scn, c0.inverse(), times);

    // Monodromy factor: C(T) = C0 R with R a rotation about q if and only if
    // the projected orbit really closed.
    const Rotation c_end = traj.rotations.back().inverse();
    const Rotation monodromy = c0.inverse() * c_end;
    const double axis_residual = (monodromy.matrix() * qv - qv).norm();
    if (axis_residual > kMonodromyAxisTol) {
        throw MonodromyNotAboutQ("lift_periodic: monodromy moves the symmetry axis by " +
                                 std::to_string(axis_residual) +
                                 " (orbit not closed to tolerance)");
    }
    double theta_R = 0.0;
    try {
        theta_R = log_so3(monodromy).axis.dot(qv);
    } catch (const NearAntipodalRotation& e) {
        throw AmbiguousBranch(std::string("lift_periodic: monodromy angle is numerically at "
                                          "the branch cut: ") +
                              e.what());
    }
    const double beta = select_drift_branch(theta_R, period);

    WaveReconstruction wave;
    wave.kind = WaveKind::modulated_rotating;
    wave.base_rotation = c0;
    wave.frequency = beta;
    wave.relative_period = period;
    wave.residual_off_axis = axis_residual;
    wave.sample_times = times;
    wave.periodic_part_samples.reserve(traj.rotations.size());
    for (std::size_t i = 0; i < traj.rotations.size(); ++i) {
        wave.periodic_part_samples.push_back(traj.rotations[i].inverse() *
                                             rotation_about(q, beta * traj.times[i]));
    }
    wave.closure = (wave.periodic_part_samples.back().matrix() -
                    wave.periodic_part_samples.front().matrix())
                       .norm();
    return wave;
}

// Both sides of the frequency-vector angle identity: the angle between the
// conjugated frequency vector A0 X0 and the symmetry axis equals the angle
// between the projected base point A0^T q and the unperturbed axis.
struct WaveAngles {
    double lhs = 0.0;
    double rhs = 0.0;
};

inline WaveAngles wave_angle_check(const Scenario& scn, const Rotation& a0) {
    const Vec3 qv = UnitVector::normalized(scn.q().axis).coords();
    const Vec3& x0v = scn.x0().axis;
    WaveAngles angles;
    angles.lhs = (a0.matrix() * x0v).dot(qv) / scn.omega0();
    angles.rhs = (a0.matrix().transpose() * qv).dot(x0v) / scn.omega0();
    return angles;
}

// Circle pairing: frequency-vector circles at heights +h and -h about the
// symmetry axis project to base-point circles at heights +h and -h about the
// unperturbed axis — equidistant from the equatorial plane yet distinct.
struct CirclePairHeights {
    double upper = 0.0;
    double lower = 0.0;
};

inline CirclePairHeights paired_wave_circles(const Scenario& scn, double h, double azimuth) {
    if (!(h > 0.0 && h < 1.0)) {
        throw ValidationError("paired_wave_circles: height must lie strictly inside (0, 1)");
    }
    const UnitVector q = UnitVector::normalized(scn.q().axis);
    const UnitVector pole = scn.pole_axis();
    const Mat3 fq = frame_to_pole(q).matrix();
    const Vec3 e1 = fq.row(0);
    const Vec3 e2 = fq.row(1);

    auto projected_height = [&](double signed_h) {
        const Vec3 target = signed_h * q.coords() +
                            std::sqrt(1.0 - signed_h * signed_h) *
                                (std::cos(azimuth) * e1 + std::sin(azimuth) * e2);
        // A maps the unperturbed axis onto the chosen frequency direction.
        const Rotation a =
            frame_to_pole(UnitVector::normalized(target)).inverse() * frame_to_pole(pole);
        return (a.matrix().transpose() * q.coords()).dot(pole.coords());
    };
    return {projected_height(h), projected_height(-h)};
}

// Group-trajectory samples of a reconstructed wave, ready for CSV export.
// A rotating wave is swept through one full drift turn (falling back to the
// unperturbed period should the drift rate vanish); a modulated wave already
// carries its periodic-part samples and is packaged as stored.
inline Trajectory wave_trajectory(const Scenario& scn, const WaveReconstruction& wave,
                                  int n_samples = 65) {
    Trajectory traj;
    traj.kind = TrajectoryKind::group;
    traj.scenario_hash = scn.hash();
    if (wave.kind == WaveKind::modulated_rotating) {
        traj.times = wave.sample_times;
        traj.rotations = wave.periodic_part_samples;
        traj.validate();
        return traj;
    }
    if (n_samples < 2) throw ValidationError("wave_trajectory: need at least 2 samples");
    const UnitVector q = UnitVector::normalized(scn.q().axis);
    const double rate = std::abs(wave.frequency);
    const double span =
        rate > 1e-9 * scn.omega0() ? kTwoPi / rate : scn.unperturbed_period();
    traj.times.reserve(static_cast<size_t>(n_samples));
    traj.rotations.reserve(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double t = span * i / (n_samples - 1);
        traj.times.push_back(t);
        traj.rotations.push_back(rotation_about(q, wave.frequency * t) * wave.base_rotation);
    }
    traj.validate();
    return traj;
}

} // namespace spherefsb
