// Wave reconstruction: symmetry-orbit geometry, rotating-wave lifts with
// exact and asymptotic frequencies, modulated-wave monodromy and drift
// extraction, the frequency-angle identity, and circle pairing.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "spherefsb/reconstruct.hpp"

#include "oracles.hpp"

using namespace spherefsb;

namespace {

Scenario make_scenario(const Vec3& x0, double eps, const std::string& builtin) {
    return Scenario(AlgebraElement(x0), AlgebraElement(0.0, 0.0, 1.0),
                    PerturbationField::builtin(builtin), eps);
}

// Constant drift components with a nonzero clock shift: the equilibria sit
// on the tilted constant generator, so the lifted frequency moves at O(eps).
PerturbationField constant_field() {
    PerturbationField f(0.1);
    f.add_term(FieldComponent::G1, 0, 0, 0, 0.4);
    f.add_term(FieldComponent::G2, 0, 0, 0, 0.3);
    f.add_term(FieldComponent::G3, 0, 0, 0, 0.5);
    return f;
}

// No reflection symmetry anywhere: the persisting orbit carries a genuinely
// nonzero monodromy drift (unlike the equatorial trap, whose perturbation
// vanishes identically on the equator).
PerturbationField asymmetric_field() {
    PerturbationField f(0.1);
    f.add_term(FieldComponent::G2, 1, 0, 1, 1.0);
    f.add_term(FieldComponent::G2, 0, 1, 2, -0.7);
    f.add_term(FieldComponent::G3, 2, 1, 0, 0.6);
    f.add_term(FieldComponent::G3, 0, 0, 1, 0.3);
    f.add_term(FieldComponent::G1, 1, 1, 1, 0.8);
    return f;
}

double brute_orbit_distance(const Rotation& a, const Rotation& base, const UnitVector& q) {
    auto dist_at = [&](double theta) {
        return (a.matrix() - (rotation_about(q, theta) * base).matrix()).norm();
    };
    const int n = 2048;
    double best_theta = 0.0;
    double best = dist_at(0.0);
    for (int i = 1; i < n; ++i) {
        const double theta = kTwoPi * i / n;
        const double d = dist_at(theta);
        if (d < best) {
            best = d;
            best_theta = theta;
        }
    }
    double lo = best_theta - kTwoPi / n;
    double hi = best_theta + kTwoPi / n;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - ratio * (hi - lo);
    double d = lo + ratio * (hi - lo);
    double fc = dist_at(c);
    double fd = dist_at(d);
    for (int it = 0; it < 60; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = dist_at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = dist_at(d);
        }
    }
    return std::min({best, fc, fd});
}

} // namespace

TEST_CASE("distance to a symmetry orbit: closed form vs direct search") {
    std::mt19937 rng(2024);
    for (int k = 0; k < 10; ++k) {
        const Rotation a = Rotation(oracle::random_rotation(rng));
        const Rotation base = Rotation(oracle::random_rotation(rng));
        const UnitVector q = UnitVector::normalized(oracle::random_unit(rng));
        const double closed = distance_to_symmetry_orbit(a, base, q);
        const double brute = brute_orbit_distance(a, base, q);
        CAPTURE(k, closed, brute);
        CHECK(std::abs(closed - brute) <= 1e-9);
    }
}

TEST_CASE("points on the symmetry orbit have zero distance") {
    std::mt19937 rng(7);
    for (int k = 0; k < 25; ++k) {
        const Rotation base = Rotation(oracle::random_rotation(rng));
        const UnitVector q = UnitVector::normalized(oracle::random_unit(rng));
        const double theta = oracle::uniform(rng, -3.0, 3.0);
        const Rotation on_orbit = rotation_about(q, theta) * base;
        // Near zero the distance comes from sqrt of a cancelling difference,
        // so it is only determined to about sqrt(machine epsilon).
        CHECK(distance_to_symmetry_orbit(on_orbit, base, q) <= 1e-7);
    }
}

TEST_CASE("rotation about a perpendicular axis: known distance") {
    const UnitVector q(Vec3(0.0, 0.0, 1.0));
    const UnitVector p(Vec3(1.0, 0.0, 0.0));
    std::mt19937 rng(11);
    for (double alpha : {0.1, 0.7, 1.9}) {
        const Rotation base = Rotation(oracle::random_rotation(rng));
        const Rotation a = rotation_about(p, alpha) * base;
        // For Z = e^{alpha K_p} with p perpendicular to q the best alignment
        // is at theta = 0, giving distance 2 sqrt(1 - cos alpha).
        CHECK(std::abs(distance_to_symmetry_orbit(a, base, q) -
                       2.0 * std::sqrt(1.0 - std::cos(alpha))) <= 1e-12);
    }
}

TEST_CASE("signed angle extraction about an axis") {
    std::mt19937 rng(13);
    for (int k = 0; k < 20; ++k) {
        const UnitVector q = UnitVector::normalized(oracle::random_unit(rng));
        const double theta = oracle::uniform(rng, -3.1, 3.1);
        CHECK(std::abs(angle_about_axis(rotation_about(q, theta).matrix(), q) - theta) <= 1e-12);
    }
}

TEST_CASE("unperturbed equilibria lift to waves at exactly the base frequency") {
    const Scenario scn = make_scenario(Vec3(0.3, -0.4, 0.5), 0.0, "equatorial_trap");
    const double w0 = scn.omega0();

    const WaveReconstruction north = lift_equilibrium(scn, find_equilibrium(scn, Pole::north));
    CHECK(north.kind == WaveKind::rotating);
    CHECK(std::abs(north.frequency - w0) <= 1e-14);
    CHECK(north.residual_off_axis <= 1e-13);
    CHECK(north.relative_period == 0.0);

    const WaveReconstruction south = lift_equilibrium(scn, find_equilibrium(scn, Pole::south));
    CHECK(std::abs(south.frequency + w0) <= 1e-14);
    CHECK(south.residual_off_axis <= 1e-13);
}

TEST_CASE("base rotation projects onto the equilibrium") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.02, "equatorial_trap");
    const EquilibriumBranch eq = find_equilibrium(scn, Pole::north);
    const WaveReconstruction wave = lift_equilibrium(scn, eq);
    CHECK((project(scn, wave.base_rotation).coords() - eq.location.coords()).norm() <= 1e-13);
}

TEST_CASE("equatorial trap: pole waves keep the unperturbed frequency exactly") {
    // The builtin's drift components vanish at both poles, so the perturbed
    // equilibrium *is* the pole and the lifted frequency stays exact.
    for (double eps : {0.02, 0.005}) {
        const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), eps, "equatorial_trap");
        const WaveReconstruction wave =
            lift_equilibrium(scn, find_equilibrium(scn, Pole::north));
        CHECK(std::abs(wave.frequency - scn.omega0()) <= 1e-13);
    }
}

TEST_CASE("constant-field frequencies move linearly with the clock component") {
    double prev_slope_n = 0.0;
    int k = 0;
    for (double eps : {0.01, 0.005}) {
        const Scenario scn(AlgebraElement(0.0, 0.0, 1.0), AlgebraElement(0.0, 0.0, 1.0),
                           constant_field(), eps);
        const WaveReconstruction north =
            lift_equilibrium(scn, find_equilibrium(scn, Pole::north));
        const WaveReconstruction south =
            lift_equilibrium(scn, find_equilibrium(scn, Pole::south));
        const double slope_n = (north.frequency - scn.omega0()) / eps;
        const double slope_s = (south.frequency + scn.omega0()) / eps;
        CHECK(std::abs(slope_n - 0.4) <= 5.0 * eps);
        CHECK(std::abs(slope_s + 0.4) <= 5.0 * eps);
        CHECK(north.residual_off_axis <= 1e-9);
        if (k++ > 0) CHECK(std::abs(slope_n - prev_slope_n) <= 0.01);
        prev_slope_n = slope_n;
    }
}

TEST_CASE("lifted rotating wave reproduces the group flow") {
    const Scenario scn(AlgebraElement(0.2, -0.1, 0.9), AlgebraElement(0.0, 0.0, 1.0),
                       constant_field(), 0.02);
    const WaveReconstruction wave = lift_equilibrium(scn, find_equilibrium(scn, Pole::north));
    const UnitVector q = UnitVector::normalized(scn.q().axis);

    const Trajectory traj = flow_group(scn, wave.base_rotation, 3.0 * scn.unperturbed_period());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const Mat3 predicted =
            (rotation_about(q, wave.frequency * traj.times[i]) * wave.base_rotation).matrix();
        CHECK((traj.rotations[i].matrix() - predicted).norm() <= 1e-7);
    }
}

TEST_CASE("algebraic frequency agrees with the trajectory phase rate") {
    const Scenario scn(AlgebraElement(0.0, 0.0, 1.0), AlgebraElement(0.0, 0.0, 1.0),
                       constant_field(), 0.01);
    const WaveReconstruction wave = lift_equilibrium(scn, find_equilibrium(scn, Pole::north));
    const UnitVector q = UnitVector::normalized(scn.q().axis);

    const int n = 40;
    const double t_end = 0.4 * scn.unperturbed_period();
    std::vector<double> times;
    for (int i = 0; i < n; ++i) times.push_back(t_end * (i + 1) / n);
    const Trajectory traj = flow_group(scn, wave.base_rotation, times);

    double st = 0.0, stt = 0.0, sth = 0.0, sh = 0.0;
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        const double phase = angle_about_axis(
            traj.rotations[i].matrix() * wave.base_rotation.matrix().transpose(), q);
        st += t;
        stt += t * t;
        sth += t * phase;
        sh += phase;
    }
    const double m = static_cast<double>(traj.times.size() - 1);
    const double slope = (m * sth - st * sh) / (m * stt - st * st);
    CHECK(std::abs(slope - wave.frequency) <= 1e-6 * scn.omega0());
}

TEST_CASE("perturbed location off the true equilibrium is rejected") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.02, "equatorial_trap");
    EquilibriumBranch eq = find_equilibrium(scn, Pole::north);
    eq.location = UnitVector::normalized(eq.location.coords() + Vec3(1e-3, 0.0, 0.0));
    CHECK_THROWS_AS(lift_equilibrium(scn, eq), OffAxisResidualExceeded);
}

TEST_CASE("drift branch selection") {
    CHECK(select_drift_branch(0.3, 2.0) == -0.15);
    CHECK(select_drift_branch(-0.4, 2.0) == 0.2);
    // Lattice reduction picks the representative nearest zero.
    CHECK(std::abs(select_drift_branch(2.0, kTwoPi) - (-2.0 / kTwoPi)) <= 1e-15);
    CHECK(std::abs(select_drift_branch(-3.0, 1.0) - 3.0) <= 1e-15);
    // A monodromy angle at the cut cannot pick a side.
    CHECK_THROWS_AS(select_drift_branch(kPi, kTwoPi), AmbiguousBranch);
    CHECK_THROWS_AS(select_drift_branch(kPi - 1e-5, kTwoPi), AmbiguousBranch);
    CHECK_THROWS_AS(select_drift_branch(0.1, 0.0), ValidationError);
    CHECK_THROWS_AS(select_drift_branch(0.1, -1.0), ValidationError);
}

TEST_CASE("unperturbed periodic orbit lifts with zero drift and closed shape") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 2.0), 0.0, "equatorial_trap");
    const PeriodicOrbitBranch orbit =
        continue_periodic_orbit(scn, MelnikovRoot{1.1, -kPi, true}, 16);
    const WaveReconstruction wave = lift_periodic(scn, orbit, 64);

    CHECK(wave.kind == WaveKind::modulated_rotating);
    CHECK(std::abs(wave.frequency) <= 1e-10);
    CHECK(wave.closure <= 1e-10);
    CHECK(wave.relative_period == orbit.period_physical);
    CHECK(wave.residual_off_axis <= 1e-10);

    // Base frame carries the symmetry axis to the orbit's base point.
    const Vec3 x0 = wave.base_rotation.matrix() * scn.q().axis;
    CHECK((x0 - orbit.orbit_samples.front().coords()).norm() <= 1e-12);

    // With zero drift the periodic part is the backward rigid rotation of
    // the base frame.
    for (std::size_t i = 0; i < wave.sample_times.size(); ++i) {
        const Mat3 predicted =
            (exp_so3(scn.x0(), -wave.sample_times[i]) * wave.base_rotation).matrix();
        CHECK((wave.periodic_part_samples[i].matrix() - predicted).norm() <= 1e-9);
    }
}

TEST_CASE("equatorial trap orbit lifts with identically vanishing drift") {
    // The perturbation vanishes on the equator, so the monodromy closes
    // exactly for every eps — a sharp regression for the factor extraction.
    for (double eps : {0.02, 0.005}) {
        const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), eps, "equatorial_trap");
        const PeriodicOrbitBranch orbit =
            continue_periodic_orbit(scn, MelnikovRoot{kPi / 2.0, -kPi, true}, 16);
        const WaveReconstruction wave = lift_periodic(scn, orbit, 64);
        CHECK(std::abs(wave.frequency) <= 1e-12);
        CHECK(wave.closure <= 1e-9);
        CHECK(wave.residual_off_axis <= 1e-9);
    }
}

TEST_CASE("asymmetric field: drift is O(eps) with a stable slope") {
    const PerturbationField f = asymmetric_field();
    const MelnikovProfile prof = melnikov_profile(f);
    REQUIRE(!prof.degenerate);
    REQUIRE(prof.roots.size() == 1);
    REQUIRE(prof.roots.front().simple);

    double prev_slope = 0.0;
    int k = 0;
    for (double eps : {0.02, 0.01}) {
        const Scenario scn(AlgebraElement(0.3, -0.4, 0.5), AlgebraElement(0.0, 0.0, 1.0), f,
                           eps, {}, 0.3);
        const PeriodicOrbitBranch orbit = continue_periodic_orbit(scn, prof.roots.front(), 16);
        const WaveReconstruction wave = lift_periodic(scn, orbit, 128);
        CHECK(wave.closure <= 1e-6);
        CHECK(wave.residual_off_axis <= 1e-9);
        const double slope = wave.frequency / eps;
        CHECK(std::abs(wave.frequency) > 1e-6); // genuinely nonzero drift
        CHECK(std::abs(wave.frequency) <= 1.0 * eps);
        if (k++ > 0) CHECK(std::abs(slope / prev_slope - 1.0) <= 0.25);
        prev_slope = slope;
    }
}

TEST_CASE("monodromy off the symmetry axis is rejected") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.02, "equatorial_trap");
    // A colatitude that is not a fixed point: the sweep does not close, so
    // the per-period factor tilts away from the symmetry axis.
    PeriodicOrbitBranch fake;
    fake.fixed_phi = 1.0;
    fake.theta0 = 0.0;
    fake.period_physical = scn.unperturbed_period();
    CHECK_THROWS_AS(lift_periodic(scn, fake), MonodromyNotAboutQ);
}

TEST_CASE("periodic lift input validation") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.02, "equatorial_trap");
    PeriodicOrbitBranch orbit =
        continue_periodic_orbit(scn, MelnikovRoot{kPi / 2.0, -kPi, true}, 16);
    CHECK_THROWS_AS(lift_periodic(scn, orbit, 1), ValidationError);
    orbit.period_physical = 0.0;
    CHECK_THROWS_AS(lift_periodic(scn, orbit), ValidationError);
}

TEST_CASE("frequency-vector angle identity") {
    const Scenario scn = make_scenario(Vec3(0.3, -0.4, 0.5), 0.01, "equatorial_trap");
    const Vec3 qv = UnitVector::normalized(scn.q().axis).coords();

    const WaveAngles at_identity = wave_angle_check(scn, Rotation::identity());
    const double direct = scn.pole_axis().coords().dot(qv);
    CHECK(std::abs(at_identity.lhs - direct) <= 1e-15);
    CHECK(std::abs(at_identity.rhs - direct) <= 1e-15);

    // A rotation carrying the unperturbed axis onto the symmetry axis makes
    // both cosines 1.
    const Rotation aligning =
        frame_to_pole(UnitVector::normalized(qv)).inverse() * frame_to_pole(scn.pole_axis());
    const WaveAngles aligned = wave_angle_check(scn, aligning);
    CHECK(std::abs(aligned.lhs - 1.0) <= 1e-12);
    CHECK(std::abs(aligned.rhs - 1.0) <= 1e-12);

    std::mt19937 rng(99);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const WaveAngles angles = wave_angle_check(scn, Rotation(oracle::random_rotation(rng)));
        worst = std::max(worst, std::abs(angles.lhs - angles.rhs));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("paired frequency circles project to distinct mirror circles") {
    const Scenario scn = make_scenario(Vec3(0.2, 0.5, 0.6), 0.01, "equatorial_trap");
    std::mt19937 rng(123);
    for (int k = 0; k < 10; ++k) {
        const double h = oracle::uniform(rng, 0.05, 0.95);
        const double azimuth = oracle::uniform(rng, 0.0, kTwoPi);
        const CirclePairHeights pair = paired_wave_circles(scn, h, azimuth);
        CAPTURE(h, azimuth, pair.upper, pair.lower);
        CHECK(std::abs(pair.upper - h) <= 1e-10);
        CHECK(std::abs(pair.lower + h) <= 1e-10);
        CHECK(std::abs(pair.upper - pair.lower) > 0.09);
    }
    CHECK_THROWS_AS(paired_wave_circles(scn, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(paired_wave_circles(scn, 1.0, 0.0), ValidationError);
}
