// Angular return map and periodic-orbit continuation: first-order agreement
// with the drift integral, the exactly-known equatorial orbit, multiplier
// and stability conventions, and the divergence/precondition guards.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "spherefsb/melnikov.hpp"
#include "spherefsb/periodic.hpp"
#include "spherefsb/scenario.hpp"

#include "oracles.hpp"

using namespace spherefsb;

namespace {

Scenario make_scenario(const Vec3& x0, double eps, const std::string& builtin,
                       Tolerances tols = {}, double twist = 0.0) {
    return Scenario(AlgebraElement(x0), AlgebraElement(0.0, 0.0, 1.0),
                    PerturbationField::builtin(builtin), eps, tols, twist);
}

MelnikovRoot equatorial_root() {
    // pi sin(phi) cos(phi) vanishes simply at the equator with slope -pi.
    return MelnikovRoot{kPi / 2.0, -kPi, true};
}

} // namespace

TEST_CASE("return-map displacement matches the drift integral to first order") {
    const double eps = 1e-3;
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), eps, "equatorial_trap");
    const PerturbationField& f = scn.field();
    for (double phi : {0.5, 0.8, 1.1, 2.2, 2.5}) {
        const PoincareReturn ret = poincare_map(scn, phi);
        const double measured = (ret.phi_return - phi) / eps;
        const double predicted = melnikov_I(f, phi) / scn.omega0();
        CAPTURE(phi, measured, predicted);
        CHECK(std::abs(measured - predicted) <= 0.02 * std::abs(predicted));
        CHECK(ret.t_return > 0.0);
        CHECK(std::abs(ret.t_return - scn.unperturbed_period()) <= 0.05 * scn.unperturbed_period());
    }
}

TEST_CASE("return-map displacement law holds for a tilted axis and slower clock") {
    const double eps = 1e-3;
    const Scenario scn = make_scenario(Vec3(0.3, -0.4, 0.5), eps, "equatorial_trap", {}, 0.7);
    for (double phi : {0.7, 1.9}) {
        const PoincareReturn ret = poincare_map(scn, phi);
        const double measured = (ret.phi_return - phi) / eps;
        const double predicted = melnikov_I(scn.field(), phi) / scn.omega0();
        CAPTURE(phi, measured, predicted);
        CHECK(std::abs(measured - predicted) <= 0.02 * std::abs(predicted));
    }
}

TEST_CASE("equatorial orbit: exact fixed point, exact period, repelling multiplier") {
    const double eps = 0.01;
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), eps, "equatorial_trap");
    const PeriodicOrbitBranch branch = continue_periodic_orbit(scn, equatorial_root(), 128);

    // The equator is invariant and carries a uniform clock, so both the
    // fixed point and the period are exact.
    CHECK(std::abs(branch.fixed_phi - kPi / 2.0) <= 1e-12);
    CHECK(std::abs(branch.period_physical - scn.unperturbed_period()) <=
          1e-12 * scn.unperturbed_period());

    const double predicted = 1.0 / (1.0 - kPi * eps / scn.omega0());
    CHECK(branch.multiplier > 1.0);
    CHECK(std::abs(branch.multiplier - predicted) <= 50.0 * eps * eps);
    CHECK(branch.stability == Stability::unstable);

    REQUIRE(branch.orbit_samples.size() == 128);
    const Vec3 axis = scn.pole_axis().coords();
    for (const UnitVector& x : branch.orbit_samples) {
        CHECK(std::abs(x.coords().dot(axis)) <= 1e-9);
    }
    CHECK((branch.orbit_samples.front().coords() - branch.orbit_samples.back().coords()).norm() <=
          1e-9);
    CHECK(branch.epsilon == eps);
    CHECK(branch.phi0 == kPi / 2.0);
}

TEST_CASE("equatorial orbit survives a tilted axis and frame twist") {
    const Scenario scn = make_scenario(Vec3(0.3, -0.4, 0.5), 0.02, "equatorial_trap", {}, 0.7);
    const PeriodicOrbitBranch branch = continue_periodic_orbit(scn, equatorial_root());
    CHECK(std::abs(branch.fixed_phi - kPi / 2.0) <= 1e-10);
    CHECK(std::abs(branch.period_physical - scn.unperturbed_period()) <=
          1e-12 * scn.unperturbed_period());
    CHECK(branch.stability == Stability::unstable);
    for (const UnitVector& x : branch.orbit_samples) {
        CHECK(std::abs(x.coords().dot(scn.pole_axis().coords())) <= 1e-9);
    }
}

TEST_CASE("Newton pulls a displaced seed back onto the equator") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, "equatorial_trap");
    const MelnikovRoot off{kPi / 2.0 + 1e-3, -kPi, true};
    const PeriodicOrbitBranch branch = continue_periodic_orbit(scn, off);
    CHECK(std::abs(branch.fixed_phi - kPi / 2.0) <= 1e-10);
}

TEST_CASE("multiplier slope scales linearly in epsilon") {
    // m(eps) - 1 = (pi/|X0|) eps + O(eps^2): halving eps should halve the
    // excess to within the quadratic remainder.
    const double w0 = 1.0;
    double prev_excess = 0.0;
    int k = 0;
    for (double eps : {0.01, 0.005}) {
        const Scenario scn = make_scenario(Vec3(0.0, 0.0, w0), eps, "equatorial_trap");
        const PeriodicOrbitBranch branch = continue_periodic_orbit(scn, equatorial_root(), 16);
        const double excess = branch.multiplier - 1.0;
        CHECK(std::abs(excess - kPi * eps / w0) <= 50.0 * eps * eps);
        if (k++ > 0) CHECK(std::abs(prev_excess / excess - 2.0) <= 0.1);
        prev_excess = excess;
    }
}

TEST_CASE("zero perturbation gives the identity return map and a marginal orbit") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 2.0), 0.0, "equatorial_trap");
    const MelnikovRoot seed{1.1, -kPi, true};
    const PeriodicOrbitBranch branch = continue_periodic_orbit(scn, seed, 32);
    CHECK(branch.fixed_phi == 1.1);
    CHECK(std::abs(branch.multiplier - 1.0) <= 1e-12);
    CHECK(branch.stability == Stability::marginal);
    CHECK(std::abs(branch.period_physical - scn.unperturbed_period()) <=
          1e-12 * scn.unperturbed_period());
    // Every latitude circle is an orbit; the trace stays on the seed's cone.
    for (const UnitVector& x : branch.orbit_samples) {
        CHECK(std::abs(x.coords().dot(scn.pole_axis().coords()) - std::cos(1.1)) <= 1e-12);
    }
}

TEST_CASE("section longitude does not move the equatorial fixed point") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, "equatorial_trap");
    const PoincareReturn ret = poincare_map(scn, kPi / 2.0, 0.9);
    CHECK(std::abs(ret.phi_return - kPi / 2.0) <= 1e-12);
    CHECK(std::abs(ret.t_return - scn.unperturbed_period()) <= 1e-12 * scn.unperturbed_period());
}

TEST_CASE("non-simple drift-integral zero is refused") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, "equatorial_trap");
    const MelnikovRoot degenerate{1.0, 0.0, false};
    CHECK_THROWS_AS(continue_periodic_orbit(scn, degenerate), NonSimpleRoot);
}

TEST_CASE("seed far from any fixed point diverges out of the polar band") {
    // Near the pole the map pushes iterates outward; the first Newton step
    // from phi = 0.05 overshoots below the band floor.
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, "equatorial_trap");
    const MelnikovRoot bogus{0.05, kPi, true};
    CHECK_THROWS_AS(continue_periodic_orbit(scn, bogus), NewtonDivergence);
}

TEST_CASE("orbit trace input validation") {
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, "equatorial_trap");
    CHECK_THROWS_AS(orbit_trace(scn, kPi / 2.0, 0.0, 1), ValidationError);
}
