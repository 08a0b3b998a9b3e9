// Pole charts and the equilibrium finder: chart field against the ambient
// flow, exact Jacobian against finite differences, first-order location and
// trace laws, stability classification, and the divergence/mismatch errors.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "spherefsb/chart.hpp"
#include "spherefsb/equilibrium.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/scenario.hpp"

#include "oracles.hpp"

using namespace spherefsb;

namespace {

Scenario make_scenario(const Vec3& x0, double eps, PerturbationField f, Tolerances tols = {},
                       double twist = 0.0) {
    return Scenario(AlgebraElement(x0), AlgebraElement(0.0, 0.0, 1.0), std::move(f), eps, tols,
                    twist);
}

PerturbationField random_field(std::mt19937& rng, double amplitude = 0.5) {
    PerturbationField f(1.0);
    std::uniform_int_distribution<int> deg(0, 2);
    for (FieldComponent c : {FieldComponent::G1, FieldComponent::G2, FieldComponent::G3}) {
        for (int n = 0; n < 3; ++n) {
            f.add_term(c, deg(rng), deg(rng), deg(rng),
                       oracle::uniform(rng, -amplitude, amplitude));
        }
    }
    return f;
}

Vec2 random_chart_point(std::mt19937& rng, double rmax = 0.8) {
    while (true) {
        const Vec2 x(oracle::uniform(rng, -rmax, rmax), oracle::uniform(rng, -rmax, rmax));
        if (x.norm() < rmax) return x;
    }
}

} // namespace

TEST_CASE("chart field matches the ambient sphere flow in both charts") {
    std::mt19937 rng(21);
    const Vec3 x0(0.4, -0.1, 0.8);
    for (int trial = 0; trial < 20; ++trial) {
        const Scenario scn = make_scenario(x0, 0.05, random_field(rng), {}, 0.3);
        const Mat3 b = scn.frame().matrix();

        for (Pole pole : {Pole::north, Pole::south}) {
            const PoleChart chart(scn, pole);
            const Vec2 x = random_chart_point(rng);
            const Vec2 h = chart.vector_field(x);

            // Ambient velocity pulled back into the chart: s = (+/-) B x_amb,
            // so s' = (+/-) B x_amb' and the chart rate is its first two rows.
            const Vec3 ambient_vel = scn.sphere_field(chart.ambient(x).coords());
            Vec3 s_dot = b * ambient_vel;
            if (pole == Pole::south) s_dot = -s_dot;

            CHECK(std::abs(h[0] - s_dot.x()) < 1e-12);
            CHECK(std::abs(h[1] - s_dot.y()) < 1e-12);
        }
    }
}

TEST_CASE("chart jacobian matches central differences") {
    std::mt19937 rng(22);
    const Vec3 x0(0.0, 0.5, 1.2);
    for (int trial = 0; trial < 10; ++trial) {
        const Scenario scn = make_scenario(x0, 0.04, random_field(rng));
        for (Pole pole : {Pole::north, Pole::south}) {
            const PoleChart chart(scn, pole);
            const Vec2 x = random_chart_point(rng, 0.6);
            const Mat2 jac = chart.jacobian(x);

            const double step = 1e-6;
            for (int j = 0; j < 2; ++j) {
                Vec2 xp = x, xm = x;
                xp[j] += step;
                xm[j] -= step;
                const Vec2 diff = (chart.vector_field(xp) - chart.vector_field(xm)) / (2.0 * step);
                CHECK(std::abs(jac(0, j) - diff[0]) < 1e-6);
                CHECK(std::abs(jac(1, j) - diff[1]) < 1e-6);
            }
        }
    }
}

TEST_CASE("chart jacobian at the pole is the exact rotation block at eps = 0") {
    const Scenario scn =
        make_scenario(Vec3(0.3, -0.4, 0.5), 0.0, PerturbationField::builtin("equatorial_trap"));
    const PoleChart chart(scn, Pole::north);
    const Mat2 jac = chart.jacobian(Vec2::Zero());
    const double w0 = scn.omega0();
    CHECK(jac(0, 0) == 0.0);
    CHECK(jac(1, 1) == 0.0);
    CHECK(jac(0, 1) == w0);
    CHECK(jac(1, 0) == -w0);
}

TEST_CASE("chart domain and side checks") {
    const Scenario scn =
        make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, PerturbationField::builtin("polar_shift"));
    const PoleChart chart(scn, Pole::north);

    CHECK_THROWS_AS(chart.vector_field(Vec2(0.9999995, 0.0)), ChartDomainExceeded);
    CHECK_THROWS_AS(chart.third_coordinate(Vec2(1.5, 0.0)), ChartDomainExceeded);

    // A southern-hemisphere point does not belong to the north chart.
    CHECK_THROWS_AS(chart.from_ambient(UnitVector(Vec3(0.0, 0.0, -1.0))), ChartDomainExceeded);

    // Round trip chart -> ambient -> chart.
    std::mt19937 rng(23);
    for (Pole pole : {Pole::north, Pole::south}) {
        const PoleChart c(scn, pole);
        for (int trial = 0; trial < 50; ++trial) {
            const Vec2 x = random_chart_point(rng);
            const Vec2 back = c.from_ambient(c.ambient(x));
            CHECK((back - x).norm() < 1e-14);
        }
    }
}

TEST_CASE("equatorial trap: both polar equilibria sit at the origin and attract") {
    const Vec3 x0(0.3, -0.4, 0.5);
    const double eps = 0.02;
    const Scenario scn = make_scenario(x0, eps, PerturbationField::builtin("equatorial_trap"));

    for (Pole pole : {Pole::north, Pole::south}) {
        const EquilibriumBranch branch = find_equilibrium(scn, pole);
        INFO("pole = " << to_string(pole));

        // G2 = x1 x3 and G3 = 0 both vanish at the pole, so the equilibrium
        // does not move at all and the first-order prediction is exact.
        CHECK(branch.chart_location.norm() < 1e-14);
        CHECK(branch.predicted_first_order.norm() == 0.0);
        CHECK(branch.residual <= scn.tolerances().newton * scn.omega0());

        // Trace law: -d1 G2 + d2 G3 = -x3 at the pole, and the reflected
        // field of the south chart has the same form, so both poles contract.
        CHECK(branch.trace_first_order == -1.0);
        CHECK(branch.stability == Stability::stable);

        const double re = branch.eigenvalues[0].real();
        const double im = std::abs(branch.eigenvalues[0].imag());
        CHECK(std::abs(re - (-eps / 2.0)) < 1e-6);
        CHECK(std::abs(im - scn.omega0()) < 1e-2);

        // Ambient location is the corresponding rotation-axis endpoint.
        const Vec3 axis = scn.pole_axis().coords();
        const Vec3 expected = pole == Pole::north ? axis : Vec3(-axis);
        CHECK((branch.location.coords() - expected).norm() < 1e-12);
    }
}

TEST_CASE("polar shift: equilibrium obeys the first-order location law") {
    const double eps = 0.01;
    const Scenario scn =
        make_scenario(Vec3(0.0, 0.0, 1.0), eps, PerturbationField::builtin("polar_shift"));

    for (Pole pole : {Pole::north, Pole::south}) {
        const EquilibriumBranch branch = find_equilibrium(scn, pole);
        INFO("pole = " << to_string(pole));

        // Constant components: (G3, G2) = (0.5, 0.3) at either pole (the
        // reflection leaves degree-0 terms unchanged).
        CHECK((branch.predicted_first_order - eps * Vec2(0.5, 0.3)).norm() < 1e-15);
        CHECK((branch.chart_location - branch.predicted_first_order).norm() < 10.0 * eps * eps);
        CHECK(branch.residual <= scn.tolerances().newton * scn.omega0());

        // The trace law is silent for constant fields; the exact eigenvalues
        // stay a near-marginal rotation pair.
        CHECK(branch.trace_first_order == 0.0);
        CHECK(std::abs(std::abs(branch.eigenvalues[0].imag()) - scn.omega0()) < 1e-2);
    }
}

TEST_CASE("equilibrium location law sharpens quadratically in eps") {
    const PerturbationField f = PerturbationField::builtin("polar_shift");
    const Scenario base = make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, f);

    double previous_ratio = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double eps = 0.01 / (1 << k);
        const EquilibriumBranch branch = find_equilibrium(base.with_epsilon(eps), Pole::north);
        const double gap = (branch.chart_location - branch.predicted_first_order).norm();
        const double ratio = gap / (eps * eps);
        if (k > 0) {
            CHECK(ratio < 2.0 * previous_ratio + 1e-12);
            CHECK(ratio > previous_ratio / 2.0 - 1e-12);
        }
        previous_ratio = ratio;
    }
}

TEST_CASE("newton diverges when the predicted equilibrium is far from the pole") {
    PerturbationField f(1.0);
    f.add_term(FieldComponent::G2, 0, 0, 0, 30.0);
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.05, f);
    CHECK_THROWS_AS(find_equilibrium(scn, Pole::north), NewtonDivergence);
}

TEST_CASE("first-order/exact stability contradiction is reported") {
    // A weak contracting signal at the pole (-d1 G2 = -1e-4) overturned at
    // the shifted equilibrium x1 ~ eps/2 by the quadratic term.
    PerturbationField f;
    f.add_term(FieldComponent::G2, 1, 0, 1, 1e-4);
    f.add_term(FieldComponent::G2, 2, 0, 1, -1.0);
    f.add_term(FieldComponent::G3, 0, 0, 0, 0.5);
    const Scenario scn = make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, f);
    CHECK_THROWS_AS(find_equilibrium(scn, Pole::north), StabilityCriterionMismatch);

    // The same field with the quadratic term removed is honestly stable.
    PerturbationField g;
    g.add_term(FieldComponent::G2, 1, 0, 1, 1e-4);
    g.add_term(FieldComponent::G3, 0, 0, 0, 0.5);
    const EquilibriumBranch branch =
        find_equilibrium(make_scenario(Vec3(0.0, 0.0, 1.0), 0.01, g), Pole::north);
    CHECK(branch.stability == Stability::stable);
}

TEST_CASE("unperturbed equilibria are marginal rotation centers") {
    const Scenario scn =
        make_scenario(Vec3(0.2, 0.3, -0.9), 0.0, PerturbationField::builtin("equatorial_trap"));
    for (Pole pole : {Pole::north, Pole::south}) {
        const EquilibriumBranch branch = find_equilibrium(scn, pole);
        CHECK(branch.chart_location.norm() == 0.0);
        CHECK(branch.stability == Stability::marginal);
        CHECK(branch.eigenvalues[0].real() == 0.0);
        CHECK(std::abs(branch.eigenvalues[0].imag() - scn.omega0()) < 1e-15);
        CHECK(branch.eigenvalues[1] == std::conj(branch.eigenvalues[0]));
    }
}

TEST_CASE("eigenvalue helper handles real and complex spectra") {
    Mat2 saddle;
    saddle << 2.0, 0.0, 0.0, -3.0;
    auto ev = eigenvalues_2x2(saddle);
    CHECK(ev[0] == std::complex<double>(2.0, 0.0));
    CHECK(ev[1] == std::complex<double>(-3.0, 0.0));

    Mat2 rotation;
    rotation << 0.5, 2.0, -2.0, 0.5;
    ev = eigenvalues_2x2(rotation);
    CHECK(ev[0] == std::complex<double>(0.5, 2.0));
    CHECK(ev[1] == std::complex<double>(0.5, -2.0));
}

TEST_CASE("stability classifiers") {
    CHECK(classify_real_part(-1e-3, 1.0) == Stability::stable);
    CHECK(classify_real_part(1e-3, 1.0) == Stability::unstable);
    CHECK(classify_real_part(1e-13, 1.0) == Stability::marginal);
    CHECK(classify_real_part(0.0, 1.0) == Stability::marginal);

    CHECK(classify_multiplier(0.5) == Stability::stable);
    CHECK(classify_multiplier(1.5) == Stability::unstable);
    CHECK(classify_multiplier(1.0) == Stability::marginal);
    CHECK(classify_multiplier(1.0 + 5e-11) == Stability::marginal);
}
