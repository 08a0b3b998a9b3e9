// Persistent equilibria of the projected flow near the poles.
//
// The unperturbed flow fixes both poles of the rotation axis; for small eps
// each survives as an equilibrium of the chart vector field at distance
// O(eps) from the pole, located here by Newton iteration from the
// first-order prediction (eps/|X0|) (G3, G2)(pole).  Stability comes from
// the exact 2x2 chart Jacobian; the first-order trace law is evaluated
// alongside and a contradiction between the two classifications (when the
// first-order signal is decisive) is reported as an error rather than
// silently resolved.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "spherefsb/chart.hpp"
#include "spherefsb/errors.hpp"
#include "spherefsb/scenario.hpp"
#include "spherefsb/stability.hpp"

namespace spherefsb {

// Eigenvalues of a 2x2 matrix, largest real part first; a complex pair is
// returned with the +imaginary member first.
inline std::array<std::complex<double>, 2> eigenvalues_2x2(const Mat2& m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return {std::complex<double>(0.5 * (tr + root), 0.0),
                std::complex<double>(0.5 * (tr - root), 0.0)};
    }
    const double imag = 0.5 * std::sqrt(-disc);
    return {std::complex<double>(0.5 * tr, imag), std::complex<double>(0.5 * tr, -imag)};
}

struct EquilibriumBranch {
    Pole pole = Pole::north;
    double epsilon = 0.0;
    Vec2 chart_location = Vec2::Zero();       // in the pole's own chart
    Vec2 predicted_first_order = Vec2::Zero(); // (eps/|X0|) (G3, G2)(pole)
    UnitVector location = UnitVector(Vec3(0.0, 0.0, 1.0)); // ambient sphere point
    double trace_first_order = 0.0;            // trace law coefficient at the pole
    std::array<std::complex<double>, 2> eigenvalues{};
    Stability stability = Stability::marginal;
    double residual = 0.0;                     // |H| at the accepted location
};

// Newton search for the chart equilibrium continuing the given pole.
// Diverging from the O(eps) neighborhood (leaving |x| <= 0.5, producing a
// non-finite iterate, or failing to converge in 50 steps) is an error: a
// persistent equilibrium near the pole has ceased to exist at this eps.
inline EquilibriumBranch find_equilibrium(const Scenario& scn, Pole pole) {
    const PoleChart chart(scn, pole);
    constexpr double kRadius = 0.5;
    constexpr int kMaxIterations = 50;

    Vec2 x = chart.predicted_equilibrium();
    auto check_iterate = [&](const Vec2& v) {
        if (!v.allFinite() || v.norm() > kRadius) {
            throw NewtonDivergence("find_equilibrium(" + std::string(to_string(pole)) +
                                   "): iterate left the chart search radius " +
                                   std::to_string(kRadius));
        }
    };
    check_iterate(x);

    const double target = scn.tolerances().newton * scn.omega0();
    Vec2 h = chart.vector_field(x);
    for (int iter = 0; h.norm() > target; ++iter) {
        if (iter >= kMaxIterations) {
            throw NewtonDivergence("find_equilibrium(" + std::string(to_string(pole)) +
                                   "): no convergence after " +
                                   std::to_string(kMaxIterations) + " iterations (|H| = " +
                                   std::to_string(h.norm()) + ")");
        }
        const Mat2 jac = chart.jacobian(x);
        x -= jac.fullPivLu().solve(h);
        check_iterate(x);
        h = chart.vector_field(x);
    }

    EquilibriumBranch branch;
    branch.pole = pole;
    branch.epsilon = scn.epsilon();
    branch.chart_location = x;
    branch.predicted_first_order = chart.predicted_equilibrium();
    branch.location = chart.ambient(x);
    branch.trace_first_order = chart.trace_first_order();
    branch.eigenvalues = eigenvalues_2x2(chart.jacobian(x));
    branch.residual = h.norm();

    const double max_re =
        std::max(branch.eigenvalues[0].real(), branch.eigenvalues[1].real());
    branch.stability = classify_real_part(max_re, scn.omega0());

    // Cross-check the first-order trace law when it is decisive.  The exact
    // eigenvalues are authoritative; a sign contradiction means the two
    // stability accounts genuinely disagree and must not pass silently.
    const double first_order_re = scn.epsilon() * branch.trace_first_order;
    if (std::abs(first_order_re) >= 1e-9 * scn.omega0()) {
        const Stability predicted =
            first_order_re < 0.0 ? Stability::stable : Stability::unstable;
        if (predicted != branch.stability) {
            throw StabilityCriterionMismatch(
                "find_equilibrium(" + std::string(to_string(pole)) +
                "): first-order trace " + std::to_string(first_order_re) + " predicts " +
                to_string(predicted) + " but exact eigenvalues give " +
                to_string(branch.stability));
        }
    }
    return branch;
}

} // namespace spherefsb
