// Local chart of the projected flow around either pole of the scenario frame.
//
// In the frame where the unperturbed axis is e3, a point near the north pole
// is (x1, x2, w) with w = sqrt(1 - x1^2 - x2^2) > 0, and the projected flow
// restricted to the chart reads
//
//   x1' =  (|X0| + eps G1) x2 - eps G2 w
//   x2' = -(|X0| + eps G1) x1 + eps G3 w
//
// with the field components evaluated at (x1, x2, w).  The south pole is
// handled through the antipodal reflection u = -x, under which the dynamics
// keeps exactly this form with the reflected field G~_i(u) = G_i(-u); all
// south-chart quantities (locations, traces, first-order laws) are therefore
// expressed in the reflected chart and the same formulas apply verbatim.
//
// The Jacobian is exact: field derivatives are differentiated through the
// constraint w(x1, x2) as dG/dx_j = d_j G - d_3 G * x_j / w.
#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/scenario.hpp"
#include "spherefsb/so3.hpp"

namespace spherefsb {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class Pole { north, south };

inline const char* to_string(Pole p) { return p == Pole::north ? "north" : "south"; }

class PoleChart {
public:
    PoleChart(const Scenario& scn, Pole pole)
        : pole_(pole),
          omega0_(scn.omega0()),
          epsilon_(scn.epsilon()),
          field_(pole == Pole::south ? scn.field().reflected() : scn.field()),
          frame_(scn.frame().matrix()),
          domain_margin_(scn.tolerances().chart_domain) {}

    Pole pole() const { return pole_; }
    double omega0() const { return omega0_; }
    double epsilon() const { return epsilon_; }
    const PerturbationField& field() const { return field_; }

    // w = sqrt(1 - |x|^2); the chart requires |x|^2 < 1 - margin.
    double third_coordinate(const Vec2& x) const {
        const double r2 = x.squaredNorm();
        if (!(r2 < 1.0 - domain_margin_)) {
            throw ChartDomainExceeded("chart: |x|^2 = " + std::to_string(r2) +
                                      " too close to the chart boundary");
        }
        return std::sqrt(1.0 - r2);
    }

    Vec2 vector_field(const Vec2& x) const {
        const double w = third_coordinate(x);
        const Vec3 s(x[0], x[1], w);
        const double g1 = field_.eval(FieldComponent::G1, s);
        const double g2 = field_.eval(FieldComponent::G2, s);
        const double g3 = field_.eval(FieldComponent::G3, s);
        return Vec2(omega0_ * x[1] + epsilon_ * (g1 * x[1] - g2 * w),
                    -omega0_ * x[0] - epsilon_ * (g1 * x[0] - g3 * w));
    }

    Mat2 jacobian(const Vec2& x) const {
        const double w = third_coordinate(x);
        const Vec3 s(x[0], x[1], w);
        const double g1 = field_.eval(FieldComponent::G1, s);
        const double g2 = field_.eval(FieldComponent::G2, s);
        const double g3 = field_.eval(FieldComponent::G3, s);

        // Total derivative of a component along the chart: the third
        // coordinate moves as dw/dx_j = -x_j / w.
        auto dg = [&](FieldComponent c, int j) {
            return field_.eval_partial(c, j, s) -
                   field_.eval_partial(c, 2, s) * x[j] / w;
        };

        Mat2 jac;
        jac(0, 0) = epsilon_ * (x[1] * dg(FieldComponent::G1, 0) -
                                w * dg(FieldComponent::G2, 0) + g2 * x[0] / w);
        jac(0, 1) = omega0_ + epsilon_ * (g1 + x[1] * dg(FieldComponent::G1, 1) -
                                          w * dg(FieldComponent::G2, 1) + g2 * x[1] / w);
        jac(1, 0) = -omega0_ - epsilon_ * (g1 + x[0] * dg(FieldComponent::G1, 0) -
                                           w * dg(FieldComponent::G3, 0) + g3 * x[0] / w);
        jac(1, 1) = epsilon_ * (-x[0] * dg(FieldComponent::G1, 1) +
                                w * dg(FieldComponent::G3, 1) - g3 * x[1] / w);
        return jac;
    }

    // Ambient sphere point of a chart point (undoes the frame, and for the
    // south chart the antipodal reflection).
    UnitVector ambient(const Vec2& x) const {
        const double w = third_coordinate(x);
        Vec3 s(x[0], x[1], w);
        if (pole_ == Pole::south) s = -s;
        return UnitVector::normalized(frame_.transpose() * s);
    }

    // Chart coordinates of an ambient point on this pole's side.
    Vec2 from_ambient(const UnitVector& p) const {
        Vec3 s = frame_ * p.coords();
        if (pole_ == Pole::south) s = -s;
        const double r2 = s.x() * s.x() + s.y() * s.y();
        if (!(s.z() > 0.0) || !(r2 < 1.0 - domain_margin_)) {
            throw ChartDomainExceeded("chart: ambient point is not on this pole's side");
        }
        return Vec2(s.x(), s.y());
    }

    // First-order equilibrium location (eps/|X0|) (G3, G2) at the chart pole.
    Vec2 predicted_equilibrium() const {
        const Vec3 pole(0.0, 0.0, 1.0);
        return (epsilon_ / omega0_) * Vec2(field_.eval(FieldComponent::G3, pole),
                                           field_.eval(FieldComponent::G2, pole));
    }

    // First-order coefficient of the Jacobian trace at the equilibrium:
    // trace = eps * (-d1 G2 + d2 G3)(pole) + O(eps^2).
    double trace_first_order() const {
        const Vec3 pole(0.0, 0.0, 1.0);
        return -field_.eval_partial(FieldComponent::G2, 0, pole) +
               field_.eval_partial(FieldComponent::G3, 1, pole);
    }

private:
    Pole pole_;
    double omega0_;
    double epsilon_;
    PerturbationField field_;
    Mat3 frame_;
    double domain_margin_;
};

} // namespace spherefsb
