// Scenario: the full problem statement for one analysis run — unperturbed
// rotation X0, surviving symmetry axis Q, perturbation field, perturbation
// size epsilon, and numerical tolerances.
//
// The scenario also owns the deterministic pole frame B mapping X0's
// direction to the north pole: B = Rz(frame_twist) * frame_to_pole(X0/|X0|).
// frame_twist defaults to 0; any value yields another valid frame (the
// analysis results must not depend on it, which the tests exercise).
#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/so3.hpp"

namespace spherefsb {

struct Tolerances {
    double integ_rel = 1e-10;   // adaptive integrator relative tolerance
    double integ_abs = 1e-10;   // adaptive integrator absolute tolerance
    double newton = 1e-12;      // residual target for equilibrium/fixed-point searches
    double quadrature = 1e-12;  // node-doubling agreement target for the drift integral
    double max_step = 0.0;      // max integrator step; 0 = auto (quarter unperturbed period)
    double phi_min = 1e-3;      // admissible colatitude band is (phi_min, pi - phi_min)
    double chart_domain = 1e-6; // chart evaluation requires x1^2 + x2^2 < 1 - chart_domain
};

class Scenario {
public:
    Scenario(const AlgebraElement& x0, const AlgebraElement& q, PerturbationField field,
             double epsilon, Tolerances tolerances = {}, double frame_twist = 0.0)
        : x0_(x0),
          q_(q),
          field_(std::move(field)),
          epsilon_(epsilon),
          tolerances_(tolerances),
          frame_twist_(frame_twist),
          frame_(Rotation::identity()) {
        if (!(x0_.norm() > 0.0)) {
            throw ValidationError("Scenario: |X0| must be positive");
        }
        if (std::abs(q_.norm() - 1.0) > tol::unit) {
            throw ValidationError("Scenario: |Q| must be 1 to 1e-12 (got " +
                                  std::to_string(q_.norm()) + ")");
        }
        if (!(epsilon_ >= 0.0)) {
            throw ValidationError("Scenario: epsilon must be >= 0");
        }
        if (epsilon_ > field_.epsilon_cap()) {
            throw ValidationError("Scenario: epsilon " + std::to_string(epsilon_) +
                                  " exceeds field epsilon_cap " +
                                  std::to_string(field_.epsilon_cap()));
        }
        if (!(tolerances_.integ_rel > 0.0) || !(tolerances_.integ_abs > 0.0) ||
            !(tolerances_.newton > 0.0) || !(tolerances_.quadrature > 0.0) ||
            !(tolerances_.phi_min > 0.0) || tolerances_.phi_min >= kPi / 2.0 ||
            !(tolerances_.chart_domain > 0.0) || !(tolerances_.max_step >= 0.0)) {
            throw ValidationError("Scenario: tolerances out of range");
        }
        frame_ = Rotation(
            (exp_so3(AlgebraElement(0.0, 0.0, 1.0), frame_twist_).matrix() *
             frame_to_pole(pole_axis()).matrix()),
            tol::orth_integrated);
    }

    const AlgebraElement& x0() const { return x0_; }
    const AlgebraElement& q() const { return q_; }
    const PerturbationField& field() const { return field_; }
    double epsilon() const { return epsilon_; }
    const Tolerances& tolerances() const { return tolerances_; }
    double frame_twist() const { return frame_twist_; }

    // |X0|: the unperturbed rotation rate.
    double omega0() const { return x0_.norm(); }

    // X0's direction: the unperturbed north-side equilibrium of the projected flow.
    UnitVector pole_axis() const { return UnitVector::normalized(x0_.axis); }

    // The pole frame B with B * pole_axis = e3.
    const Rotation& frame() const { return frame_; }

    double unperturbed_period() const { return kTwoPi / omega0(); }

    double max_step_effective() const {
        return tolerances_.max_step > 0.0 ? tolerances_.max_step : 0.25 * unperturbed_period();
    }

    // Combined generator axis m(x) = X0_axis + eps * g_axis(x) at a sphere point.
    Vec3 generator_axis_at(const Vec3& x) const {
        if (epsilon_ == 0.0 || field_.empty()) return x0_.axis;
        return x0_.axis + epsilon_ * eval_gs_axis(field_, x, frame_.matrix());
    }

    // Projected vector field on the sphere: x' = -m(x) x x = x x m(x).
    Vec3 sphere_field(const Vec3& x) const { return x.cross(generator_axis_at(x)); }

    // Generator axis for the group flow A' = A * cross_matrix(m(A^{-1} Q)).
    Vec3 group_generator_axis(const Mat3& a) const {
        return generator_axis_at(a.transpose() * q_.axis);
    }

    Scenario with_epsilon(double epsilon) const {
        return Scenario(x0_, q_, field_, epsilon, tolerances_, frame_twist_);
    }

    Scenario with_frame_twist(double twist) const {
        return Scenario(x0_, q_, field_, epsilon_, tolerances_, twist);
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << "x0=" << x0_.axis.x() << "," << x0_.axis.y() << "," << x0_.axis.z()
           << ";q=" << q_.axis.x() << "," << q_.axis.y() << "," << q_.axis.z()
           << ";eps=" << epsilon_ << ";twist=" << frame_twist_ << ";field{" << field_.describe()
           << "};tol=" << tolerances_.integ_rel << "," << tolerances_.integ_abs << ","
           << tolerances_.newton << "," << tolerances_.quadrature << "," << tolerances_.max_step
           << "," << tolerances_.phi_min << "," << tolerances_.chart_domain;
        return os.str();
    }

    // FNV-1a over the canonical description: a stable opaque id for
    // trajectories produced under this scenario.
    uint64_t hash() const {
        const std::string s = describe();
        uint64_t h = 1469598103934665603ull;
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        return h;
    }

private:
    AlgebraElement x0_;
    AlgebraElement q_;
    PerturbationField field_;
    double epsilon_;
    Tolerances tolerances_;
    double frame_twist_;
    Rotation frame_;
};

} // namespace spherefsb
