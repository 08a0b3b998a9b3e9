// so(3)/SO(3) kernel: skew-matrix codec, Rodrigues exponential and logarithm,
// axis conjugation, and deterministic pole-aligning frames.
//
// Two skew-matrix layouts for a 3-vector v are in circulation and they differ
// by a transpose.  This library uses both, for different jobs, and keeps them
// strictly apart:
//
//   hat(v)          acts as  hat(v) * w  = w x v   (storage/codec layout)
//   cross_matrix(v) acts as  cross_matrix(v) * w = v x w
//
// hat()/vee() define how an algebra element is written down and read back as
// a matrix.  cross_matrix() is the generator of the rotation flow: the
// one-parameter group t -> exp_so3(X, t) solves R' = cross_matrix(X.axis) * R,
// i.e. exp_so3 rotates counterclockwise about X.axis by |X.axis|*t radians.
// The two are transposes of each other: cross_matrix(v) == hat(v)^T.
#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "spherefsb/errors.hpp"

namespace spherefsb {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace tol {
inline constexpr double skew = 1e-10;           // vee() precondition on the symmetric part
inline constexpr double orth = 1e-12;           // Rotation invariants at construction
inline constexpr double orth_integrated = 1e-9; // Rotation invariants after long integration
inline constexpr double unit = 1e-12;           // UnitVector invariant
inline constexpr double log_antipodal = 1e-6;   // injectivity-radius guard for log_so3
inline constexpr double renorm_trigger = 1e-11; // orthogonality drift that forces re-orthonormalization
inline constexpr double exp_taylor_switch = 1e-4; // |X|*t below which Rodrigues uses series coefficients
} // namespace tol

// Skew codec layout: hat(v) * w = w x v for all w.
inline Mat3 hat(const Vec3& v) {
    Mat3 m;
    m << 0.0, v.z(), -v.y(),
        -v.z(), 0.0, v.x(),
        v.y(), -v.x(), 0.0;
    return m;
}

// Generator layout: cross_matrix(v) * w = v x w.  Equals hat(v) transposed.
inline Mat3 cross_matrix(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
        v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return m;
}

// Inverse of hat() on skew matrices.  Rejects input whose symmetric part
// exceeds tau_skew in max-abs norm.
inline Vec3 vee(const Mat3& m, double tau_skew = tol::skew) {
    const Mat3 sym = 0.5 * (m + m.transpose());
    if (sym.cwiseAbs().maxCoeff() > tau_skew) {
        throw NonSkewInput("vee: symmetric part " + std::to_string(sym.cwiseAbs().maxCoeff()) +
                           " exceeds tolerance " + std::to_string(tau_skew));
    }
    const Mat3 s = 0.5 * (m - m.transpose());
    return Vec3(s(1, 2), s(2, 0), s(0, 1));
}

// Element of so(3), stored as its axis vector.
struct AlgebraElement {
    Vec3 axis{0.0, 0.0, 0.0};

    AlgebraElement() = default;
    explicit AlgebraElement(const Vec3& a) : axis(a) {}
    AlgebraElement(double x, double y, double z) : axis(x, y, z) {}

    // Single-bar norm |X| (the rotation rate); the Frobenius matrix norm of
    // either skew layout is sqrt(2) times this.
    double norm() const { return axis.norm(); }
    double frobenius_norm() const { return std::sqrt(2.0) * axis.norm(); }

    Mat3 hat_matrix() const { return hat(axis); }
    Mat3 generator() const { return cross_matrix(axis); }
};

// Symmetric polar factor: the nearest rotation matrix in Frobenius norm.
inline Mat3 polar_orthonormalize(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 flip = Mat3::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

inline double orthogonality_error_of(const Mat3& m) {
    const double gram = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = std::abs(m.determinant() - 1.0);
    return std::max(gram, det);
}

// Element of SO(3).  Validated at construction; composition and inversion are
// closed to round-off, and renormalized() recovers orthonormality after long
// composition chains.
class Rotation {
public:
    explicit Rotation(const Mat3& m, double tau = tol::orth) : m_(m) {
        const double err = orthogonality_error_of(m_);
        if (!(err <= tau)) {
            throw NonOrthogonalInput("Rotation: orthogonality error " + std::to_string(err) +
                                     " exceeds tolerance " + std::to_string(tau));
        }
    }

    static Rotation identity() { return Rotation(Mat3::Identity()); }

    const Mat3& matrix() const { return m_; }
    Rotation inverse() const { return Rotation(m_.transpose(), tol::orth_integrated); }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    Rotation operator*(const Rotation& other) const {
        return Rotation(m_ * other.m_, tol::orth_integrated);
    }

    double orthogonality_error() const { return orthogonality_error_of(m_); }
    Rotation renormalized() const { return Rotation(polar_orthonormalize(m_)); }

private:
    Mat3 m_;
};

// Point on the unit sphere.
class UnitVector {
public:
    explicit UnitVector(const Vec3& v, double tau = tol::unit) : v_(v) {
        const double err = std::abs(v_.norm() - 1.0);
        if (!(err <= tau)) {
            throw NonUnitInput("UnitVector: |norm - 1| = " + std::to_string(err) +
                               " exceeds tolerance " + std::to_string(tau));
        }
    }

    // Projects an arbitrary nonzero vector onto the sphere.
    static UnitVector normalized(const Vec3& v) {
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw NonUnitInput("UnitVector::normalized: vector has no direction (norm " +
                               std::to_string(n) + ")");
        }
        return UnitVector(v / n);
    }

    const Vec3& coords() const { return v_; }
    double dot(const UnitVector& other) const { return v_.dot(other.v_); }

private:
    Vec3 v_;
};

// Rodrigues closed form for exp(cross_matrix(X.axis) * t).  Near zero angle
// the two trigonometric coefficients switch to 4-term Taylor series to avoid
// cancellation.
inline Rotation exp_so3(const AlgebraElement& x, double t) {
    const Vec3 u = x.axis * t;
    const double theta2 = u.squaredNorm();
    const double theta = std::sqrt(theta2);
    double s1; // sin(theta)/theta
    double s2; // (1 - cos(theta))/theta^2
    if (theta < tol::exp_taylor_switch) {
        s1 = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0 - theta2 * theta2 * theta2 / 5040.0;
        s2 = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0 - theta2 * theta2 * theta2 / 40320.0;
    } else {
        s1 = std::sin(theta) / theta;
        s2 = (1.0 - std::cos(theta)) / theta2;
    }
    const Mat3 k = cross_matrix(u);
    const Mat3 r = Mat3::Identity() + s1 * k + s2 * (k * k);
    return Rotation(r, tol::orth_integrated);
}

// Principal logarithm: the algebra element L with exp_so3(L, 1) = R and
// |L.axis| < pi - delta.  Angles at or beyond pi - delta are rejected (the
// axis becomes ill-conditioned there).
inline AlgebraElement log_so3(const Rotation& r, double delta = tol::log_antipodal) {
    const Mat3& m = r.matrix();
    const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double theta = std::acos(c);
    constexpr double pi = 3.14159265358979323846;
    if (theta >= pi - delta) {
        throw NearAntipodalRotation("log_so3: rotation angle " + std::to_string(theta) +
                                    " within " + std::to_string(delta) + " of pi");
    }
    const Vec3 w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    double factor; // theta / (2 sin(theta))
    if (theta < tol::exp_taylor_switch) {
        const double t2 = theta * theta;
        factor = 0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0;
    } else {
        factor = theta / (2.0 * std::sin(theta));
    }
    return AlgebraElement(factor * w);
}

// Conjugation acts on axes as plain matrix-vector action:
// A * hat(v) * A^{-1} = hat(A v) for every A in SO(3) (and the same identity
// holds for the cross_matrix layout).
inline AlgebraElement conjugate_axis(const Rotation& a, const AlgebraElement& x) {
    return AlgebraElement(a.matrix() * x.axis);
}

// Deterministic frame taking u to the north pole e3: rotate about the axis
// u x e3 by the angle between u and e3.  For u within tol::unit of -e3 the
// fallback is the half-turn about e1, diag(1, -1, -1).
inline Rotation frame_to_pole(const UnitVector& u) {
    const Vec3& v = u.coords();
    const double c = v.z(); // cos(angle to e3)
    if (c <= -1.0 + tol::unit) {
        Mat3 m = Mat3::Identity();
        m(1, 1) = -1.0;
        m(2, 2) = -1.0;
        return Rotation(m);
    }
    const Vec3 w = v.cross(Vec3(0.0, 0.0, 1.0));
    const Mat3 k = cross_matrix(w);
    const Mat3 m = Mat3::Identity() + k + (k * k) / (1.0 + c);
    return Rotation(m, tol::orth_integrated);
}

// Rotation by `angle` radians about a unit axis (counterclockwise when the
// axis points at the viewer).
inline Rotation rotation_about(const UnitVector& axis, double angle) {
    return exp_so3(AlgebraElement(axis.coords()), angle);
}

} // namespace spherefsb
