// SO(2)-invariant perturbation fields on the sphere.
//
// A PerturbationField is a triple of scalar polynomials (G1, G2, G3) in the
// ambient coordinates (x1, x2, x3), specified in the frame where the
// unperturbed rotation axis points at the north pole.  The induced algebra
// value at a point s is the element with standard axis (G3(s), G2(s), G1(s)),
// whose generator matrix is
//
//       [ 0    -G1    G2 ]
//       [ G1    0    -G3 ]
//       [ -G2   G3    0  ]
//
// That is the only quantity the dynamics consumes: the perturbed sphere field
// is x' = -(X0_axis + eps * g_axis(x)) x x.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "spherefsb/errors.hpp"
#include "spherefsb/so3.hpp"

namespace spherefsb {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class FieldComponent { G1 = 0, G2 = 1, G3 = 2 };

inline const char* to_string(FieldComponent c) {
    switch (c) {
    case FieldComponent::G1: return "G1";
    case FieldComponent::G2: return "G2";
    case FieldComponent::G3: return "G3";
    }
    return "?";
}

// coeff * x1^i * x2^j * x3^k
struct Monomial {
    int i = 0, j = 0, k = 0;
    double coeff = 0.0;
};

class PerturbationField {
public:
    static constexpr int kMaxDegree = 8;

    explicit PerturbationField(double epsilon_cap = 0.1) : epsilon_cap_(epsilon_cap) {
        if (!(epsilon_cap_ >= 0.0) || !std::isfinite(epsilon_cap_)) {
            throw ValidationError("PerturbationField: epsilon_cap must be finite and >= 0");
        }
    }

    void add_term(FieldComponent c, int i, int j, int k, double coeff) {
        if (i < 0 || j < 0 || k < 0 || i + j + k > kMaxDegree) {
            throw ValidationError("PerturbationField: monomial degree " +
                                  std::to_string(i + j + k) + " outside [0, " +
                                  std::to_string(kMaxDegree) + "]");
        }
        if (!std::isfinite(coeff)) {
            throw ValidationError("PerturbationField: non-finite coefficient");
        }
        if (coeff != 0.0) terms_[static_cast<int>(c)].push_back(Monomial{i, j, k, coeff});
    }

    const std::vector<Monomial>& terms(FieldComponent c) const {
        return terms_[static_cast<int>(c)];
    }

    double epsilon_cap() const { return epsilon_cap_; }

    bool empty() const {
        return terms_[0].empty() && terms_[1].empty() && terms_[2].empty();
    }

    double eval(FieldComponent c, const Vec3& x) const {
        double sum = 0.0;
        for (const Monomial& t : terms_[static_cast<int>(c)]) {
            sum += t.coeff * ipow(x.x(), t.i) * ipow(x.y(), t.j) * ipow(x.z(), t.k);
        }
        return sum;
    }

    // Exact partial derivative with respect to ambient coordinate
    // `coord` in {0,1,2}.
    double eval_partial(FieldComponent c, int coord, const Vec3& x) const {
        double sum = 0.0;
        for (const Monomial& t : terms_[static_cast<int>(c)]) {
            int e[3] = {t.i, t.j, t.k};
            if (e[coord] == 0) continue;
            const double factor = static_cast<double>(e[coord]);
            e[coord] -= 1;
            sum += t.coeff * factor * ipow(x.x(), e[0]) * ipow(x.y(), e[1]) * ipow(x.z(), e[2]);
        }
        return sum;
    }

    // The antipodally reflected field: G~_i(u) = G_i(-u).  Flips the sign of
    // every odd-degree monomial.
    PerturbationField reflected() const {
        PerturbationField out(epsilon_cap_);
        for (int c = 0; c < 3; ++c) {
            for (const Monomial& t : terms_[c]) {
                const double sign = ((t.i + t.j + t.k) % 2 == 0) ? 1.0 : -1.0;
                out.terms_[c].push_back(Monomial{t.i, t.j, t.k, sign * t.coeff});
            }
        }
        return out;
    }

    // Magnitude scale of the colatitude-drift components: sum of |coeff| over
    // the G2 and G3 tables.  Bounds |G2| and |G3| on the sphere; used to make
    // "zero" judgements scale-aware.
    double drift_scale() const {
        double s = 0.0;
        for (const Monomial& t : terms_[1]) s += std::abs(t.coeff);
        for (const Monomial& t : terms_[2]) s += std::abs(t.coeff);
        return s;
    }

    // Stable text form (fixed term order as entered) for hashing and echoing.
    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << "cap=" << epsilon_cap_;
        for (int c = 0; c < 3; ++c) {
            for (const Monomial& t : terms_[c]) {
                os << ";" << to_string(static_cast<FieldComponent>(c)) << "," << t.i << ","
                   << t.j << "," << t.k << "," << t.coeff;
            }
        }
        return os.str();
    }

    static bool is_builtin(const std::string& name) {
        return name == "equatorial_trap" || name == "polar_shift" || name == "zero";
    }

    // Named builtin fields:
    //   equatorial_trap: G1 = 0, G2 = x1*x3, G3 = 0
    //   polar_shift:     G1 = 0, G2 = 0.3,   G3 = 0.5
    //   zero:            all components zero
    static PerturbationField builtin(const std::string& name, double epsilon_cap = 0.1) {
        PerturbationField f(epsilon_cap);
        if (name == "equatorial_trap") {
            f.add_term(FieldComponent::G2, 1, 0, 1, 1.0);
        } else if (name == "polar_shift") {
            f.add_term(FieldComponent::G2, 0, 0, 0, 0.3);
            f.add_term(FieldComponent::G3, 0, 0, 0, 0.5);
        } else if (name == "zero") {
            // all components empty
        } else {
            throw ConfigError("unknown builtin field '" + name + "'");
        }
        return f;
    }

private:
    static double ipow(double base, int e) {
        double r = 1.0;
        for (int k = 0; k < e; ++k) r *= base;
        return r;
    }

    std::array<std::vector<Monomial>, 3> terms_;
    double epsilon_cap_;
};

// Colatitude/longitude pair: phi in (0, pi) strictly, theta reduced to
// [0, 2*pi).
struct SphericalPoint {
    double phi;
    double theta;

    SphericalPoint(double phi_in, double theta_in) : phi(phi_in), theta(theta_in) {
        if (!(phi > 0.0 && phi < kPi)) {
            throw ValidationError("SphericalPoint: phi = " + std::to_string(phi_in) +
                                  " not strictly inside (0, pi)");
        }
        theta = std::fmod(theta, kTwoPi);
        if (theta < 0.0) theta += kTwoPi;
    }

    Vec3 cartesian() const {
        const double sp = std::sin(phi);
        return Vec3(sp * std::cos(theta), sp * std::sin(theta), std::cos(phi));
    }
};

inline Vec3 eval_gss_axis(const PerturbationField& f, const Vec3& p) {
    return Vec3(f.eval(FieldComponent::G3, p), f.eval(FieldComponent::G2, p),
                f.eval(FieldComponent::G1, p));
}

// Algebra value of the perturbation at a point s of the pole-aligned frame:
// axis (G3(s), G2(s), G1(s)).  Its generator() matrix has the layout quoted
// at the top of this header.
inline AlgebraElement eval_gss(const PerturbationField& f, const UnitVector& s) {
    return AlgebraElement(eval_gss_axis(f, s.coords()));
}

// The same value seen from the scenario frame: conjugate the pole-frame value
// at B*x back by B^{-1}, i.e. axis(x) = B^T * axis_pole(B*x).
inline AlgebraElement eval_gs(const PerturbationField& f, const UnitVector& x,
                              const Rotation& frame) {
    const Vec3 s = frame.matrix() * x.coords();
    return AlgebraElement(frame.matrix().transpose() * eval_gss_axis(f, s));
}

inline Vec3 eval_gs_axis(const PerturbationField& f, const Vec3& x, const Mat3& frame) {
    return frame.transpose() * eval_gss_axis(f, frame * x);
}

// Spherical-coordinate coefficients: a = G1, b = G2, c = G3 evaluated at the
// Cartesian point of p.
inline std::array<double, 3> eval_abc(const PerturbationField& f, const SphericalPoint& p) {
    const Vec3 x = p.cartesian();
    return {f.eval(FieldComponent::G1, x), f.eval(FieldComponent::G2, x),
            f.eval(FieldComponent::G3, x)};
}

} // namespace spherefsb
