// The three flows of a scenario and their trajectory containers.
//
//  * flow_group  : A' = A * cross_matrix(m(A^T q)) on SO(3), via the
//                  commutator-free Lie stepper (iterates stay orthonormal).
//  * flow_sphere : x' = x cross m(x) on S^2, via Dormand-Prince with
//                  per-step renormalization.
//  * flow_chart  : the projected flow in spherical coordinates of the pole
//                  frame, reparametrized by the swept longitude so a fixed
//                  angular span can be integrated directly (the basis of the
//                  angular return map).
//
// project() sends a group state to its sphere point x = A^T q; the two flows
// satisfy project(flow_group(t, A0)) = flow_sphere(t, project(A0)) exactly at
// the equation level, which the tests verify numerically.
//
// Trajectories serialize to CSV with %.17g (lossless for doubles) and read
// back exactly.
#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/integrate.hpp"
#include "spherefsb/scenario.hpp"
#include "spherefsb/so3.hpp"

namespace spherefsb {

enum class TrajectoryKind { group, sphere };

inline const char* to_string(TrajectoryKind k) {
    return k == TrajectoryKind::group ? "group" : "sphere";
}

struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::sphere;
    std::vector<double> times;
    std::vector<Rotation> rotations; // kind == group: one per time
    std::vector<UnitVector> points;  // kind == sphere: one per time
    uint64_t scenario_hash = 0;

    size_t size() const { return times.size(); }

    void validate() const {
        if (times.empty()) throw ValidationError("Trajectory: empty");
        for (size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1])) {
                throw ValidationError("Trajectory: times not strictly increasing");
            }
        }
        const size_t want = times.size();
        if (kind == TrajectoryKind::group) {
            if (rotations.size() != want || !points.empty()) {
                throw ValidationError("Trajectory: group kind needs one rotation per time");
            }
        } else {
            if (points.size() != want || !rotations.empty()) {
                throw ValidationError("Trajectory: sphere kind needs one point per time");
            }
        }
    }
};

// x = A^T q: the sphere point tracked by a group state.
inline UnitVector project(const Scenario& scn, const Rotation& a) {
    return UnitVector::normalized(a.matrix().transpose() * scn.q().axis);
}

namespace detail {

inline std::vector<double> uniform_grid(double t_end, double dt_max) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw ValidationError("flow: t_end must be positive and finite");
    }
    const int n = std::max(2, static_cast<int>(std::ceil(t_end / dt_max)));
    std::vector<double> ts(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) ts[static_cast<size_t>(i)] = t_end * (double(i) / n);
    ts.front() = 0.0;
    ts.back() = t_end;
    return ts;
}

inline StepControl step_control(const Scenario& scn) {
    StepControl ctrl;
    ctrl.rel = scn.tolerances().integ_rel;
    ctrl.abs = scn.tolerances().integ_abs;
    ctrl.hmax = scn.max_step_effective();
    return ctrl;
}

} // namespace detail

// Group flow sampled at the given strictly increasing times (the first entry
// is the initial time; A0 is the state there).
inline Trajectory flow_group(const Scenario& scn, const Rotation& a0,
                             const std::vector<double>& sample_times) {
    Trajectory traj;
    traj.kind = TrajectoryKind::group;
    traj.scenario_hash = scn.hash();
    traj.times.reserve(sample_times.size());
    traj.rotations.reserve(sample_times.size());

    Mat3 a = a0.matrix();
    traj.times.push_back(sample_times.empty() ? 0.0 : sample_times.front());
    traj.rotations.push_back(a0);

    auto w = [&scn](double, const Mat3& m) { return scn.group_generator_axis(m); };
    integrate_cf4_through(w, sample_times, a, detail::step_control(scn),
                          [&traj](double t, const Mat3& m) {
                              traj.times.push_back(t);
                              traj.rotations.push_back(Rotation(m, tol::orth_integrated));
                          });
    traj.validate();
    return traj;
}

inline Trajectory flow_group(const Scenario& scn, const Rotation& a0, double t_end) {
    return flow_group(scn, a0, detail::uniform_grid(t_end, scn.max_step_effective()));
}

// Sphere flow sampled at the given strictly increasing times.
inline Trajectory flow_sphere(const Scenario& scn, const UnitVector& x0,
                              const std::vector<double>& sample_times) {
    Trajectory traj;
    traj.kind = TrajectoryKind::sphere;
    traj.scenario_hash = scn.hash();
    traj.times.reserve(sample_times.size());
    traj.points.reserve(sample_times.size());

    Vec3 x = x0.coords();
    traj.times.push_back(sample_times.empty() ? 0.0 : sample_times.front());
    traj.points.push_back(x0);

    auto f = [&scn](double, const Vec3& y) -> Vec3 { return scn.sphere_field(y); };
    integrate_dopri_through<3>(f, sample_times, x, detail::step_control(scn),
                               [](Vec3& y) { y.normalize(); },
                               [&traj](double t, const Vec3& y) {
                                   traj.times.push_back(t);
                                   traj.points.push_back(UnitVector::normalized(y));
                               });
    traj.validate();
    return traj;
}

inline Trajectory flow_sphere(const Scenario& scn, const UnitVector& x0, double t_end) {
    return flow_sphere(scn, x0, detail::uniform_grid(t_end, scn.max_step_effective()));
}

// ---------------------------------------------------------------------------
// Chart flow
// ---------------------------------------------------------------------------

// One sample of the chart flow: longitude theta (unwrapped, so it runs
// monotonically from theta0 to theta_end), colatitude phi, and the physical
// time elapsed since the start of the sweep.  Physical time is reported as a
// positive duration for either sweep direction; the underlying motion always
// decreases theta.
struct ChartSample {
    double theta = 0.0;
    double phi = 0.0;
    double time = 0.0;
};

struct ChartTrajectory {
    std::vector<ChartSample> samples;
    uint64_t scenario_hash = 0;

    const ChartSample& front() const { return samples.front(); }
    const ChartSample& back() const { return samples.back(); }
    double final_phi() const { return samples.back().phi; }
    double duration() const { return samples.back().time; }
};

// Integrate the projected flow in pole-frame spherical coordinates across a
// longitude span, using theta itself as the independent variable:
//
//   phi'   = eps (-b cos th + c sin th)
//   theta' = -|X0| - eps a + eps (b sin th + c cos th) cot phi
//
// with (a, b, c) = (G1, G2, G3) at the chart point.  Requires theta' to stay
// strictly negative along the sweep (throws DegenerateClock otherwise) and
// phi to stay inside (phi_min, pi - phi_min) (throws PolarBandExit).
// n_samples >= 2 selects the output resolution; 0 picks one sample per
// sixteenth of a turn.
inline ChartTrajectory flow_chart(const Scenario& scn, double phi0, double theta0,
                                  double theta_end, int n_samples = 0) {
    const double phi_min = scn.tolerances().phi_min;
    if (!(phi0 > phi_min && phi0 < kPi - phi_min)) {
        throw PolarBandExit("flow_chart: initial phi " + std::to_string(phi0) +
                            " outside admissible band");
    }
    const double span = theta_end - theta0;
    if (!(std::abs(span) > 0.0) || !std::isfinite(span)) {
        throw ValidationError("flow_chart: theta_end must differ from theta0");
    }
    const double sigma = span > 0.0 ? 1.0 : -1.0;
    const double u_end = std::abs(span);

    const double eps = scn.epsilon();
    const double omega0 = scn.omega0();
    auto f = [&](double u, const Eigen::Matrix<double, 2, 1>& y) {
        const double phi = y[0];
        if (!(phi > phi_min && phi < kPi - phi_min)) {
            throw PolarBandExit("flow_chart: phi = " + std::to_string(phi) +
                                " left the admissible band");
        }
        const double theta = theta0 + sigma * u;
        const auto abc = eval_abc(scn.field(), SphericalPoint(phi, theta));
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        const double phi_dot = eps * (-abc[1] * ct + abc[2] * st);
        const double theta_dot =
            -omega0 - eps * abc[0] +
            eps * (abc[1] * st + abc[2] * ct) * (std::cos(phi) / std::sin(phi));
        if (theta_dot >= -1e-10 * omega0) {
            throw DegenerateClock("flow_chart: theta' = " + std::to_string(theta_dot) +
                                  " is not negative; the longitude is no longer a clock");
        }
        Eigen::Matrix<double, 2, 1> dy;
        dy[0] = sigma * phi_dot / theta_dot;
        dy[1] = -1.0 / theta_dot;
        return dy;
    };

    int n = n_samples >= 2 ? n_samples - 1
                           : std::max(2, static_cast<int>(std::ceil(u_end / (kPi / 8.0))));
    std::vector<double> us(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) us[static_cast<size_t>(i)] = u_end * (double(i) / n);
    us.front() = 0.0;
    us.back() = u_end;

    ChartTrajectory traj;
    traj.scenario_hash = scn.hash();
    traj.samples.reserve(us.size());
    traj.samples.push_back({theta0, phi0, 0.0});

    StepControl ctrl = detail::step_control(scn);
    ctrl.hmax = kPi / 8.0; // the independent variable is an angle here

    Eigen::Matrix<double, 2, 1> y;
    y << phi0, 0.0;
    integrate_dopri_through<2>(f, us, y, ctrl, [](Eigen::Matrix<double, 2, 1>&) {},
                               [&](double u, const Eigen::Matrix<double, 2, 1>& s) {
                                   traj.samples.push_back({theta0 + sigma * u, s[0], s[1]});
                               });
    return traj;
}

// ---------------------------------------------------------------------------
// CSV serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline constexpr const char* kGroupHeader = "t,k00,k01,k02,k10,k11,k12,k20,k21,k22";
inline constexpr const char* kSphereHeader = "t,x1,x2,x3";

inline std::vector<double> parse_csv_row(const std::string& line, size_t expect, size_t lineno) {
    std::vector<double> vals;
    vals.reserve(expect);
    size_t pos = 0;
    while (pos <= line.size()) {
        size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string cell = line.substr(pos, comma - pos);
        try {
            size_t used = 0;
            vals.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ValidationError("trajectory csv: bad number '" + cell + "' on line " +
                                  std::to_string(lineno));
        }
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    if (vals.size() != expect) {
        throw ValidationError("trajectory csv: expected " + std::to_string(expect) +
                              " columns on line " + std::to_string(lineno) + ", got " +
                              std::to_string(vals.size()));
    }
    return vals;
}

} // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    traj.validate();
    if (traj.kind == TrajectoryKind::group) {
        os << detail::kGroupHeader << "\n";
        for (size_t i = 0; i < traj.times.size(); ++i) {
            os << detail::fmt17(traj.times[i]);
            const Mat3& m = traj.rotations[i].matrix();
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) os << ',' << detail::fmt17(m(r, c));
            os << "\n";
        }
    } else {
        os << detail::kSphereHeader << "\n";
        for (size_t i = 0; i < traj.times.size(); ++i) {
            const Vec3 x = traj.points[i].coords();
            os << detail::fmt17(traj.times[i]) << ',' << detail::fmt17(x.x()) << ','
               << detail::fmt17(x.y()) << ',' << detail::fmt17(x.z()) << "\n";
        }
    }
}

inline Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("trajectory csv: empty stream");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    Trajectory traj;
    size_t cols = 0;
    if (line == detail::kGroupHeader) {
        traj.kind = TrajectoryKind::group;
        cols = 10;
    } else if (line == detail::kSphereHeader) {
        traj.kind = TrajectoryKind::sphere;
        cols = 4;
    } else {
        throw ValidationError("trajectory csv: unrecognized header '" + line + "'");
    }

    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<double> v = detail::parse_csv_row(line, cols, lineno);
        traj.times.push_back(v[0]);
        if (traj.kind == TrajectoryKind::group) {
            Mat3 m;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<size_t>(1 + 3 * r + c)];
            traj.rotations.push_back(Rotation(m, tol::orth_integrated));
        } else {
            traj.points.push_back(UnitVector(Vec3(v[1], v[2], v[3]), tol::orth_integrated));
        }
    }
    traj.validate();
    return traj;
}

} // namespace spherefsb
