// Long-run phase-portrait survey: integrate a quasi-uniform sample of
// initial conditions far past the perturbation's mixing time and classify
// each endpoint against the computed equilibria and periodic orbits.
//
// On a sphere a forward-bounded trajectory can only approach an equilibrium
// or a periodic orbit, so with all branches in hand the survey certifies the
// phase portrait: any seed that matches nothing is reported distinctly.  A
// perturbation that leaves the unperturbed foliation intact at first order
// produces no attractors at all; such seeds travel a full circuit and return
// to their starting state, and the survey labels them "no attractor
// (degenerate)" rather than unclassified.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "spherefsb/equilibrium.hpp"
#include "spherefsb/errors.hpp"
#include "spherefsb/field.hpp"
#include "spherefsb/flows.hpp"
#include "spherefsb/parallel.hpp"
#include "spherefsb/periodic.hpp"
#include "spherefsb/scenario.hpp"

namespace spherefsb {

// Fibonacci lattice on the unit sphere: n quasi-uniform points, deterministic
// in n, independent of any frame choice.
inline std::vector<UnitVector> fibonacci_seeds(int n) {
    if (n < 1) throw ValidationError("fibonacci_seeds: need at least one seed");
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    std::vector<UnitVector> seeds;
    seeds.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double theta = golden_angle * i;
        seeds.push_back(
            UnitVector::normalized(Vec3(r * std::cos(theta), r * std::sin(theta), z)));
    }
    return seeds;
}

struct SeedFate {
    UnitVector seed;     // initial condition
    UnitVector endpoint; // state at the survey horizon
    std::string label;   // matched object, "no attractor (degenerate)", or "unclassified"
    double distance = 0.0; // distance to the matched object (return gap for degenerate)
};

struct SurveyResult {
    double horizon = 0.0;
    std::vector<SeedFate> fates;

    std::map<std::string, int> tally() const {
        std::map<std::string, int> counts;
        for (const SeedFate& f : fates) ++counts[f.label];
        return counts;
    }
    int unclassified_count() const {
        int n = 0;
        for (const SeedFate& f : fates) n += (f.label == "unclassified") ? 1 : 0;
        return n;
    }
};

namespace detail {

inline double min_distance_to_trace(const std::vector<UnitVector>& trace, const Vec3& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const UnitVector& p : trace) best = std::min(best, (p.coords() - x).norm());
    return best;
}

struct RecurrenceProbe {
    double travel = 0.0; // how far the trajectory gets from the probe state
    double gap = 0.0;    // refined closest return after at least half a turn
};

// Follow the trajectory from x for 1.5 unperturbed periods and measure the
// closest return to x after the first half turn, sharpening the coarse
// sample with a golden-section search (the gap is V-shaped in t at an exact
// return, so interval shrinkage is the reliable refinement).
inline RecurrenceProbe recurrence_probe(const Scenario& scn, const UnitVector& x) {
    const double period = scn.unperturbed_period();
    const double window = 1.5 * period;
    const int n = 512;
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) times.push_back(window * i / n);
    const Trajectory traj = flow_sphere(scn, x, times);

    RecurrenceProbe probe;
    int coarse_best = -1;
    double coarse_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        const double gap = (traj.points[i].coords() - x.coords()).norm();
        probe.travel = std::max(probe.travel, gap);
        if (traj.times[i] >= 0.5 * period && gap < coarse_gap) {
            coarse_gap = gap;
            coarse_best = static_cast<int>(i);
        }
    }

    auto gap_at = [&](double t) {
        const Trajectory leg = flow_sphere(scn, x, std::vector<double>{0.0, t});
        return (leg.points.back().coords() - x.coords()).norm();
    };
    double lo = traj.times[static_cast<std::size_t>(std::max(coarse_best - 1, 1))];
    double hi = traj.times[static_cast<std::size_t>(
        std::min<int>(coarse_best + 1, static_cast<int>(traj.times.size()) - 1))];
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - ratio * (hi - lo);
    double d = lo + ratio * (hi - lo);
    double fc = gap_at(c);
    double fd = gap_at(d);
    for (int it = 0; it < 45; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = gap_at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = gap_at(d);
        }
    }
    probe.gap = std::min({coarse_gap, fc, fd});
    return probe;
}

} // namespace detail

// Integrates n_seeds Fibonacci-lattice seeds to the survey horizon
// min(50/(eps*|X0|), 1e5) and labels each endpoint: "equilibrium_<pole>"
// within 1e-4 of an equilibrium branch, "periodic_orbit_<k>" within 1e-3 of
// the k-th orbit's trace, "no attractor (degenerate)" for a trajectory that
// travels yet returns to its endpoint within 1e-6, and "unclassified"
// otherwise.  Seeds are processed in parallel (SPHERE_FSB_THREADS, 0 = one
// per core); results are stored by seed index, so the output is identical
// for every thread count.
inline SurveyResult limit_set_survey(const Scenario& scn, int n_seeds,
                                     const std::vector<EquilibriumBranch>& equilibria,
                                     const std::vector<PeriodicOrbitBranch>& orbits) {
    if (!(scn.epsilon() > 0.0)) {
        throw ValidationError("limit_set_survey: requires epsilon > 0 (the unperturbed flow "
                              "has no isolated limit sets)");
    }
    constexpr double kEquilibriumTol = 1e-4;
    constexpr double kOrbitTol = 1e-3;
    constexpr double kReturnGapTol = 1e-6;
    constexpr double kTravelFloor = 1e-3;
    constexpr int kTraceSamples = 8192;

    SurveyResult result;
    result.horizon = std::min(50.0 / (scn.epsilon() * scn.omega0()), 1e5);

    std::vector<std::vector<UnitVector>> traces;
    traces.reserve(orbits.size());
    for (const PeriodicOrbitBranch& orbit : orbits) {
        traces.push_back(orbit_trace(scn, orbit.fixed_phi, orbit.theta0, kTraceSamples));
    }

    const std::vector<UnitVector> seeds = fibonacci_seeds(n_seeds);
    result.fates.resize(seeds.size(),
                        SeedFate{seeds.front(), seeds.front(), "unclassified", 0.0});

    parallel_for(n_seeds, [&](int i) {
        const UnitVector& seed = seeds[static_cast<std::size_t>(i)];
        const Trajectory traj =
            flow_sphere(scn, seed, std::vector<double>{0.0, result.horizon});
        const UnitVector endpoint = traj.points.back();

        SeedFate fate{seed, endpoint, "unclassified", 0.0};
        double best = std::numeric_limits<double>::infinity();
        for (const EquilibriumBranch& eq : equilibria) {
            const double dist = (endpoint.coords() - eq.location.coords()).norm();
            if (dist < kEquilibriumTol && dist < best) {
                best = dist;
                fate.label = std::string("equilibrium_") + to_string(eq.pole);
                fate.distance = dist;
            }
        }
        if (fate.label == "unclassified") {
            for (std::size_t k = 0; k < traces.size(); ++k) {
                const double dist = detail::min_distance_to_trace(traces[k], endpoint.coords());
                if (dist < kOrbitTol && dist < best) {
                    best = dist;
                    fate.label = "periodic_orbit_" + std::to_string(k);
                    fate.distance = dist;
                }
            }
        }
        if (fate.label == "unclassified") {
            const detail::RecurrenceProbe probe = detail::recurrence_probe(scn, endpoint);
            if (probe.travel > kTravelFloor && probe.gap < kReturnGapTol) {
                fate.label = "no attractor (degenerate)";
                fate.distance = probe.gap;
            }
        }
        result.fates[static_cast<std::size_t>(i)] = fate;
    });
    return result;
}

} // namespace spherefsb
