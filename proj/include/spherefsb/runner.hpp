// Scenario orchestration: run the full pipeline for every configured epsilon
// and leave a machine-readable artifact set on disk.
//
//   report.json   equilibria (both poles), drift-integral summary, periodic
//                 branches, reconstructions, and the seed-survey table per
//                 epsilon, with every stability tag accompanied by the
//                 eigenvalues or multiplier that back it.
//   *.csv         one trajectory file per reconstructed or continued object,
//                 referenced from the report with row counts and per-column
//                 means (the cross-consistency handle).
//   timings.txt   wall-clock times.  Kept out of report.json on purpose:
//                 identical configs must produce byte-identical reports.
//
// Failures are data.  Every branch computation runs inside a capture that
// converts a library Error into a {kind, message} record in the report; one
// diverged Newton search must not cost the caller the rest of the run.  The
// process exit code summarizes: 0 all branches ok, 2 some recorded errors,
// 1 the config itself was unusable (nothing ran).
#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spherefsb/config.hpp"
#include "spherefsb/equilibrium.hpp"
#include "spherefsb/flows.hpp"
#include "spherefsb/jsonwriter.hpp"
#include "spherefsb/melnikov.hpp"
#include "spherefsb/parallel.hpp"
#include "spherefsb/periodic.hpp"
#include "spherefsb/reconstruct.hpp"
#include "spherefsb/report.hpp"
#include "spherefsb/survey.hpp"
#include "spherefsb/version.hpp"

namespace spherefsb {

struct RunOutcome {
    int exit_code = 0;
    std::string report_path;
    int recorded_errors = 0;
};

namespace detail {

template <class T>
struct Captured {
    std::optional<T> value;
    std::string error_kind;
    std::string error_message;
    bool ok() const { return value.has_value(); }
    bool skipped() const { return error_kind == "skipped"; }
};

template <class Fn>
auto capture(Fn&& fn) -> Captured<decltype(fn())> {
    using T = decltype(fn());
    try {
        return Captured<T>{std::forward<Fn>(fn)(), "", ""};
    } catch (const Error& e) {
        return Captured<T>{std::nullopt, e.kind(), e.what()};
    }
}

template <class T>
Captured<T> skip(const std::string& reason) {
    return Captured<T>{std::nullopt, "skipped", reason};
}

inline void emit_vec3(JsonWriter& w, const std::string& name, const Vec3& v) {
    w.key(name);
    w.begin_array();
    w.value(v.x());
    w.value(v.y());
    w.value(v.z());
    w.end_array();
}

inline void emit_failure(JsonWriter& w, const std::string& kind, const std::string& message) {
    if (kind == "skipped") {
        w.member("status", "skipped");
        w.member("reason", message);
        return;
    }
    w.member("status", "error");
    w.key("error");
    w.begin_object();
    w.member("kind", kind);
    w.member("message", message);
    w.end_object();
}

inline void emit_trajectory_ref(JsonWriter& w, const TrajectoryRef& ref) {
    w.key("trajectory");
    w.begin_object();
    w.member("file", ref.file);
    w.member("rows", ref.rows);
    w.key("column_means");
    w.begin_array();
    for (double m : ref.column_means) w.value(m);
    w.end_array();
    w.end_object();
}

// A reconstruction bundled with its on-disk trajectory.
struct WaveArtifact {
    WaveReconstruction wave;
    TrajectoryRef ref;
};

// A continued periodic orbit bundled with its on-disk trajectory.
struct OrbitArtifact {
    PeriodicOrbitBranch branch;
    TrajectoryRef ref;
};

inline void emit_equilibrium(JsonWriter& w, Pole pole,
                             const Captured<EquilibriumBranch>& eq,
                             const Captured<WaveArtifact>& wave) {
    w.begin_object();
    w.member("pole", to_string(pole));
    if (!eq.ok()) {
        emit_failure(w, eq.error_kind, eq.error_message);
        w.end_object();
        return;
    }
    const EquilibriumBranch& b = *eq.value;
    w.member("status", "ok");
    w.key("chart_location");
    w.begin_array();
    w.value(b.chart_location.x());
    w.value(b.chart_location.y());
    w.end_array();
    w.key("predicted_first_order");
    w.begin_array();
    w.value(b.predicted_first_order.x());
    w.value(b.predicted_first_order.y());
    w.end_array();
    emit_vec3(w, "location", b.location.coords());
    w.member("residual", b.residual);
    w.key("eigenvalues");
    w.begin_array();
    for (const auto& ev : b.eigenvalues) {
        w.begin_object();
        w.member("re", ev.real());
        w.member("im", ev.imag());
        w.end_object();
    }
    w.end_array();
    w.member("trace_first_order", b.trace_first_order);
    w.member("stability", to_string(b.stability));
    w.key("reconstruction");
    w.begin_object();
    if (wave.ok()) {
        w.member("status", "ok");
        w.member("kind", to_string(wave.value->wave.kind));
        w.member("frequency", wave.value->wave.frequency);
        w.member("off_axis_residual", wave.value->wave.residual_off_axis);
        emit_trajectory_ref(w, wave.value->ref);
    } else {
        emit_failure(w, wave.error_kind, wave.error_message);
    }
    w.end_object();
    w.end_object();
}

inline void emit_melnikov(JsonWriter& w, const Captured<MelnikovProfile>& profile, int grid_n) {
    w.key("melnikov");
    w.begin_object();
    if (!profile.ok()) {
        emit_failure(w, profile.error_kind, profile.error_message);
        w.end_object();
        return;
    }
    const MelnikovProfile& p = *profile.value;
    w.member("status", "ok");
    w.member("first_order_degenerate", p.degenerate);
    w.member("scale", p.scale);
    w.member("grid_points", grid_n);
    w.key("roots");
    w.begin_array();
    for (const MelnikovRoot& r : p.roots) {
        w.begin_object();
        w.member("phi", r.phi0);
        w.member("derivative", r.derivative);
        w.member("simple", r.simple);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

inline void emit_orbit(JsonWriter& w, double seed_phi, const Captured<OrbitArtifact>& orbit,
                       const Captured<WaveArtifact>& wave) {
    w.begin_object();
    w.member("seed_phi", seed_phi);
    if (!orbit.ok()) {
        emit_failure(w, orbit.error_kind, orbit.error_message);
        w.end_object();
        return;
    }
    const PeriodicOrbitBranch& b = orbit.value->branch;
    w.member("status", "ok");
    w.member("fixed_phi", b.fixed_phi);
    w.member("theta0", b.theta0);
    w.member("period", b.period_physical);
    w.member("multiplier", b.multiplier);
    w.member("stability", to_string(b.stability));
    emit_trajectory_ref(w, orbit.value->ref);
    w.key("reconstruction");
    w.begin_object();
    if (wave.ok()) {
        w.member("status", "ok");
        w.member("kind", to_string(wave.value->wave.kind));
        w.member("drift_frequency", wave.value->wave.frequency);
        w.member("relative_period", wave.value->wave.relative_period);
        w.member("closure", wave.value->wave.closure);
        emit_trajectory_ref(w, wave.value->ref);
    } else {
        emit_failure(w, wave.error_kind, wave.error_message);
    }
    w.end_object();
    w.end_object();
}

inline void emit_survey(JsonWriter& w, int seeds, const Captured<SurveyResult>& survey) {
    w.key("survey");
    w.begin_object();
    if (!survey.ok()) {
        emit_failure(w, survey.error_kind, survey.error_message);
        w.end_object();
        return;
    }
    const SurveyResult& s = *survey.value;
    w.member("status", "ok");
    w.member("seeds", seeds);
    w.member("horizon", s.horizon);
    w.key("tally");
    w.begin_array();
    for (const auto& [label, count] : s.tally()) { // std::map: sorted, deterministic
        w.begin_object();
        w.member("label", label);
        w.member("count", count);
        w.end_object();
    }
    w.end_array();
    w.member("unclassified", s.unclassified_count());
    w.end_object();
}

inline void emit_scenario_echo(JsonWriter& w, const ScenarioConfig& cfg) {
    w.key("scenario");
    w.begin_object();
    emit_vec3(w, "x0_axis", cfg.x0_axis);
    emit_vec3(w, "q_axis", cfg.q_axis);
    w.key("field");
    w.begin_object();
    w.member("origin", cfg.field_origin);
    w.member("epsilon_cap", cfg.field.epsilon_cap());
    w.key("terms");
    w.begin_array();
    for (FieldComponent c : {FieldComponent::G1, FieldComponent::G2, FieldComponent::G3}) {
        for (const Monomial& t : cfg.field.terms(c)) {
            w.begin_object();
            w.member("component", to_string(c));
            w.member("i", t.i);
            w.member("j", t.j);
            w.member("k", t.k);
            w.member("coeff", t.coeff);
            w.end_object();
        }
    }
    w.end_array();
    w.end_object();
    w.key("epsilons");
    w.begin_array();
    for (double e : cfg.epsilons) w.value(e);
    w.end_array();
    w.member("seeds", cfg.seeds);
    w.key("tolerances");
    w.begin_object();
    w.member("integ_rel", cfg.tolerances.integ_rel);
    w.member("integ_abs", cfg.tolerances.integ_abs);
    w.member("newton", cfg.tolerances.newton);
    w.member("quadrature", cfg.tolerances.quadrature);
    w.member("max_step", cfg.tolerances.max_step);
    w.member("phi_min", cfg.tolerances.phi_min);
    w.member("chart_domain", cfg.tolerances.chart_domain);
    w.end_object();
    w.member("output_directory", cfg.output_dir);
    w.end_object();
}

} // namespace detail

// The drift integral on the interior grid phi_k = k pi / (N + 1), k = 1..N,
// as a two-column CSV for external plotting.
inline std::string melnikov_grid_csv(const ScenarioConfig& cfg, int grid_n) {
    if (grid_n < 1) {
        throw ConfigError("melnikov grid must have at least 1 point, got " +
                          std::to_string(grid_n));
    }
    std::string out = "phi,I\n";
    for (int k = 1; k <= grid_n; ++k) {
        const double phi = kPi * k / (grid_n + 1);
        out += detail::fmt17(phi);
        out += ',';
        out += detail::fmt17(melnikov_I(cfg.field, phi, cfg.tolerances.quadrature));
        out += '\n';
    }
    return out;
}

// Run the full pipeline and write report.json, per-object trajectory CSVs,
// and the timing sidecar into cfg.output_dir.
inline RunOutcome run_scenario(const ScenarioConfig& cfg) {
    using clock = std::chrono::steady_clock;

    // A malformed SPHERE_FSB_THREADS is a configuration problem; surface it
    // before any work instead of from inside the first survey.
    (void)thread_budget();

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) {
        throw ConfigError("output directory '" + cfg.output_dir +
                          "' cannot be created: " + ec.message());
    }

    const auto t_total = clock::now();
    std::vector<double> eps_seconds;
    int errors = 0;
    auto count = [&errors](const auto& captured) {
        if (!captured.ok() && !captured.skipped()) ++errors;
    };

    // The drift integral depends on the field alone, not on epsilon: compute
    // the profile once and echo it into every per-epsilon section.
    constexpr int kProfileGrid = 720;
    const auto profile = detail::capture([&] {
        return melnikov_profile(cfg.field, cfg.tolerances.phi_min, cfg.tolerances.quadrature,
                                kProfileGrid);
    });
    count(profile);

    JsonWriter w;
    w.begin_object();
    w.key("tool");
    w.begin_object();
    w.member("name", kToolName);
    w.member("version", kToolVersion);
    w.end_object();
    detail::emit_scenario_echo(w, cfg);

    w.key("results");
    w.begin_array();
    for (size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
        const auto t_eps = clock::now();
        const double eps = cfg.epsilons[ei];
        const Scenario scn = cfg.scenario_at(eps);
        const std::string prefix = "eps" + std::to_string(ei) + "_";

        // --- equilibria at both poles, each lifted to a rotating wave ---
        std::vector<EquilibriumBranch> good_equilibria;
        std::vector<detail::Captured<EquilibriumBranch>> eqs;
        std::vector<detail::Captured<detail::WaveArtifact>> eq_waves;
        for (Pole pole : {Pole::north, Pole::south}) {
            auto eq = detail::capture([&] { return find_equilibrium(scn, pole); });
            count(eq);
            auto wave = eq.ok()
                            ? detail::capture([&] {
                                  WaveReconstruction wv = lift_equilibrium(scn, *eq.value);
                                  TrajectoryRef ref = write_trajectory_file(
                                      cfg.output_dir,
                                      prefix + "wave_" + to_string(pole) + ".csv",
                                      wave_trajectory(scn, wv));
                                  return detail::WaveArtifact{std::move(wv), std::move(ref)};
                              })
                            : detail::skip<detail::WaveArtifact>(
                                  "equilibrium continuation failed");
            count(wave);
            if (eq.ok()) good_equilibria.push_back(*eq.value);
            eqs.push_back(std::move(eq));
            eq_waves.push_back(std::move(wave));
        }

        // --- periodic orbits from the drift-integral zeros ---
        std::vector<PeriodicOrbitBranch> good_orbits;
        std::vector<double> seed_phis;
        std::vector<detail::Captured<detail::OrbitArtifact>> orbits;
        std::vector<detail::Captured<detail::WaveArtifact>> orbit_waves;
        if (profile.ok()) {
            for (size_t k = 0; k < profile.value->roots.size(); ++k) {
                const MelnikovRoot& root = profile.value->roots[k];
                const std::string stem = prefix + "orbit" + std::to_string(k);
                auto orbit = detail::capture([&] {
                    PeriodicOrbitBranch b = continue_periodic_orbit(scn, root);
                    // Re-sweep one period as a plain initial-value problem so
                    // the stored samples carry physical time stamps.
                    std::vector<double> times;
                    constexpr int kOrbitSamples = 257;
                    times.reserve(kOrbitSamples);
                    for (int s = 0; s < kOrbitSamples; ++s) {
                        times.push_back(b.period_physical * s / (kOrbitSamples - 1));
                    }
                    const Trajectory traj = flow_sphere(scn, b.orbit_samples.front(), times);
                    TrajectoryRef ref =
                        write_trajectory_file(cfg.output_dir, stem + ".csv", traj);
                    return detail::OrbitArtifact{std::move(b), std::move(ref)};
                });
                count(orbit);
                auto wave = orbit.ok()
                                ? detail::capture([&] {
                                      WaveReconstruction wv =
                                          lift_periodic(scn, orbit.value->branch);
                                      TrajectoryRef ref = write_trajectory_file(
                                          cfg.output_dir, stem + "_wave.csv",
                                          wave_trajectory(scn, wv));
                                      return detail::WaveArtifact{std::move(wv),
                                                                  std::move(ref)};
                                  })
                                : detail::skip<detail::WaveArtifact>(
                                      "periodic continuation failed");
                count(wave);
                if (orbit.ok()) good_orbits.push_back(orbit.value->branch);
                seed_phis.push_back(root.phi0);
                orbits.push_back(std::move(orbit));
                orbit_waves.push_back(std::move(wave));
            }
        }

        // --- seed survey against the computed object set ---
        const auto survey = detail::capture(
            [&] { return limit_set_survey(scn, cfg.seeds, good_equilibria, good_orbits); });
        count(survey);

        // --- emit this epsilon's section ---
        w.begin_object();
        w.member("epsilon", eps);
        w.key("equilibria");
        w.begin_array();
        detail::emit_equilibrium(w, Pole::north, eqs[0], eq_waves[0]);
        detail::emit_equilibrium(w, Pole::south, eqs[1], eq_waves[1]);
        w.end_array();
        detail::emit_melnikov(w, profile, kProfileGrid);
        w.key("periodic_orbits");
        w.begin_array();
        for (size_t k = 0; k < orbits.size(); ++k) {
            detail::emit_orbit(w, seed_phis[k], orbits[k], orbit_waves[k]);
        }
        w.end_array();
        detail::emit_survey(w, cfg.seeds, survey);
        w.end_object();

        eps_seconds.push_back(
            std::chrono::duration<double>(clock::now() - t_eps).count());
    }
    w.end_array();

    w.key("summary");
    w.begin_object();
    w.member("status", errors == 0 ? "ok" : "partial");
    w.member("recorded_errors", errors);
    w.end_object();
    w.end_object();

    const std::filesystem::path report_path =
        std::filesystem::path(cfg.output_dir) / kReportFileName;
    {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) {
            throw ConfigError("cannot write report to '" + report_path.string() + "'");
        }
        out << w.str();
        out.flush();
        if (!out) throw ConfigError("write failed for '" + report_path.string() + "'");
    }

    // Wall-clock sidecar; deliberately outside report.json so two runs of the
    // same config compare byte-identical.
    {
        std::ofstream out(std::filesystem::path(cfg.output_dir) / kTimingsFileName);
        out << "# wall-clock timings; kept out of report.json so reports stay"
            << " byte-identical\n";
        char buf[64];
        for (size_t ei = 0; ei < eps_seconds.size(); ++ei) {
            std::snprintf(buf, sizeof(buf), "epsilon %.17g: %.3f s", cfg.epsilons[ei],
                          eps_seconds[ei]);
            out << buf << "\n";
        }
        std::snprintf(buf, sizeof(buf), "total: %.3f s",
                      std::chrono::duration<double>(clock::now() - t_total).count());
        out << buf << "\n";
    }

    RunOutcome outcome;
    outcome.exit_code = errors == 0 ? 0 : 2;
    outcome.report_path = report_path.string();
    outcome.recorded_errors = errors;
    return outcome;
}

} // namespace spherefsb
