// Report artifact bookkeeping: trajectory files on disk and the summary
// statistics the report stores about them.
//
// Every trajectory referenced by report.json lives in its own CSV next to
// the report, written with %.17g (lossless round-trip).  The report keeps
// the row count and per-column means; because the CSV encoding is exact and
// the mean is accumulated in fixed row order, re-reading a file and
// recomputing its means reproduces the stored values bit for bit, which the
// tests use as the file/report consistency check.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spherefsb/errors.hpp"
#include "spherefsb/flows.hpp"

namespace spherefsb {

inline constexpr const char* kReportFileName = "report.json";
inline constexpr const char* kTimingsFileName = "timings.txt";

struct TrajectoryRef {
    std::string file;                 // name relative to the report directory
    long long rows = 0;
    std::vector<double> column_means; // per CSV column, left to right
};

// Per-column means in CSV column order: t first, then the 9 row-major
// rotation entries (group) or the 3 sphere coordinates.
inline std::vector<double> trajectory_column_means(const Trajectory& traj) {
    traj.validate();
    const size_t n = traj.size();
    const size_t cols = traj.kind == TrajectoryKind::group ? 10 : 4;
    std::vector<double> means(cols, 0.0);
    for (size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (c == 0) {
                sum += traj.times[i];
            } else if (traj.kind == TrajectoryKind::group) {
                const Mat3& m = traj.rotations[i].matrix();
                sum += m(static_cast<int>((c - 1) / 3), static_cast<int>((c - 1) % 3));
            } else {
                sum += traj.points[i].coords()[static_cast<int>(c - 1)];
            }
        }
        means[c] = sum / static_cast<double>(n);
    }
    return means;
}

inline TrajectoryRef write_trajectory_file(const std::string& dir, const std::string& name,
                                           const Trajectory& traj) {
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write trajectory file '" + path.string() + "'");
    write_trajectory_csv(out, traj);
    out.flush();
    if (!out) throw ValidationError("write failed for trajectory file '" + path.string() + "'");
    TrajectoryRef ref;
    ref.file = name;
    ref.rows = static_cast<long long>(traj.size());
    ref.column_means = trajectory_column_means(traj);
    return ref;
}

} // namespace spherefsb
