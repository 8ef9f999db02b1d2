#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvtrack/config.hpp"
#include "mvtrack/io.hpp"
#include "mvtrack/metrics.hpp"
#include "mvtrack/simulator.hpp"
#include "mvtrack/solver.hpp"

namespace mvtrack {

/// Sequence directory written by cli_simulate:
///   sequence.json           frame/view counts and the mesh file name
///   rig.json                calibration (world frame = C-0 object frame)
///   mesh.obj                template mesh
///   gt.poses                world_from_template per frame
///   gt_view_<i>.poses       camera_from_template per frame for view i
///   rig_motion.poses        world_from_rig per frame (moving-camera runs only)
///   view_<i>/frame_<k>.ppm  images
struct SequenceDirectory {
  std::filesystem::path dir;
  Rig rig;
  TriangleMesh mesh;
  std::vector<PoseRecord> ground_truth;
  std::vector<RigidTransform> rig_motion;  // empty for a static rig
  int frames = 0;

  /// Rig at `frame` restricted to `views`, extrinsics in the world frame.
  Rig rig_at(int frame, const std::vector<int>& views) const;
};

SequenceDirectory open_sequence(const std::filesystem::path& dir);

/// Writes the sequence for cfg.meshes[0] with cfg.rig / cfg.motion / cfg.noise.
void cli_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct TrackOptions {
  std::filesystem::path sequence;
  std::filesystem::path out;
  /// Views to track; empty falls back to the config, then to every view.
  std::vector<int> views;
  bool monocular = false;
  /// Apply the ground-truth reset rule when ground truth is available.
  bool reset = true;
  /// Trajectory whose first record replaces ground-truth frame 0 as the start pose.
  std::optional<std::filesystem::path> initial_pose;
  /// Continue from a state written by `dump_state`.
  std::optional<std::filesystem::path> resume_state;
  /// Write the state after frame `dump_after` to `dump_state`.
  std::optional<std::filesystem::path> dump_state;
  int dump_after = -1;
};

/// Files written to options.out:
///   pred.poses             predicted world_from_template
///   pred_view_<i>.poses    predicted camera_from_template per tracked view
///   track_report.json      energy traces, sample counts, resets
TrackingResult cli_track(const ExperimentConfig& cfg, const TrackOptions& options);

/// Scores `pred` against `gt` and writes report.csv, report.json and
/// add_curve.svg to `out`. Per-axis errors use C-0 of `rig` when given.
SequenceReport cli_evaluate(const std::filesystem::path& pred, const std::filesystem::path& gt,
                            const std::string& mesh_ref, const MetricThresholds& thresholds,
                            const std::filesystem::path& out, const std::optional<std::filesystem::path>& rig = {});

/// Runs the configured sweep and writes <kind>_sweep.csv and <kind>_sweep.txt.
ErrorTable cli_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out);

SweepConfig sweep_config(const ExperimentConfig& cfg);

/// Tracker state checkpoint (JSON, exact doubles).
void save_state(const TrackerState& state, int next_frame, const std::filesystem::path& path);
TrackerState load_state(const std::filesystem::path& path, int& next_frame);

}  // namespace mvtrack
