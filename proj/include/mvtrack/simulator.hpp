#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mvtrack/camera.hpp"
#include "mvtrack/image.hpp"
#include "mvtrack/mesh.hpp"
#include "mvtrack/solver.hpp"

namespace mvtrack {

enum class RigPattern { kPlane, kCone };

struct RigSpec {
  RigPattern pattern = RigPattern::kPlane;
  /// Included angles (deg, relative to C-0) of the cameras after C-0.
  std::vector<double> included_angles_deg;
  double standoff_mm = 700.0;
  /// Cone pattern: tilt of the cone axis away from the plane's normal.
  double elevation_deg = 30.0;
  CameraIntrinsics intrinsics;
};

/// C-0 sits at `standoff` on the -Z axis looking at the origin (+Y down in
/// the image). Each further camera is C-0 rotated about the origin so its
/// optical axis makes the included angle with C-0's: about the Y axis for
/// the plane pattern, about an axis tilted by `elevation_deg` toward -Z for
/// the cone pattern. Throws InvalidArgument for angles outside (0, 180) or
/// beyond the cone's reach.
Rig make_rig(const RigSpec& spec);

enum class MotionMode { kFreeMove, kRotateOnly, kCamerasMove };

struct MotionSpec {
  MotionMode mode = MotionMode::kFreeMove;
  int frames = 120;
  double translation_mm_per_frame = 2.0;
  double rotation_deg_per_frame = 1.5;
  int waypoint_spacing = 12;
  std::uint64_t seed = 1;
};

struct NoiseSpec {
  double sigma = 0.0;  // additive Gaussian color noise, 8-bit units
  int supersample = 4;
  std::array<std::uint8_t, 3> foreground = {205, 70, 45};
  std::array<std::uint8_t, 3> background = {40, 95, 190};
};

/// Ground truth plus everything needed to render any frame on demand.
/// Images are deterministic functions of (seed, frame, view).
class SyntheticSequence {
 public:
  SyntheticSequence(std::shared_ptr<const TriangleMesh> mesh, Rig rig, MotionSpec motion, NoiseSpec noise,
                    std::vector<RigidTransform> gt_world, std::vector<RigidTransform> rig_motion);

  int frames() const { return static_cast<int>(gt_world_.size()); }
  const TriangleMesh& mesh() const { return *mesh_; }
  const Rig& base_rig() const { return rig_; }
  const MotionSpec& motion() const { return motion_; }
  const NoiseSpec& noise() const { return noise_; }

  /// world_from_template per frame.
  const std::vector<RigidTransform>& ground_truth() const { return gt_world_; }
  /// world_from_rig per frame (identity unless the cameras move).
  const std::vector<RigidTransform>& rig_motion() const { return rig_motion_; }

  /// Rig with world-frame extrinsics at `frame`, restricted to `views` when
  /// given (indices into the base rig).
  Rig rig_at(int frame, const std::vector<int>& views = {}) const;
  /// camera_from_template of ground truth at `frame` for base-rig view `view`.
  RigidTransform gt_in_camera(int frame, int view) const;
  RgbImage render(int frame, int view) const;
  FrameInput frame_input(int frame, const std::vector<int>& views = {}) const;

 private:
  std::shared_ptr<const TriangleMesh> mesh_;
  Rig rig_;
  MotionSpec motion_;
  NoiseSpec noise_;
  std::vector<RigidTransform> gt_world_;
  std::vector<RigidTransform> rig_motion_;
};

/// Seeded smooth trajectory: Catmull-Rom spline through random waypoints,
/// rescaled so the largest per-frame step equals the amplitude. The object
/// starts centered at the origin with a seed-dependent orientation.
SyntheticSequence generate_sequence(std::shared_ptr<const TriangleMesh> mesh, const Rig& rig,
                                    const MotionSpec& motion, const NoiseSpec& noise);

/// Table 3 / Table 5 shaped result: one column per configuration, rows
/// r (deg), tx, ty, tz (mm, mean absolute, C-0 frame) and lost count.
struct ErrorTable {
  std::string title;
  std::string header_label = "Included Angle";
  std::vector<std::string> columns;        // e.g. "Mono.", "10°"
  std::vector<std::string> camera_labels;  // e.g. "C-0", "C-0/C-1"
  struct Cell {
    double r = 0.0, tx = 0.0, ty = 0.0, tz = 0.0;
    int lost = 0;
    int frames = 0;
    std::string error;  // non-empty when the cell failed
  };
  std::vector<Cell> cells;
};

struct SweepConfig {
  RigSpec rig;               // pattern, standoff, elevation and intrinsics template
  MotionSpec motion;
  NoiseSpec noise;
  TrackerConfig tracker;
  ResetRule reset;
  bool include_mono = true;
};

/// Mean errors of one tracked sequence over the given base-rig views,
/// accumulated into `cell` (sums; divide by frames afterwards).
void track_and_score(const SyntheticSequence& seq, const std::vector<int>& views, const TrackerConfig& cfg,
                     const ResetRule& reset, ErrorTable::Cell& cell, TrackingResult* result = nullptr);

ErrorTable run_angle_sweep(const std::vector<std::shared_ptr<const TriangleMesh>>& meshes,
                           const std::vector<double>& angles_deg, const SweepConfig& cfg);

ErrorTable run_resolution_sweep(std::shared_ptr<const TriangleMesh> mesh, const std::vector<int>& widths,
                                const SweepConfig& cfg);

std::string to_string(RigPattern p);
std::string to_string(MotionMode m);
RigPattern rig_pattern_from_string(const std::string& s);
MotionMode motion_mode_from_string(const std::string& s);

}  // namespace mvtrack
