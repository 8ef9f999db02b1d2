#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvtrack/camera.hpp"
#include "mvtrack/energy.hpp"
#include "mvtrack/geometry.hpp"
#include "mvtrack/image.hpp"
#include "mvtrack/mesh.hpp"

namespace mvtrack {

struct SolverConfig {
  int rounds = 1;
  int iters_per_round = 7;
  double lambda_max = 1e6;
  /// Levenberg damping restarts here after the first rejected step; a
  /// damping that decays below it snaps back to 0.
  double lambda_min = 1e-4;
  /// Rejected trial steps allowed inside one iteration.
  int max_rejections = 6;
  /// Rounds of consecutive energy increase that declare the track lost.
  int divergence_rounds = 3;
  /// Iterations stop once the step norm (mm and rad mixed) drops below this.
  double step_tolerance = 1e-7;

  void validate() const;
};

struct TrackerConfig {
  EnergyConfig energy;
  SolverConfig solver;
};

/// Gauss-Newton accumulators: H = sum J^T J, g = sum J^T r.
struct NormalEquations {
  Mat6 H = Mat6::Zero();
  Vec6 g = Vec6::Zero();
  std::size_t used = 0;
  std::size_t skipped_border = 0;
  std::size_t skipped_behind = 0;

  NormalEquations& operator+=(const NormalEquations& o);
};

/// Pose state shared by every view of the rig.
///
/// The object-centered frame O_o is re-anchored at the start of each frame:
/// its origin is the mesh bounding-box center at the current pose and its axes
/// follow the template axes. The latent `object_from_template` is the single
/// source of truth; `camera_poses` are derived from it after every update.
struct TrackerState {
  RigidTransform world_from_object;            // placement of O_o in the rig frame
  RigidTransform object_from_template;         // latent pose in O_o
  std::vector<CameraView> views;               // object_from_camera relative to O_o
  std::vector<RigidTransform> camera_poses;    // camera_from_template per view
  std::vector<ColorModel> color_models;        // one per view, empty until first frame
  int rounds = 1;
  int iters_per_round = 7;
  bool lost = false;

  RigidTransform world_pose() const { return compose(world_from_object, object_from_template); }
};

/// Builds a state for `rig` (object_from_camera given in the rig/world frame)
/// with the object at `world_from_template`. `model_center` is the template
/// point used as origin of O_o.
TrackerState make_tracker_state(const Rig& rig, const RigidTransform& world_from_template, const Vec3& model_center,
                                const SolverConfig& schedule);

/// Re-anchors O_o at the current pose and adopts `rig` for the next frame.
/// Color models and the world pose are preserved.
void reanchor(TrackerState& state, const Rig& rig, const Vec3& model_center);

/// Renders the template for one view at `object_pose` and builds the band
/// samples, posteriors and anchors. The color model blends `color` with this
/// image's statistics at `object_pose`; an empty `color` gives the statistics
/// alone. When the silhouette leaves the image, `color` is kept.
ViewObservation observe_view(const RgbImage& image, const TriangleMesh& mesh, const CameraView& view,
                             const RigidTransform& object_pose, const ColorModel& color, const EnergyConfig& cfg);

/// Sum of per-sample energies at `object_pose`. Each sample looks up the
/// template shifted by the motion of its model point relative to its anchor.
double view_energy(const ViewObservation& obs, const CameraView& view, const RigidTransform& object_pose,
                   const EnergyConfig& cfg);

/// Adds every usable sample of one view to `acc`. Throws EmptySampleSet when
/// no sample could be used.
void accumulate_view(const ViewObservation& obs, const CameraView& view, const RigidTransform& object_pose,
                     const EnergyConfig& cfg, NormalEquations& acc);

/// Solves (H + lambda diag(H)) dxi = -g. Throws SingularSystem.
Twist solve_step(const NormalEquations& acc, double lambda);

/// Single-view object-centered step, written as its own sample loop.
Twist monocular_step(const ViewObservation& obs, const CameraView& view, const RigidTransform& object_pose,
                     const EnergyConfig& cfg, double lambda);

/// Left-multiplies the latent pose by exp(dxi) and re-derives every camera
/// pose, i.e. camera_i_from_template <- c_iT_o exp(dxi^) (c_iT_o)^-1 c_iT_t.
void apply_increment(TrackerState& state, const Twist& dxi);

struct FrameReport {
  std::vector<double> energy_trace;   // accepted energies, first entry per round is the start energy
  std::size_t samples_used = 0;
  std::size_t skipped_border = 0;
  std::size_t skipped_behind = 0;
  int iterations = 0;
  bool converged = false;
  bool lost = false;
  std::string error;
};

/// Tracks one synchronized frame: per round, re-renders every view at the
/// current pose, rebuilds the samples and the color models (blended from the
/// models the frame started with) and runs damped Gauss-Newton iterations on
/// the joint energy. A step is accepted when the energy does not rise: in
/// all but the last round the candidate silhouettes are re-rendered, in the
/// last round the shifted-template energy is used. The stored color models
/// end up blended at the final pose. Throws LostTrack.
FrameReport track_frame(TrackerState& state, const std::vector<RgbImage>& images, const TriangleMesh& mesh,
                        const TrackerConfig& cfg);

/// Per-frame input: one image per view plus the rig (world frame) at that frame.
struct FrameInput {
  std::vector<RgbImage> images;
  Rig rig;
};
using FrameSource = std::function<FrameInput(int frame)>;

/// Reset rule: a frame is lost when its rotation error exceeds
/// `rotation_deg` or its translation error exceeds `translation_mm`.
struct ResetRule {
  double rotation_deg = 5.0;
  double translation_mm = 50.0;
};

struct TrackingResult {
  std::vector<RigidTransform> world_poses;                 // predicted world_from_template per frame
  std::vector<std::vector<RigidTransform>> camera_poses;   // [frame][view] camera_from_template
  std::vector<FrameReport> reports;
  std::vector<int> reset_frames;
  int lost_count() const { return static_cast<int>(reset_frames.size()); }
};

/// Optional hook called after each frame with the state that seeds the next one.
using StateObserver = std::function<void(int frame, const TrackerState&)>;

/// Chains track_frame over frames [first, first + count). With `ground_truth`
/// (world poses indexed by absolute frame) the reset rule is applied: the
/// failing estimate is kept for that frame and the next frame starts from
/// ground truth. Never throws for per-frame failures.
TrackingResult track_sequence(TrackerState& state, const TriangleMesh& mesh, int first, int count,
                              const FrameSource& source, const TrackerConfig& cfg,
                              const std::vector<RigidTransform>* ground_truth = nullptr,
                              const ResetRule& rule = {}, const StateObserver& observer = {});

}  // namespace mvtrack
