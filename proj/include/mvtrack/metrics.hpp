#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mvtrack/geometry.hpp"
#include "mvtrack/mesh.hpp"

namespace mvtrack {

/// Geodesic rotation distance in degrees:
/// acos(clamp((trace(R_hat^T R) - 1) / 2, -1, 1)). Throws NotARotation when
/// either input fails R^T R = I, det = 1 at 1e-6.
double rotation_error(const Mat3& r_hat, const Mat3& r);

/// ||t_hat - t||_2 in mm.
double translation_error(const Vec3& t_hat, const Vec3& t);

/// (t_hat - t) expressed in a reference camera: rotation part of
/// camera_from_world applied to the world-frame difference.
Vec3 translation_error_in_frame(const Vec3& t_hat, const Vec3& t, const Mat3& camera_from_world);

/// Mean over mesh vertices of ||(R_hat X + t_hat) - (R X + t)||. Throws EmptyMesh.
double add_error(const TriangleMesh& mesh, const RigidTransform& pose_hat, const RigidTransform& pose_gt);

struct PoseError {
  double rotation_deg = 0.0;
  double translation_mm = 0.0;
  Vec3 per_axis_mm = Vec3::Zero();  // signed components in the reference camera frame
  double add_mm = 0.0;
};

/// Success thresholds. Comparisons use <= (an error of exactly n degrees
/// passes n degrees); the reset rule fires on strict >.
struct MetricThresholds {
  std::vector<std::pair<double, double>> deg_cm = {{5.0, 5.0}, {2.0, 2.0}};
  std::vector<double> deg = {5.0, 2.0};
  std::vector<double> cm = {5.0, 2.0};
  std::vector<double> add_fractions = {0.02, 0.05, 0.1};
  double reset_deg = 5.0;
  double reset_cm = 5.0;
  double auc_max_fraction = 0.2;
  int auc_steps = 100;
};

struct SuccessRate {
  std::string name;     // e.g. "ADD-0.05d", "5°5cm", "2cm"
  double percent = 0.0; // in [0, 100]
};

struct SequenceReport {
  std::vector<PoseError> frames;
  std::vector<int> reset_frames;
  std::vector<SuccessRate> rates;
  double diameter_mm = 0.0;        // bbox longest side d
  std::vector<double> add_curve;   // success fraction at j / auc_steps * auc_max_fraction * d
  double auc = 0.0;                // normalized to [0, 1]
  double mean_time_ms = 0.0;

  const SuccessRate* rate(const std::string& name) const;
};

PoseError pose_error(const TriangleMesh& mesh, const RigidTransform& pose_hat, const RigidTransform& pose_gt,
                     const Mat3& reference_rotation = Mat3::Identity());

/// Scores precomputed per-frame errors against bbox diameter `d`.
SequenceReport score_errors(const std::vector<PoseError>& errors, double d, const MetricThresholds& th = {});

/// Scores aligned prediction / ground-truth trajectories. Per-axis errors are
/// expressed through `reference_rotation` (camera_from_world of the first
/// camera). Throws LengthMismatch.
SequenceReport score_sequence(const std::vector<RigidTransform>& predicted,
                              const std::vector<RigidTransform>& ground_truth, const TriangleMesh& mesh,
                              const MetricThresholds& th = {}, const Mat3& reference_rotation = Mat3::Identity());

/// Column names in report order.
std::vector<std::string> rate_names(const MetricThresholds& th);

}  // namespace mvtrack
