#include "mvtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvtrack/errors.hpp"

namespace mvtrack {
namespace {

void check_rotation(const Mat3& r, const char* which) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!r.allFinite() || ortho > 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6)
    throw NotARotation(std::string("rotation_error: ") + which + " is not a rotation matrix");
}

std::string number(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

double rotation_error(const Mat3& r_hat, const Mat3& r) {
  check_rotation(r_hat, "R_hat");
  check_rotation(r, "R");
  // trace(A^T B) as an elementwise sum, symmetric in its arguments.
  const double trace = r_hat.cwiseProduct(r).sum();
  const double c = std::clamp(0.5 * (trace - 1.0), -1.0, 1.0);
  return rad2deg(std::acos(c));
}

double translation_error(const Vec3& t_hat, const Vec3& t) { return (t_hat - t).norm(); }

Vec3 translation_error_in_frame(const Vec3& t_hat, const Vec3& t, const Mat3& camera_from_world) {
  return camera_from_world * (t_hat - t);
}

double add_error(const TriangleMesh& mesh, const RigidTransform& pose_hat, const RigidTransform& pose_gt) {
  if (mesh.vertices.empty()) throw EmptyMesh();
  double sum = 0.0;
  for (const auto& x : mesh.vertices) sum += (pose_hat.apply(x) - pose_gt.apply(x)).norm();
  return sum / static_cast<double>(mesh.vertices.size());
}

PoseError pose_error(const TriangleMesh& mesh, const RigidTransform& pose_hat, const RigidTransform& pose_gt,
                     const Mat3& reference_rotation) {
  PoseError e;
  e.rotation_deg = rotation_error(pose_hat.rotation(), pose_gt.rotation());
  e.translation_mm = translation_error(pose_hat.translation(), pose_gt.translation());
  e.per_axis_mm = translation_error_in_frame(pose_hat.translation(), pose_gt.translation(), reference_rotation);
  e.add_mm = add_error(mesh, pose_hat, pose_gt);
  return e;
}

const SuccessRate* SequenceReport::rate(const std::string& name) const {
  for (const auto& r : rates) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::vector<std::string> rate_names(const MetricThresholds& th) {
  std::vector<std::string> names;
  for (double f : th.add_fractions) names.push_back("ADD-" + number(f) + "d");
  for (const auto& [deg, cm] : th.deg_cm) names.push_back(number(deg) + "°" + number(cm) + "cm");
  for (double deg : th.deg) names.push_back(number(deg) + "°");
  for (double cm : th.cm) names.push_back(number(cm) + "cm");
  return names;
}

SequenceReport score_errors(const std::vector<PoseError>& errors, double d, const MetricThresholds& th) {
  SequenceReport report;
  report.frames = errors;
  report.diameter_mm = d;
  const double n = static_cast<double>(errors.size());
  auto percent = [&](auto&& pred) {
    if (errors.empty()) return 0.0;
    const auto hits = std::count_if(errors.begin(), errors.end(), pred);
    return 100.0 * static_cast<double>(hits) / n;
  };

  const std::vector<std::string> names = rate_names(th);
  std::size_t k = 0;
  for (double f : th.add_fractions) {
    report.rates.push_back({names[k++], percent([&](const PoseError& e) { return e.add_mm <= f * d; })});
  }
  for (const auto& [deg, cm] : th.deg_cm) {
    report.rates.push_back({names[k++], percent([&](const PoseError& e) {
                              return e.rotation_deg <= deg && e.translation_mm <= 10.0 * cm;
                            })});
  }
  for (double deg : th.deg) {
    report.rates.push_back({names[k++], percent([&](const PoseError& e) { return e.rotation_deg <= deg; })});
  }
  for (double cm : th.cm) {
    report.rates.push_back({names[k++], percent([&](const PoseError& e) { return e.translation_mm <= 10.0 * cm; })});
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].rotation_deg > th.reset_deg || errors[i].translation_mm > 10.0 * th.reset_cm)
      report.reset_frames.push_back(static_cast<int>(i));
  }

  const int steps = std::max(1, th.auc_steps);
  report.add_curve.resize(steps + 1);
  for (int j = 0; j <= steps; ++j) {
    const double tau = th.auc_max_fraction * d * j / steps;
    report.add_curve[j] = errors.empty() ? 0.0 : percent([&](const PoseError& e) { return e.add_mm <= tau; }) / 100.0;
  }
  double area = 0.0;
  for (int j = 0; j < steps; ++j) area += 0.5 * (report.add_curve[j] + report.add_curve[j + 1]);
  report.auc = area / steps;
  return report;
}

SequenceReport score_sequence(const std::vector<RigidTransform>& predicted,
                              const std::vector<RigidTransform>& ground_truth, const TriangleMesh& mesh,
                              const MetricThresholds& th, const Mat3& reference_rotation) {
  if (predicted.size() != ground_truth.size()) {
    throw LengthMismatch("score_sequence: " + std::to_string(predicted.size()) + " predicted vs " +
                         std::to_string(ground_truth.size()) + " ground-truth frames");
  }
  if (mesh.vertices.empty()) throw EmptyMesh();
  std::vector<PoseError> errors;
  errors.reserve(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    errors.push_back(pose_error(mesh, predicted[i], ground_truth[i], reference_rotation));
  }
  return score_errors(errors, mesh.bbox_longest_side(), th);
}

}  // namespace mvtrack
