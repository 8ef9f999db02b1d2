#include "mvtrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mvtrack/errors.hpp"
#include "mvtrack/metrics.hpp"
#include "mvtrack/renderer.hpp"

namespace mvtrack {
namespace {

using Vec6Path = std::vector<Vec6>;

Vec6 catmull_rom(const Vec6& p0, const Vec6& p1, const Vec6& p2, const Vec6& p3, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * (2.0 * p1 + (p2 - p0) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

Mat3 rotation_from_vector(const Vec3& r) {
  const double angle = r.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, r / angle).toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(0.5 * (a.cwiseProduct(b).sum() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

// Spline through unit-range random waypoints; column 0..2 translation,
// 3..5 rotation vector. The first waypoint is the origin.
Vec6Path spline_path(int frames, int spacing, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  spacing = std::max(1, spacing);
  const int n_way = frames / spacing + 3;
  std::vector<Vec6> way(n_way);
  way[0].setZero();
  for (int i = 1; i < n_way; ++i) {
    for (int c = 0; c < 6; ++c) way[i][c] = unit(rng);
  }
  Vec6Path path(frames);
  for (int f = 0; f < frames; ++f) {
    const int seg = f / spacing;
    const double t = static_cast<double>(f % spacing) / spacing;
    const Vec6& p1 = way[seg];
    const Vec6& p0 = seg > 0 ? way[seg - 1] : way[seg];
    path[f] = catmull_rom(p0, p1, way[seg + 1], way[seg + 2], t);
  }
  return path;
}

// Scales translation and rotation parts so the largest per-frame step equals
// the amplitudes (mm, rad). Zero amplitude zeroes the part.
void scale_path(Vec6Path& path, double amp_t, double amp_r) {
  double max_t = 0.0;
  for (std::size_t f = 1; f < path.size(); ++f) max_t = std::max(max_t, (path[f].head<3>() - path[f - 1].head<3>()).norm());
  const double st = (amp_t > 0.0 && max_t > 0.0) ? amp_t / max_t : 0.0;
  for (auto& p : path) p.head<3>() *= st;

  if (!(amp_r > 0.0)) {
    for (auto& p : path) p.tail<3>().setZero();
    return;
  }
  double max_dr = 0.0;
  for (std::size_t f = 1; f < path.size(); ++f) max_dr = std::max(max_dr, (path[f].tail<3>() - path[f - 1].tail<3>()).norm());
  if (max_dr == 0.0) return;
  for (auto& p : path) p.tail<3>() *= amp_r / max_dr;
  // The rotation-vector step only approximates the geodesic step; shrink until bounded.
  for (int pass = 0; pass < 50; ++pass) {
    double max_angle = 0.0;
    for (std::size_t f = 1; f < path.size(); ++f) {
      max_angle = std::max(max_angle, rotation_angle_between(rotation_from_vector(path[f].tail<3>()),
                                                             rotation_from_vector(path[f - 1].tail<3>())));
    }
    if (max_angle <= amp_r) return;
    const double s = amp_r / max_angle * (1.0 - 1e-9);
    for (auto& p : path) p.tail<3>() *= s;
  }
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::Vector4d q;
  do {
    for (int i = 0; i < 4; ++i) q[i] = unit(rng);
  } while (q.norm() < 0.1 || q.norm() > 1.0);
  q.normalize();
  return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
}

std::string angle_label(double deg) {
  std::ostringstream ss;
  ss << deg << "°";
  return ss.str();
}

}  // namespace

Rig make_rig(const RigSpec& spec) {
  spec.intrinsics.validate();
  if (!(spec.standoff_mm > 0.0)) throw InvalidArgument("rig: standoff must be positive");
  Rig rig;
  CameraView c0;
  c0.intrinsics = spec.intrinsics;
  c0.object_from_camera = RigidTransform(Mat3::Identity(), Vec3(0.0, 0.0, -spec.standoff_mm));
  c0.index = 0;
  rig.push_back(c0);

  const double e = deg2rad(spec.elevation_deg);
  const Vec3 cone_axis(0.0, std::cos(e), -std::sin(e));
  int index = 1;
  for (double deg : spec.included_angles_deg) {
    if (!(deg > 0.0 && deg < 180.0)) throw InvalidArgument("rig: included angle must be in (0, 180) degrees");
    const double theta = deg2rad(deg);
    Mat3 rot;
    if (spec.pattern == RigPattern::kPlane) {
      rot = axis_angle(Vec3::UnitY(), theta);
    } else {
      // Rotation by psi about an axis at 90 - e degrees from the optical axis
      // turns that axis by theta when cos(theta) = sin^2 e + cos^2 e cos(psi).
      const double se = std::sin(e), ce = std::cos(e);
      const double cos_psi = (std::cos(theta) - se * se) / (ce * ce);
      if (!(ce > 0.0) || cos_psi < -1.0 - 1e-15 || cos_psi > 1.0 + 1e-15)
        throw InvalidArgument("rig: included angle not reachable on the cone");
      rot = axis_angle(cone_axis, std::acos(std::clamp(cos_psi, -1.0, 1.0)));
    }
    CameraView v;
    v.intrinsics = spec.intrinsics;
    v.object_from_camera = compose(RigidTransform(rot, Vec3::Zero()), c0.object_from_camera);
    v.index = index++;
    rig.push_back(v);
  }
  return rig;
}

SyntheticSequence::SyntheticSequence(std::shared_ptr<const TriangleMesh> mesh, Rig rig, MotionSpec motion,
                                     NoiseSpec noise, std::vector<RigidTransform> gt_world,
                                     std::vector<RigidTransform> rig_motion)
    : mesh_(std::move(mesh)),
      rig_(std::move(rig)),
      motion_(motion),
      noise_(noise),
      gt_world_(std::move(gt_world)),
      rig_motion_(std::move(rig_motion)) {}

Rig SyntheticSequence::rig_at(int frame, const std::vector<int>& views) const {
  Rig out;
  const RigidTransform& world_from_rig = rig_motion_.at(frame);
  auto add = [&](int i) {
    CameraView v = rig_.at(i);
    v.object_from_camera = compose(world_from_rig, v.object_from_camera);
    out.push_back(v);
  };
  if (views.empty()) {
    for (int i = 0; i < static_cast<int>(rig_.size()); ++i) add(i);
  } else {
    for (int i : views) add(i);
  }
  return out;
}

RigidTransform SyntheticSequence::gt_in_camera(int frame, int view) const {
  const CameraView v = rig_at(frame, {view}).front();
  return compose(v.camera_from_object(), gt_world_.at(frame));
}

RgbImage SyntheticSequence::render(int frame, int view) const {
  const CameraView v = rig_at(frame, {view}).front();
  const auto& k = v.intrinsics;
  const std::vector<float> coverage = render_coverage(*mesh_, v, gt_world_.at(frame), noise_.supersample);
  RgbImage img(k.width, k.height);
  std::seed_seq seq{static_cast<std::uint32_t>(motion_.seed), static_cast<std::uint32_t>(motion_.seed >> 32),
                    static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(view), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, noise_.sigma > 0.0 ? noise_.sigma : 1.0);
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    const double c = coverage[i];
    for (int ch = 0; ch < 3; ++ch) {
      double value = c * noise_.foreground[ch] + (1.0 - c) * noise_.background[ch];
      if (noise_.sigma > 0.0) value += gauss(rng);
      img.data[i * 3 + ch] = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
    }
  }
  return img;
}

FrameInput SyntheticSequence::frame_input(int frame, const std::vector<int>& views) const {
  FrameInput in;
  in.rig = rig_at(frame, views);
  if (views.empty()) {
    for (int i = 0; i < static_cast<int>(rig_.size()); ++i) in.images.push_back(render(frame, i));
  } else {
    for (int i : views) in.images.push_back(render(frame, i));
  }
  return in;
}

SyntheticSequence generate_sequence(std::shared_ptr<const TriangleMesh> mesh, const Rig& rig,
                                    const MotionSpec& motion, const NoiseSpec& noise) {
  if (!mesh) throw InvalidArgument("generate_sequence: no mesh");
  mesh->validate();
  if (motion.frames < 1) throw InvalidArgument("motion: frames must be >= 1");
  if (motion.translation_mm_per_frame < 0.0 || motion.rotation_deg_per_frame < 0.0)
    throw InvalidArgument("motion: amplitudes must be non-negative");

  std::mt19937_64 rng(motion.seed);
  const Mat3 base_rotation = random_rotation(rng);
  Vec6Path path = spline_path(motion.frames, motion.waypoint_spacing, rng);
  const bool translate = motion.mode != MotionMode::kRotateOnly;
  scale_path(path, translate ? motion.translation_mm_per_frame : 0.0, deg2rad(motion.rotation_deg_per_frame));

  const Vec3 center = mesh->center();
  std::vector<RigidTransform> gt(motion.frames), rig_motion(motion.frames);
  for (int f = 0; f < motion.frames; ++f) {
    const Vec3 t = path[f].head<3>();
    const Mat3 r = rotation_from_vector(path[f].tail<3>());
    if (motion.mode == MotionMode::kCamerasMove) {
      gt[f] = RigidTransform(base_rotation, -(base_rotation * center));
      rig_motion[f] = RigidTransform(r, t);
    } else {
      const Mat3 rot = r * base_rotation;
      gt[f] = RigidTransform(rot, t - rot * center);
      rig_motion[f] = RigidTransform::identity();
    }
  }
  return SyntheticSequence(std::move(mesh), rig, motion, noise, std::move(gt), std::move(rig_motion));
}

void track_and_score(const SyntheticSequence& seq, const std::vector<int>& views, const TrackerConfig& cfg,
                     const ResetRule& reset, ErrorTable::Cell& cell, TrackingResult* result_out) {
  const TriangleMesh& mesh = seq.mesh();
  TrackerState state = make_tracker_state(seq.rig_at(0, views), seq.ground_truth().front(), mesh.center(), cfg.solver);
  const FrameSource source = [&](int f) { return seq.frame_input(f, views); };
  TrackingResult result = track_sequence(state, mesh, 0, seq.frames(), source, cfg, &seq.ground_truth(), reset);
  for (int f = 0; f < seq.frames(); ++f) {
    const RigidTransform& est = result.world_poses[f];
    const RigidTransform& gt = seq.ground_truth()[f];
    const Mat3 ref = seq.rig_at(f, {views.front()}).front().camera_from_object().rotation();
    const Vec3 axis = translation_error_in_frame(est.translation(), gt.translation(), ref);
    cell.r += rotation_error(est.rotation(), gt.rotation());
    cell.tx += std::abs(axis.x());
    cell.ty += std::abs(axis.y());
    cell.tz += std::abs(axis.z());
    ++cell.frames;
  }
  cell.lost += result.lost_count();
  if (result_out) *result_out = std::move(result);
}

namespace {

void finalize(ErrorTable::Cell& cell) {
  if (cell.frames == 0) return;
  const double n = cell.frames;
  cell.r /= n;
  cell.tx /= n;
  cell.ty /= n;
  cell.tz /= n;
}

}  // namespace

ErrorTable run_angle_sweep(const std::vector<std::shared_ptr<const TriangleMesh>>& meshes,
                           const std::vector<double>& angles_deg, const SweepConfig& cfg) {
  if (meshes.empty()) throw InvalidArgument("angle sweep: need at least one mesh");
  if (angles_deg.empty()) throw InvalidArgument("angle sweep: need at least one angle");
  RigSpec spec = cfg.rig;
  spec.included_angles_deg = angles_deg;
  const Rig rig = make_rig(spec);

  ErrorTable table;
  table.title = "Binocular tracking evaluation (" + to_string(cfg.rig.pattern) + ", " + to_string(cfg.motion.mode) + ")";
  std::vector<std::vector<int>> view_sets;
  if (cfg.include_mono) {
    table.columns.push_back("Mono.");
    table.camera_labels.push_back("C-0");
    view_sets.push_back({0});
  }
  for (std::size_t k = 0; k < angles_deg.size(); ++k) {
    table.columns.push_back(angle_label(angles_deg[k]));
    table.camera_labels.push_back("C-0/C-" + std::to_string(k + 1));
    view_sets.push_back({0, static_cast<int>(k + 1)});
  }
  table.cells.resize(view_sets.size());

  for (std::size_t m = 0; m < meshes.size(); ++m) {
    MotionSpec motion = cfg.motion;
    motion.seed = cfg.motion.seed + m;
    const SyntheticSequence seq = generate_sequence(meshes[m], rig, motion, cfg.noise);
    for (std::size_t c = 0; c < view_sets.size(); ++c) {
      if (!table.cells[c].error.empty()) continue;
      try {
        track_and_score(seq, view_sets[c], cfg.tracker, cfg.reset, table.cells[c]);
      } catch (const std::exception& e) {
        table.cells[c].error = e.what();
      }
    }
  }
  for (auto& cell : table.cells) finalize(cell);
  return table;
}

ErrorTable run_resolution_sweep(std::shared_ptr<const TriangleMesh> mesh, const std::vector<int>& widths,
                                const SweepConfig& cfg) {
  if (widths.empty()) throw InvalidArgument("resolution sweep: need at least one width");
  if (!std::is_sorted(widths.begin(), widths.end())) throw InvalidArgument("resolution sweep: widths must ascend");
  ErrorTable table;
  table.title = "Binocular tracking evaluation on different resolution";
  table.header_label = "Reso.(width)";
  for (int w : widths) {
    table.columns.push_back(std::to_string(w));
    table.camera_labels.push_back("C-0/C-1");
    ErrorTable::Cell cell;
    try {
      RigSpec spec = cfg.rig;
      spec.pattern = RigPattern::kPlane;
      spec.included_angles_deg = {90.0};
      spec.intrinsics = cfg.rig.intrinsics.scaled_to_width(w);
      const Rig rig = make_rig(spec);
      const SyntheticSequence seq = generate_sequence(mesh, rig, cfg.motion, cfg.noise);
      track_and_score(seq, {0, 1}, cfg.tracker, cfg.reset, cell);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    finalize(cell);
    table.cells.push_back(cell);
  }
  return table;
}

std::string to_string(RigPattern p) { return p == RigPattern::kPlane ? "plane" : "cone"; }

std::string to_string(MotionMode m) {
  switch (m) {
    case MotionMode::kFreeMove: return "free_move";
    case MotionMode::kRotateOnly: return "rotate_only";
    case MotionMode::kCamerasMove: return "cameras_move";
  }
  return "free_move";
}

RigPattern rig_pattern_from_string(const std::string& s) {
  if (s == "plane") return RigPattern::kPlane;
  if (s == "cone") return RigPattern::kCone;
  throw InvalidArgument("unknown rig pattern '" + s + "' (expected plane or cone)");
}

MotionMode motion_mode_from_string(const std::string& s) {
  if (s == "free_move") return MotionMode::kFreeMove;
  if (s == "rotate_only") return MotionMode::kRotateOnly;
  if (s == "cameras_move") return MotionMode::kCamerasMove;
  throw InvalidArgument("unknown motion mode '" + s + "' (expected free_move, rotate_only or cameras_move)");
}

}  // namespace mvtrack
