#include "mvtrack/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "mvtrack/errors.hpp"
#include "mvtrack/metrics.hpp"
#include "mvtrack/renderer.hpp"

namespace mvtrack {
namespace {

// Shifted template lookup for one sample: the template moves with the model
// point, so the sample at pixel x sees phi(x - (u(pose) - anchor)).
struct SampleLookup {
  bool behind = false;
  Vec2 at;
};

SampleLookup lookup(const ViewObservation& obs, std::size_t i, const RigidTransform& cam_from_model,
                    const CameraIntrinsics& k) {
  const Vec3 x_c = cam_from_model.apply(obs.samples[i].model_point);
  if (!(x_c.z() > 0.0)) return {true, Vec2::Zero()};
  const Vec2 u = project_camera(k, x_c);
  const Vec2 shift = u - obs.anchors[i];
  return {false, Vec2(obs.samples[i].x - shift.x(), obs.samples[i].y - shift.y())};
}

// Phi is only read near the contour band, so it is computed band-limited.
LevelSetField band_levelset(const SilhouetteMask& mask, const EnergyConfig& cfg) {
  return signed_distance(mask, 2.0 * cfg.band_for_width(mask.width) + 8.0);
}

// Energy of the observation's samples against the silhouette re-rendered at `pose`.
double rendered_energy(const ViewObservation& obs, const TriangleMesh& mesh, const CameraView& view,
                       const RigidTransform& pose, const EnergyConfig& cfg) {
  const LevelSetField ls = band_levelset(rasterize_silhouette(mesh, view, pose), cfg);
  double e = 0.0;
  for (std::size_t i = 0; i < obs.samples.size(); ++i)
    e += pixel_energy(ls.at(obs.samples[i].x, obs.samples[i].y), obs.p_fg[i], obs.p_bg[i], cfg.heaviside_slope,
                      cfg.probability_floor);
  return e;
}

double next_lambda(double lambda, const SolverConfig& s) { return lambda == 0.0 ? s.lambda_min : lambda * 10.0; }

}  // namespace

void SolverConfig::validate() const {
  if (rounds < 1) throw InvalidArgument("solver: rounds must be >= 1");
  if (iters_per_round < 1) throw InvalidArgument("solver: iters_per_round must be >= 1");
  if (!(lambda_max > 0.0) || !(lambda_min > 0.0) || lambda_min > lambda_max)
    throw InvalidArgument("solver: need 0 < lambda_min <= lambda_max");
  if (max_rejections < 0) throw InvalidArgument("solver: max_rejections must be >= 0");
}

NormalEquations& NormalEquations::operator+=(const NormalEquations& o) {
  H += o.H;
  g += o.g;
  used += o.used;
  skipped_border += o.skipped_border;
  skipped_behind += o.skipped_behind;
  return *this;
}

TrackerState make_tracker_state(const Rig& rig, const RigidTransform& world_from_template, const Vec3& model_center,
                                const SolverConfig& schedule) {
  TrackerState state;
  state.object_from_template = RigidTransform::identity();
  state.world_from_object = world_from_template;
  state.rounds = schedule.rounds;
  state.iters_per_round = schedule.iters_per_round;
  state.color_models.assign(rig.size(), ColorModel{});
  reanchor(state, rig, model_center);
  return state;
}

void reanchor(TrackerState& state, const Rig& rig, const Vec3& model_center) {
  const RigidTransform world_pose = state.world_pose();
  state.world_from_object = compose(world_pose, RigidTransform::translation_only(model_center));
  state.object_from_template = RigidTransform::translation_only(-model_center);
  const RigidTransform object_from_world = invert(state.world_from_object);
  state.views.clear();
  state.camera_poses.clear();
  for (const auto& v : rig) {
    CameraView local = v;
    local.object_from_camera = compose(object_from_world, v.object_from_camera);
    state.views.push_back(local);
    state.camera_poses.push_back(compose(local.camera_from_object(), state.object_from_template));
  }
  if (state.color_models.size() != rig.size()) state.color_models.resize(rig.size());
}

ViewObservation observe_view(const RgbImage& image, const TriangleMesh& mesh, const CameraView& view,
                             const RigidTransform& object_pose, const ColorModel& color, const EnergyConfig& cfg) {
  const auto& k = view.intrinsics;
  if (image.width != k.width || image.height != k.height)
    throw InvalidArgument("observe_view: image size does not match intrinsics");
  ViewObservation obs;
  obs.image = &image;
  const RenderResult render = rasterize(mesh, view, object_pose, true);
  obs.levelset = band_levelset(render.mask, cfg);
  try {
    obs.color = build_color_model(image, obs.levelset, color.empty() ? nullptr : &color, cfg);
  } catch (const DegenerateRegion&) {
    if (color.empty()) throw;
    obs.color = color;
  }
  obs.samples = contour_band(obs.levelset, cfg.band_for_width(k.width), &render, cfg.stride);

  const RigidTransform cam_from_model = compose(view.camera_from_object(), object_pose);
  obs.p_fg.reserve(obs.samples.size());
  obs.p_bg.reserve(obs.samples.size());
  obs.anchors.reserve(obs.samples.size());
  for (const auto& s : obs.samples) {
    const auto [pf, pb] = obs.color.posteriors(image.at(s.x, s.y));
    obs.p_fg.push_back(pf);
    obs.p_bg.push_back(pb);
    const Vec3 x_c = cam_from_model.apply(s.model_point);
    // Rendered surface points are in front of the near plane by construction.
    obs.anchors.push_back(project_camera(k, x_c));
  }
  return obs;
}

double view_energy(const ViewObservation& obs, const CameraView& view, const RigidTransform& object_pose,
                   const EnergyConfig& cfg) {
  const RigidTransform cam_from_model = compose(view.camera_from_object(), object_pose);
  double e = 0.0;
  for (std::size_t i = 0; i < obs.samples.size(); ++i) {
    const SampleLookup l = lookup(obs, i, cam_from_model, view.intrinsics);
    if (l.behind) continue;
    const double phi = interpolate_phi(obs.levelset, l.at.x(), l.at.y());
    e += pixel_energy(phi, obs.p_fg[i], obs.p_bg[i], cfg.heaviside_slope, cfg.probability_floor);
  }
  return e;
}

void accumulate_view(const ViewObservation& obs, const CameraView& view, const RigidTransform& object_pose,
                     const EnergyConfig& cfg, NormalEquations& acc) {
  const RigidTransform cam_from_model = compose(view.camera_from_object(), object_pose);
  const std::size_t used_before = acc.used;
  for (std::size_t i = 0; i < obs.samples.size(); ++i) {
    const SampleLookup l = lookup(obs, i, cam_from_model, view.intrinsics);
    if (l.behind) {
      ++acc.skipped_behind;
      continue;
    }
    const auto dfdx = pixel_gradient(obs.levelset, l.at.x(), l.at.y(), obs.p_fg[i], obs.p_bg[i],
                                     cfg.heaviside_slope, cfg.probability_floor);
    if (!dfdx) {
      ++acc.skipped_border;
      continue;
    }
    // The lookup moves opposite to the model point, hence the sign.
    const Row6 j = -(*dfdx) * full_pose_jacobian(view, obs.samples[i].model_point, object_pose);
    double r = 1.0;
    if (cfg.residual == ResidualMode::kEnergyWeighted) {
      const double phi = interpolate_phi(obs.levelset, l.at.x(), l.at.y());
      r = pixel_energy(phi, obs.p_fg[i], obs.p_bg[i], cfg.heaviside_slope, cfg.probability_floor);
    }
    acc.H.noalias() += j.transpose() * j;
    acc.g.noalias() += j.transpose() * r;
    ++acc.used;
  }
  if (acc.used == used_before) throw EmptySampleSet("view " + std::to_string(view.index) + ": no usable samples");
}

Twist solve_step(const NormalEquations& acc, double lambda) {
  if (!acc.H.allFinite() || !acc.g.allFinite()) throw SingularSystem("non-finite normal equations");
  if (acc.g.isZero(0.0)) return Twist{};
  Mat6 a = acc.H;
  if (lambda > 0.0) a.diagonal() += lambda * acc.H.diagonal();
  Eigen::LDLT<Mat6> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw SingularSystem("normal equations not positive definite");
  const Vec6 d = ldlt.vectorD();
  if (!(d.minCoeff() > 1e-12 * std::max(d.maxCoeff(), 1e-300))) throw SingularSystem("normal equations singular");
  const Vec6 x = ldlt.solve(-acc.g);
  if (!x.allFinite()) throw SingularSystem("non-finite step");
  return Twist::from_vector(x);
}

Twist monocular_step(const ViewObservation& obs, const CameraView& view, const RigidTransform& object_pose,
                     const EnergyConfig& cfg, double lambda) {
  const RigidTransform cam_from_model = compose(view.camera_from_object(), object_pose);
  NormalEquations acc;
  for (std::size_t i = 0; i < obs.samples.size(); ++i) {
    const Vec3& x = obs.samples[i].model_point;
    const Vec3 x_c = cam_from_model.apply(x);
    if (!(x_c.z() > 0.0)) continue;
    const Vec2 shift = project_camera(view.intrinsics, x_c) - obs.anchors[i];
    const double px = obs.samples[i].x - shift.x();
    const double py = obs.samples[i].y - shift.y();
    const auto dfdx =
        pixel_gradient(obs.levelset, px, py, obs.p_fg[i], obs.p_bg[i], cfg.heaviside_slope, cfg.probability_floor);
    if (!dfdx) continue;
    const Mat23 dx_dxo = projection_point_jacobian(view, ObjectPoint(object_pose.apply(x)));
    const Mat36 dxo_dxi = point_jacobian(object_pose, x);
    const Row6 j = -(*dfdx) * (dx_dxo * dxo_dxi);
    const double r = cfg.residual == ResidualMode::kEnergyWeighted
                         ? pixel_energy(interpolate_phi(obs.levelset, px, py), obs.p_fg[i], obs.p_bg[i],
                                        cfg.heaviside_slope, cfg.probability_floor)
                         : 1.0;
    acc.H.noalias() += j.transpose() * j;
    acc.g.noalias() += j.transpose() * r;
    ++acc.used;
  }
  if (acc.used == 0) throw EmptySampleSet("monocular view has no usable samples");
  return solve_step(acc, lambda);
}

void apply_increment(TrackerState& state, const Twist& dxi) {
  state.object_from_template = compose(exp_se3(dxi), state.object_from_template);
  for (std::size_t i = 0; i < state.views.size(); ++i) {
    state.camera_poses[i] = compose(state.views[i].camera_from_object(), state.object_from_template);
  }
}

FrameReport track_frame(TrackerState& state, const std::vector<RgbImage>& images, const TriangleMesh& mesh,
                        const TrackerConfig& cfg) {
  const std::size_t n_views = state.views.size();
  if (images.size() != n_views) throw InvalidArgument("track_frame: need exactly one image per view");
  const SolverConfig& sc = cfg.solver;
  FrameReport report;
  std::vector<ViewObservation> obs(n_views);
  auto joint_energy = [&](const RigidTransform& pose) {
    double e = 0.0;
    for (std::size_t v = 0; v < n_views; ++v) e += view_energy(obs[v], state.views[v], pose, cfg.energy);
    return e;
  };

  double previous_round_energy = 0.0;
  int increasing_rounds = 0;
  for (int round = 0; round < state.rounds; ++round) {
    for (std::size_t v = 0; v < n_views; ++v) {
      obs[v] = observe_view(images[v], mesh, state.views[v], state.object_from_template, state.color_models[v],
                            cfg.energy);
    }
    double energy = joint_energy(state.object_from_template);
    report.energy_trace.push_back(energy);
    if (round > 0 && energy > previous_round_energy) {
      if (++increasing_rounds >= sc.divergence_rounds) throw LostTrack("energy increased for consecutive rounds");
    } else {
      increasing_rounds = 0;
    }
    previous_round_energy = energy;

    double lambda = 0.0;
    for (int it = 0; it < state.iters_per_round; ++it) {
      NormalEquations acc;
      std::size_t usable_views = 0;
      for (std::size_t v = 0; v < n_views; ++v) {
        NormalEquations partial;
        try {
          accumulate_view(obs[v], state.views[v], state.object_from_template, cfg.energy, partial);
          ++usable_views;
        } catch (const EmptySampleSet&) {
        }
        acc += partial;
      }
      report.samples_used = acc.used;
      report.skipped_border = acc.skipped_border;
      report.skipped_behind = acc.skipped_behind;
      if (usable_views == 0) throw LostTrack("no usable samples in any view");
      ++report.iterations;

      bool accepted = false;
      double step_norm = 0.0;
      for (int attempt = 0; attempt <= sc.max_rejections; ++attempt) {
        Twist step;
        try {
          step = solve_step(acc, lambda);
        } catch (const SingularSystem&) {
          lambda = next_lambda(lambda, sc);
          if (lambda > sc.lambda_max) throw LostTrack("normal equations singular at maximum damping");
          continue;
        }
        step_norm = step.vector().norm();
        const RigidTransform candidate = compose(exp_se3(step), state.object_from_template);
        double e = 0.0;
        if (round + 1 < state.rounds) {
          for (std::size_t v = 0; v < n_views; ++v)
            e += rendered_energy(obs[v], mesh, state.views[v], candidate, cfg.energy);
        } else {
          e = joint_energy(candidate);
        }
        if (e <= energy) {
          apply_increment(state, step);
          energy = e;
          lambda = lambda / 10.0 < sc.lambda_min ? 0.0 : lambda / 10.0;
          accepted = true;
          break;
        }
        lambda = std::min(next_lambda(lambda, sc), sc.lambda_max);
      }
      if (accepted) report.energy_trace.push_back(energy);
      if (!accepted || step_norm < sc.step_tolerance) {
        report.converged = true;
        break;
      }
    }
  }

  // Blend each view's color statistics at the final pose.
  for (std::size_t v = 0; v < n_views; ++v) {
    const RenderResult render = rasterize(mesh, state.views[v], state.object_from_template, false);
    const LevelSetField ls = band_levelset(render.mask, cfg.energy);
    try {
      state.color_models[v] = build_color_model(images[v], ls, &state.color_models[v], cfg.energy);
    } catch (const DegenerateRegion&) {
      // Object left the image in this view; keep the previous statistics.
    }
  }
  return report;
}

TrackingResult track_sequence(TrackerState& state, const TriangleMesh& mesh, int first, int count,
                              const FrameSource& source, const TrackerConfig& cfg,
                              const std::vector<RigidTransform>* ground_truth, const ResetRule& rule,
                              const StateObserver& observer) {
  TrackingResult result;
  const Vec3 center = mesh.center();
  for (int f = first; f < first + count; ++f) {
    FrameInput input = source(f);
    reanchor(state, input.rig, center);
    FrameReport report;
    TrackerState before = state;
    try {
      report = track_frame(state, input.images, mesh, cfg);
    } catch (const Error& e) {
      report.lost = true;
      report.error = e.what();
      // Fall back to the pose and statistics the frame started from.
      state = std::move(before);
    }
    result.world_poses.push_back(state.world_pose());
    result.camera_poses.push_back(state.camera_poses);

    state.lost = report.lost;
    if (ground_truth != nullptr && f < static_cast<int>(ground_truth->size())) {
      const RigidTransform& gt = (*ground_truth)[f];
      const RigidTransform est = state.world_pose();
      const bool failed = rotation_error(est.rotation(), gt.rotation()) > rule.rotation_deg ||
                          translation_error(est.translation(), gt.translation()) > rule.translation_mm;
      if (failed || report.lost) {
        result.reset_frames.push_back(f);
        state.world_from_object = gt;
        state.object_from_template = RigidTransform::identity();
        reanchor(state, input.rig, center);
        state.lost = true;
      }
    }
    result.reports.push_back(std::move(report));
    if (observer) observer(f, state);
  }
  return result;
}

}  // namespace mvtrack
