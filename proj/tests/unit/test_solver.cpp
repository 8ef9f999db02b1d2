#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mvtrack/config.hpp"
#include "mvtrack/errors.hpp"
#include "mvtrack/metrics.hpp"
#include "mvtrack/simulator.hpp"
#include "mvtrack/solver.hpp"
#include "test_support.hpp"

using namespace mvtrack;
using mvtrack::testing::random_transform;
using mvtrack::testing::random_twist;

namespace {

std::shared_ptr<const TriangleMesh> builtin(const std::string& name) {
  return std::make_shared<const TriangleMesh>(meshes::by_name(name));
}

// Static scene: every frame shows the object at `pose`.
SyntheticSequence static_sequence(std::shared_ptr<const TriangleMesh> mesh, const Rig& rig,
                                  const RigidTransform& pose, int frames) {
  MotionSpec motion;
  motion.frames = frames;
  return SyntheticSequence(mesh, rig, motion, NoiseSpec{}, std::vector<RigidTransform>(frames, pose),
                           std::vector<RigidTransform>(frames, RigidTransform::identity()));
}

Rig rig_with(std::vector<double> angles, int width = 640) {
  RigSpec spec;
  spec.included_angles_deg = std::move(angles);
  spec.intrinsics = spec.intrinsics.scaled_to_width(width);
  return make_rig(spec);
}

RigidTransform posed(const TriangleMesh& mesh, const Mat3& r) {
  // Rotation about the bbox center, center at the world origin.
  return RigidTransform(r, -(r * mesh.center()));
}

double center_error(const TriangleMesh& mesh, const RigidTransform& a, const RigidTransform& b) {
  return (a.apply(mesh.center()) - b.apply(mesh.center())).norm();
}

}  // namespace

TEST(SolveStep, ZeroGradientGivesZeroStep) {
  NormalEquations acc;
  acc.H = Mat6::Identity() * 3.0;
  const Twist step = solve_step(acc, 0.0);
  EXPECT_EQ(step.vector(), Vec6::Zero());
}

TEST(SolveStep, IdentitySystem) {
  NormalEquations acc;
  acc.H = Mat6::Identity();
  acc.g = Vec6::Unit(0);
  const Vec6 step = solve_step(acc, 0.0).vector();
  EXPECT_EQ(step, -Vec6::Unit(0));
}

TEST(SolveStep, RandomSpdResidual) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Mat6 a;
    for (int i = 0; i < 36; ++i) a(i) = n(rng);
    NormalEquations acc;
    acc.H = a * a.transpose() + 0.1 * Mat6::Identity();
    for (int i = 0; i < 6; ++i) acc.g(i) = n(rng);
    const double lambda = trial % 2 ? 0.0 : std::abs(n(rng));
    const Vec6 x = solve_step(acc, lambda).vector();
    Mat6 damped = acc.H;
    damped.diagonal() += lambda * acc.H.diagonal();
    EXPECT_LT((damped * x + acc.g).norm(), 1e-10 * acc.g.norm());
  }
}

TEST(SolveStep, SingularSystemThrows) {
  NormalEquations acc;
  acc.g = Vec6::Ones();
  EXPECT_THROW(solve_step(acc, 1.0), SingularSystem);
}

TEST(NormalEquations, AccumulationIsAdditive) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  NormalEquations a, b;
  for (int i = 0; i < 36; ++i) {
    a.H(i) = n(rng);
    b.H(i) = n(rng);
  }
  a.g.setRandom();
  b.g.setRandom();
  a.used = 3;
  b.used = 4;
  b.skipped_border = 2;
  NormalEquations sum = a;
  sum += b;
  EXPECT_EQ(sum.H, a.H + b.H);
  EXPECT_EQ(sum.g, a.g + b.g);
  EXPECT_EQ(sum.used, 7u);
  EXPECT_EQ(sum.skipped_border, 2u);
}

TEST(ApplyIncrement, ZeroTwistLeavesStateUnchanged) {
  std::mt19937_64 rng(5);
  const auto mesh = builtin("box_notch");
  TrackerState s = make_tracker_state(rig_with({90}), random_transform(rng), mesh->center(), SolverConfig{});
  const TrackerState before = s;
  apply_increment(s, Twist{});
  EXPECT_EQ(s.object_from_template.matrix(), before.object_from_template.matrix());
  for (std::size_t i = 0; i < s.views.size(); ++i)
    EXPECT_EQ(s.camera_poses[i].matrix(), before.camera_poses[i].matrix());
}

TEST(ApplyIncrement, IdentityCameraAppliesTwistDirectly) {
  std::mt19937_64 rng(6);
  TrackerState s;
  CameraView v;
  s.views = {v};
  s.object_from_template = random_transform(rng);
  s.camera_poses = {s.object_from_template};
  const RigidTransform before = s.camera_poses[0];
  const Twist dxi = random_twist(rng);
  apply_increment(s, dxi);
  EXPECT_LT((s.camera_poses[0].matrix() - exp_se3(dxi).matrix() * before.matrix()).norm(), 1e-12);
}

TEST(ApplyIncrement, ViewsAgreeOnOneLatentPose) {
  std::mt19937_64 rng(7);
  Rig rig;
  for (int i = 0; i < 4; ++i) {
    CameraView v = mvtrack::testing::random_view(rng);
    v.index = i;
    rig.push_back(v);
  }
  TrackerState s = make_tracker_state(rig, random_transform(rng), Vec3(5, -3, 2), SolverConfig{});
  for (int step = 0; step < 200; ++step) {
    const RigidTransform before = s.object_from_template;
    const Twist dxi = random_twist(rng);
    apply_increment(s, dxi);
    const Mat4 latent = s.object_from_template.matrix();
    EXPECT_LT((latent - exp_se3(dxi).matrix() * before.matrix()).norm(), 1e-9);
    for (std::size_t i = 0; i < s.views.size(); ++i) {
      // c_iT_o exp(dxi) (c_iT_o)^-1 c_iT_t, and o_T_t reconstructed from view i.
      const Mat4 cam_from_obj = s.views[i].camera_from_object().matrix();
      const Mat4 conjugated = cam_from_obj * exp_se3(dxi).matrix() * cam_from_obj.inverse() *
                              (cam_from_obj * before.matrix());
      EXPECT_LT((s.camera_poses[i].matrix() - conjugated).norm(), 1e-9);
      const Mat4 from_view = s.views[i].object_from_camera.matrix() * s.camera_poses[i].matrix();
      EXPECT_LT((from_view - latent).norm(), 1e-9);
    }
  }
}

TEST(MakeTrackerState, AnchorsAtModelCenter) {
  std::mt19937_64 rng(8);
  const RigidTransform world = random_transform(rng);
  const Vec3 center(10, 20, -5);
  TrackerState s = make_tracker_state(rig_with({90}), world, center, SolverConfig{});
  EXPECT_LT((s.world_pose().matrix() - world.matrix()).norm(), 1e-9);
  EXPECT_LT(s.object_from_template.apply(center).norm(), 1e-12);
  EXPECT_LT((s.world_from_object.translation() - world.apply(center)).norm(), 1e-9);
  EXPECT_EQ(s.views.size(), 2u);
  EXPECT_EQ(s.color_models.size(), 2u);
}

TEST(Joint, SingleViewMatchesMonocularPath) {
  const auto mesh = builtin("l_bracket");
  const Rig rig = rig_with({}, 320);
  std::mt19937_64 rng(9);
  for (int frame = 0; frame < 10; ++frame) {
    const Mat3 r = mvtrack::testing::random_rotation(rng);
    const auto seq = static_sequence(mesh, rig, posed(*mesh, r), 1);
    const RgbImage img = seq.render(0, 0);
    const Mat3 dr = axis_angle(mvtrack::testing::random_vec(rng, 1.0).normalized(), deg2rad(1.5));
    TrackerState s = make_tracker_state(rig, posed(*mesh, dr * r), mesh->center(), SolverConfig{});
    const EnergyConfig cfg;
    const ViewObservation obs = observe_view(img, *mesh, s.views[0], s.object_from_template, ColorModel{}, cfg);
    for (int it = 0; it < 5; ++it) {
      NormalEquations acc;
      accumulate_view(obs, s.views[0], s.object_from_template, cfg, acc);
      const Vec6 joint = solve_step(acc, 0.0).vector();
      const Vec6 mono = monocular_step(obs, s.views[0], s.object_from_template, cfg, 0.0).vector();
      EXPECT_LE((joint - mono).cwiseAbs().maxCoeff(), 1e-12);
      apply_increment(s, Twist::from_vector(joint));
    }
  }
}

TEST(Joint, AccumulationIsOrderIndependent) {
  const auto mesh = builtin("box_notch");
  const Rig rig = rig_with({30, 90}, 320);
  std::mt19937_64 rng(10);
  const Mat3 r = mvtrack::testing::random_rotation(rng);
  const auto seq = static_sequence(mesh, rig, posed(*mesh, r), 1);
  TrackerState s = make_tracker_state(rig, posed(*mesh, axis_angle(Vec3::UnitX(), 0.02) * r), mesh->center(),
                                      SolverConfig{});
  const EnergyConfig cfg;
  std::vector<ViewObservation> obs;
  std::vector<RgbImage> images;
  for (std::size_t v = 0; v < rig.size(); ++v) images.push_back(seq.render(0, static_cast<int>(v)));
  for (std::size_t v = 0; v < rig.size(); ++v)
    obs.push_back(observe_view(images[v], *mesh, s.views[v], s.object_from_template, ColorModel{}, cfg));

  NormalEquations forward, backward;
  for (std::size_t v = 0; v < rig.size(); ++v)
    accumulate_view(obs[v], s.views[v], s.object_from_template, cfg, forward);
  for (std::size_t v = rig.size(); v-- > 0;) {
    ViewObservation shuffled = obs[v];
    std::vector<std::size_t> order(shuffled.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    ViewObservation permuted = shuffled;
    for (std::size_t i = 0; i < order.size(); ++i) {
      permuted.samples[i] = shuffled.samples[order[i]];
      permuted.p_fg[i] = shuffled.p_fg[order[i]];
      permuted.p_bg[i] = shuffled.p_bg[order[i]];
      permuted.anchors[i] = shuffled.anchors[order[i]];
    }
    accumulate_view(permuted, s.views[v], s.object_from_template, cfg, backward);
  }
  EXPECT_LT((forward.H - backward.H).norm(), 1e-10 * forward.H.norm());
  EXPECT_LT((forward.g - backward.g).norm(), 1e-10 * std::max(1.0, forward.g.norm()));
  EXPECT_EQ(forward.used, backward.used);
}

TEST(Joint, EmptyObservationThrows) {
  ViewObservation obs;
  CameraView v;
  NormalEquations acc;
  EXPECT_THROW(accumulate_view(obs, v, RigidTransform::identity(), EnergyConfig{}, acc), EmptySampleSet);
}

TEST(TrackFrame, GroundTruthInitializedStaysPut) {
  const Rig rig = rig_with({90});
  std::mt19937_64 rng(11);
  for (const auto& name : meshes::builtin_names()) {
    const auto mesh = builtin(name);
    const RigidTransform gt = posed(*mesh, mvtrack::testing::random_rotation(rng));
    const auto seq = static_sequence(mesh, rig, gt, 1);
    TrackerState s = make_tracker_state(rig, gt, mesh->center(), SolverConfig{});
    TrackerConfig cfg;
    const FrameReport report = track_frame(s, seq.frame_input(0).images, *mesh, cfg);
    EXPECT_FALSE(report.lost);
    EXPECT_LT(center_error(*mesh, s.world_pose(), gt), 0.1) << name;
    EXPECT_LT(rotation_error(s.world_pose().rotation(), gt.rotation()), 0.05) << name;
    ASSERT_FALSE(report.energy_trace.empty());
    EXPECT_LE(report.energy_trace.back(), report.energy_trace.front());
  }
}

TEST(TrackFrame, RecoversDepthOffsetWithOrthogonalView) {
  const Rig rig = rig_with({90});
  std::mt19937_64 rng(12);
  for (const auto& name : meshes::builtin_names()) {
    const auto mesh = builtin(name);
    const RigidTransform gt = posed(*mesh, mvtrack::testing::random_rotation(rng));
    const auto seq = static_sequence(mesh, rig, gt, 1);
    // C-0 looks along world +Z.
    const RigidTransform start = compose(RigidTransform::translation_only(Vec3(0, 0, 5.0)), gt);
    TrackerState s = make_tracker_state(rig, start, mesh->center(), SolverConfig{});
    TrackerConfig cfg;
    cfg.solver.rounds = 5;
    s.rounds = 5;
    track_frame(s, seq.frame_input(0).images, *mesh, cfg);
    EXPECT_LT(center_error(*mesh, s.world_pose(), gt), 0.5) << name;
  }
}

TEST(TrackFrame, ResidualModesBothRecoverDepthOffset) {
  const Rig rig = rig_with({90});
  std::mt19937_64 rng(13);
  const auto mesh = builtin("box_notch");
  const RigidTransform gt = posed(*mesh, mvtrack::testing::random_rotation(rng));
  const auto seq = static_sequence(mesh, rig, gt, 1);
  const RigidTransform start = compose(RigidTransform::translation_only(Vec3(0, 0, 5.0)), gt);
  for (const ResidualMode mode : {ResidualMode::kUnit, ResidualMode::kEnergyWeighted}) {
    TrackerConfig cfg;
    cfg.energy.residual = mode;
    cfg.solver.rounds = 5;
    TrackerState s = make_tracker_state(rig, start, mesh->center(), cfg.solver);
    const FrameReport report = track_frame(s, seq.frame_input(0).images, *mesh, cfg);
    EXPECT_FALSE(report.lost) << to_string(mode);
    EXPECT_LT(center_error(*mesh, s.world_pose(), gt), 0.5) << to_string(mode);
    EXPECT_LE(report.energy_trace.back(), report.energy_trace.front()) << to_string(mode);
  }
}

TEST(TrackFrame, WrongImageCountThrows) {
  const auto mesh = builtin("box_notch");
  const Rig rig = rig_with({90}, 320);
  TrackerState s = make_tracker_state(rig, RigidTransform::identity(), mesh->center(), SolverConfig{});
  EXPECT_THROW(track_frame(s, {RgbImage(320, 240)}, *mesh, TrackerConfig{}), InvalidArgument);
}

TEST(TrackSequence, StaticSceneHasNoDrift) {
  const auto mesh = builtin("torus_knot");
  const Rig rig = rig_with({90}, 320);
  std::mt19937_64 rng(13);
  const RigidTransform gt = posed(*mesh, mvtrack::testing::random_rotation(rng));
  const auto seq = static_sequence(mesh, rig, gt, 1);
  const FrameInput input = seq.frame_input(0);
  TrackerState s = make_tracker_state(rig, gt, mesh->center(), SolverConfig{});
  const TrackingResult r =
      track_sequence(s, *mesh, 0, 100, [&](int) { return input; }, TrackerConfig{});
  ASSERT_EQ(r.world_poses.size(), 100u);
  EXPECT_EQ(r.lost_count(), 0);
  EXPECT_LT(center_error(*mesh, r.world_poses.back(), gt), 0.1);
  EXPECT_LT(rotation_error(r.world_poses.back().rotation(), gt.rotation()), 0.05);
}

TEST(TrackSequence, EngineeredFailureResetsExactlyOnce) {
  const auto mesh = builtin("box_notch");
  const Rig rig = rig_with({90}, 320);
  const RigidTransform a = posed(*mesh, Mat3::Identity());
  const RigidTransform b = compose(RigidTransform::translation_only(Vec3(100, 0, 0)), a);
  const int frames = 8, k = 4;
  std::vector<RigidTransform> gt(frames, a);
  for (int f = k; f < frames; ++f) gt[f] = b;
  MotionSpec motion;
  motion.frames = frames;
  const SyntheticSequence seq(mesh, rig, motion, NoiseSpec{}, gt,
                              std::vector<RigidTransform>(frames, RigidTransform::identity()));
  TrackerState s = make_tracker_state(rig, gt[0], mesh->center(), SolverConfig{});
  const TrackingResult r = track_sequence(s, *mesh, 0, frames, [&](int f) { return seq.frame_input(f); },
                                          TrackerConfig{}, &gt);
  EXPECT_EQ(r.reports.size(), static_cast<std::size_t>(frames));
  EXPECT_EQ(r.world_poses.size(), static_cast<std::size_t>(frames));
  ASSERT_EQ(r.lost_count(), 1);
  EXPECT_EQ(r.reset_frames[0], k);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.rounds = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.iters_per_round = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}
