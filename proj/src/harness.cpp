#include "mvtrack/harness.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <memory>

#include <json.hpp>

#include "mvtrack/errors.hpp"

namespace mvtrack {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json transform_json(const RigidTransform& t) {
  json m = json::array();
  const Mat4 a = t.matrix();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m.push_back(a(i, j));
  return m;
}

RigidTransform transform_from_json(const json& m, const std::string& field) {
  if (!m.is_array() || m.size() != 16) throw IoError(field + ": expected 16 numbers");
  Mat4 a;
  for (int k = 0; k < 16; ++k) {
    if (!m[k].is_number()) throw IoError(field + ": expected 16 numbers");
    a(k / 4, k % 4) = m[k].get<double>();
  }
  return RigidTransform::from_matrix(a);
}

std::vector<int> all_views(const Rig& rig) {
  std::vector<int> v(rig.size());
  for (std::size_t i = 0; i < rig.size(); ++i) v[i] = static_cast<int>(i);
  return v;
}

}  // namespace

Rig SequenceDirectory::rig_at(int frame, const std::vector<int>& views) const {
  Rig out;
  for (int i : views) {
    if (i < 0 || i >= static_cast<int>(rig.size()))
      throw InvalidArgument("view " + std::to_string(i) + " not in the sequence (" + std::to_string(rig.size()) +
                            " views)");
    CameraView v = rig[i];
    if (!rig_motion.empty()) v.object_from_camera = compose(rig_motion.at(frame), v.object_from_camera);
    out.push_back(v);
  }
  return out;
}

SequenceDirectory open_sequence(const fs::path& dir) {
  SequenceDirectory seq;
  seq.dir = dir;
  const fs::path meta_path = dir / "sequence.json";
  json meta;
  try {
    meta = json::parse(read_text_file(meta_path));
  } catch (const json::parse_error& e) {
    throw IoError(meta_path.string() + ": " + e.what());
  }
  if (!meta.contains("mesh") || !meta["mesh"].is_string()) throw IoError(meta_path.string() + ": mesh missing");
  seq.rig = read_rig(dir / "rig.json");
  seq.mesh = load_obj(dir / meta["mesh"].get<std::string>());
  seq.ground_truth = read_trajectory(dir / "gt.poses", [](const std::string& w) { std::cerr << "warning: " << w << '\n'; });
  if (seq.ground_truth.empty()) throw IoError((dir / "gt.poses").string() + ": no poses");
  seq.frames = static_cast<int>(seq.ground_truth.size());
  for (int i = 0; i < seq.frames; ++i) {
    if (seq.ground_truth[i].frame != i)
      throw IoError((dir / "gt.poses").string() + ": frames must be numbered 0.." + std::to_string(seq.frames - 1));
  }
  if (fs::exists(dir / "rig_motion.poses")) {
    seq.rig_motion = poses_of(read_trajectory(dir / "rig_motion.poses"));
    if (static_cast<int>(seq.rig_motion.size()) != seq.frames)
      throw IoError((dir / "rig_motion.poses").string() + ": frame count differs from gt.poses");
  }
  return seq;
}

void cli_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  auto mesh = std::make_shared<const TriangleMesh>(load_mesh(cfg.meshes.front()));
  const Rig rig = make_rig(cfg.rig);
  MotionSpec motion = cfg.motion;
  motion.seed = cfg.seed;
  const SyntheticSequence seq = generate_sequence(mesh, rig, motion, cfg.noise);

  fs::create_directories(out);
  write_rig(rig, out / "rig.json");
  save_obj(*mesh, out / "mesh.obj");
  write_trajectory(seq.ground_truth(), out / "gt.poses");
  if (motion.mode == MotionMode::kCamerasMove) write_trajectory(seq.rig_motion(), out / "rig_motion.poses");
  for (int v = 0; v < static_cast<int>(rig.size()); ++v) {
    std::vector<RigidTransform> cam(seq.frames());
    for (int f = 0; f < seq.frames(); ++f) cam[f] = seq.gt_in_camera(f, v);
    write_trajectory(cam, out / ("gt_view_" + std::to_string(v) + ".poses"));
    for (int f = 0; f < seq.frames(); ++f) write_ppm(seq.render(f, v), frame_image_path(out, v, f));
  }
  const json meta{{"frames", seq.frames()},
                  {"views", rig.size()},
                  {"mesh", "mesh.obj"},
                  {"mesh_source", cfg.meshes.front()},
                  {"seed", cfg.seed},
                  {"motion", to_string(motion.mode)},
                  {"pattern", to_string(cfg.rig.pattern)}};
  write_text_file(out / "sequence.json", meta.dump(2) + "\n");
  save_experiment(cfg, out / "experiment.json");
}

void save_state(const TrackerState& state, int next_frame, const fs::path& path) {
  json models = json::array();
  for (const auto& c : state.color_models) models.push_back({{"bins", c.bins()}, {"fg", c.fg()}, {"bg", c.bg()}});
  const json doc{{"next_frame", next_frame},
                 {"world_from_object", transform_json(state.world_from_object)},
                 {"object_from_template", transform_json(state.object_from_template)},
                 {"lost", state.lost},
                 {"color_models", models}};
  write_text_file(path, doc.dump() + "\n");
}

TrackerState load_state(const fs::path& path, int& next_frame) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
    TrackerState state;
    next_frame = doc.at("next_frame").get<int>();
    state.world_from_object = transform_from_json(doc.at("world_from_object"), path.string() + ": world_from_object");
    state.object_from_template =
        transform_from_json(doc.at("object_from_template"), path.string() + ": object_from_template");
    state.lost = doc.at("lost").get<bool>();
    for (const auto& c : doc.at("color_models")) {
      if (c.at("bins").get<int>() == 0) {
        state.color_models.emplace_back();
      } else {
        state.color_models.emplace_back(c.at("bins").get<int>(), c.at("fg").get<std::vector<double>>(),
                                        c.at("bg").get<std::vector<double>>());
      }
    }
    return state;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed state: " + e.what());
  }
}

TrackingResult cli_track(const ExperimentConfig& cfg, const TrackOptions& options) {
  cfg.tracker.energy.validate();
  cfg.tracker.solver.validate();
  const SequenceDirectory seq = open_sequence(options.sequence);
  std::vector<int> views = options.views.empty() ? cfg.views : options.views;
  if (views.empty()) views = all_views(seq.rig);
  if (options.monocular) views = {0};
  const NativeSequenceAdapter adapter;

  const std::vector<RigidTransform> gt = poses_of(seq.ground_truth);
  const Vec3 center = seq.mesh.center();
  int first = 0;
  TrackerState state;
  if (options.resume_state) {
    state = load_state(*options.resume_state, first);
    if (first < 0 || first >= seq.frames) throw InvalidArgument("resume state points past the sequence end");
    if (state.color_models.size() != views.size())
      throw InvalidArgument("resume state holds " + std::to_string(state.color_models.size()) +
                            " color models for " + std::to_string(views.size()) + " views");
    state.rounds = cfg.tracker.solver.rounds;
    state.iters_per_round = cfg.tracker.solver.iters_per_round;
  } else {
    RigidTransform start = gt.front();
    if (options.initial_pose) {
      const auto init = read_trajectory(*options.initial_pose);
      if (init.empty()) throw IoError(options.initial_pose->string() + ": no poses");
      start = init.front().pose;
    }
    state = make_tracker_state(seq.rig_at(0, views), start, center, cfg.tracker.solver);
  }

  const FrameSource source = [&](int f) {
    FrameInput in;
    in.rig = seq.rig_at(f, views);
    for (int v : views) in.images.push_back(adapter.load_image(seq.dir, v, f));
    return in;
  };
  StateObserver observer;
  if (options.dump_state) {
    observer = [&](int f, const TrackerState& s) {
      if (f == options.dump_after) save_state(s, f + 1, *options.dump_state);
    };
  }
  const auto t0 = std::chrono::steady_clock::now();
  TrackingResult result = track_sequence(state, seq.mesh, first, seq.frames - first, source, cfg.tracker,
                                         options.reset ? &gt : nullptr, cfg.reset, observer);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "tracked " << result.world_poses.size() << " frames in " << seconds << " s ("
            << 1000.0 * seconds / std::max<std::size_t>(1, result.world_poses.size()) << " ms/frame), "
            << result.lost_count() << " resets\n";

  fs::create_directories(options.out);
  write_trajectory(result.world_poses, options.out / "pred.poses", first);
  for (std::size_t k = 0; k < views.size(); ++k) {
    std::vector<RigidTransform> cam;
    for (const auto& frame : result.camera_poses) cam.push_back(frame[k]);
    write_trajectory(cam, options.out / ("pred_view_" + std::to_string(views[k]) + ".poses"), first);
  }
  json frames = json::array();
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    frames.push_back({{"frame", first + static_cast<int>(i)},
                      {"energy", r.energy_trace},
                      {"samples", r.samples_used},
                      {"skipped_border", r.skipped_border},
                      {"skipped_behind", r.skipped_behind},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"lost", r.lost},
                      {"error", r.error}});
  }
  const json doc{{"views", views}, {"first_frame", first}, {"reset_frames", result.reset_frames}, {"frames", frames}};
  write_text_file(options.out / "track_report.json", doc.dump(2) + "\n");
  return result;
}

SequenceReport cli_evaluate(const fs::path& pred, const fs::path& gt, const std::string& mesh_ref,
                            const MetricThresholds& thresholds, const fs::path& out,
                            const std::optional<fs::path>& rig) {
  const auto warn = [](const std::string& w) { std::cerr << "warning: " << w << '\n'; };
  const auto p = read_trajectory(pred, warn);
  if (p.empty()) throw IoError(pred.string() + ": no poses");
  const auto g = read_trajectory(gt, warn);
  if (g.empty()) throw IoError(gt.string() + ": no poses");
  // Predictions may cover a tail of the sequence (resumed runs).
  std::vector<RigidTransform> gt_aligned;
  for (const auto& rec : p) {
    auto it = std::lower_bound(g.begin(), g.end(), rec.frame, [](const PoseRecord& r, int f) { return r.frame < f; });
    if (it == g.end() || it->frame != rec.frame)
      throw LengthMismatch(pred.string() + ": frame " + std::to_string(rec.frame) + " has no ground truth in " +
                           gt.string());
    gt_aligned.push_back(it->pose);
  }
  if (p.front().frame == g.front().frame && p.size() != g.size())
    throw LengthMismatch(pred.string() + ": " + std::to_string(p.size()) + " frames vs " + std::to_string(g.size()) +
                         " in " + gt.string());
  Mat3 reference = Mat3::Identity();
  if (rig) reference = read_rig(*rig).front().camera_from_object().rotation();
  const TriangleMesh mesh = load_mesh(mesh_ref);
  const SequenceReport report = score_sequence(poses_of(p), gt_aligned, mesh, thresholds, reference);
  fs::create_directories(out);
  write_report_csv(report, out / "report.csv");
  write_report_json(report, out / "report.json");
  write_add_curve_svg(report, out / "add_curve.svg");
  return report;
}

SweepConfig sweep_config(const ExperimentConfig& cfg) {
  SweepConfig s;
  s.rig = cfg.rig;
  s.motion = cfg.motion;
  s.motion.seed = cfg.seed;
  s.noise = cfg.noise;
  s.tracker = cfg.tracker;
  s.reset = cfg.reset;
  s.include_mono = cfg.sweep.include_mono;
  return s;
}

ErrorTable cli_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const SweepConfig s = sweep_config(cfg);
  ErrorTable table;
  if (cfg.sweep.kind == SweepKind::kAngle) {
    std::vector<std::shared_ptr<const TriangleMesh>> meshes;
    for (const auto& ref : cfg.meshes) meshes.push_back(std::make_shared<const TriangleMesh>(load_mesh(ref)));
    table = run_angle_sweep(meshes, cfg.sweep.angles_deg, s);
  } else {
    table = run_resolution_sweep(std::make_shared<const TriangleMesh>(load_mesh(cfg.meshes.front())),
                                 cfg.sweep.widths, s);
  }
  const std::string stem = to_string(cfg.sweep.kind) + "_sweep";
  write_error_table_csv(table, out / (stem + ".csv"));
  write_text_file(out / (stem + ".txt"), format_error_table(table));
  return table;
}

}  // namespace mvtrack
