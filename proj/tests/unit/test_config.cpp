#include <gtest/gtest.h>

#include "mvtrack/config.hpp"
#include "mvtrack/errors.hpp"
#include "test_support.hpp"

using namespace mvtrack;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_experiment(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

}  // namespace

TEST(Config, DefaultsValidate) {
  const ExperimentConfig cfg = default_experiment();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.meshes.size(), 4u);
  EXPECT_EQ(cfg.meshes[0].rfind("builtin:", 0), 0u);
  EXPECT_EQ(cfg.tracker.solver.rounds, 1);
  EXPECT_EQ(cfg.tracker.solver.iters_per_round, 7);
  EXPECT_EQ(cfg.sweep.angles_deg, (std::vector<double>{10.0, 30.0, 90.0}));
  EXPECT_EQ(cfg.sweep.widths, (std::vector<int>{320, 640, 1280}));
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg = default_experiment();
  cfg.seed = 1234567890123ull;
  cfg.output = "elsewhere";
  cfg.rig.pattern = RigPattern::kCone;
  cfg.rig.included_angles_deg = {20.0, 45.5};
  cfg.motion.mode = MotionMode::kCamerasMove;
  cfg.motion.frames = 33;
  cfg.noise.sigma = 2.5;
  cfg.noise.foreground = {1, 2, 3};
  cfg.tracker.energy.residual = ResidualMode::kEnergyWeighted;
  cfg.tracker.energy.hist_bins = 16;
  cfg.tracker.solver.rounds = 5;
  cfg.metrics.deg_cm = {{3.0, 1.0}};
  cfg.reset.translation_mm = 25.0;
  cfg.sweep.kind = SweepKind::kResolution;
  cfg.sweep.widths = {160, 320};
  cfg.views = {0, 2};
  const std::string text = to_json_string(cfg);
  const ExperimentConfig back = parse_experiment(text);
  EXPECT_EQ(to_json_string(back), text);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(back.motion.seed, cfg.seed);
  EXPECT_EQ(back.rig.pattern, RigPattern::kCone);
  EXPECT_EQ(back.motion.mode, MotionMode::kCamerasMove);
  EXPECT_EQ(back.tracker.energy.residual, ResidualMode::kEnergyWeighted);
  EXPECT_EQ(back.noise.foreground, (std::array<std::uint8_t, 3>{1, 2, 3}));
  EXPECT_EQ(back.views, (std::vector<int>{0, 2}));
  EXPECT_DOUBLE_EQ(back.metrics.reset_cm, 2.5);
}

TEST(Config, FileRoundTrip) {
  const auto dir = mvtrack::testing::temp_dir("config_file");
  const ExperimentConfig cfg = default_experiment();
  save_experiment(cfg, dir / "c.json");
  EXPECT_EQ(to_json_string(load_experiment(dir / "c.json")), to_json_string(cfg));
  EXPECT_THROW(load_experiment(dir / "missing.json"), Error);
}

TEST(Config, MinimalDocumentUsesDefaults) {
  const ExperimentConfig cfg = parse_experiment(R"({"meshes": ["builtin:box_notch"]})");
  EXPECT_EQ(cfg.meshes, (std::vector<std::string>{"builtin:box_notch"}));
  EXPECT_EQ(cfg.motion.frames, MotionSpec{}.frames);
}

TEST(Config, MissingMeshesNamesField) {
  EXPECT_NE(config_error(R"({"seed": 3})").find("meshes"), std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": []})").find("meshes"), std::string::npos);
}

TEST(Config, UnknownFieldIsRejected) {
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "colour": 1})").find("colour"), std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "motion": {"framez": 1}})").find("motion.framez"),
            std::string::npos);
}

TEST(Config, WrongTypesNameTheField) {
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "motion": {"frames": "ten"}})").find("motion.frames"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "motion": {"frames": 1.5}})").find("motion.frames"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": "a.obj"})").find("meshes"), std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "rig": {"included_angles_deg": [90, "x"]}})")
                .find("rig.included_angles_deg[1]"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "energy": {"residual": "squared"}})").find("energy.residual"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "noise": {"foreground": [1, 2, 300]}})").find("noise.foreground"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "rig": {"pattern": "ring"}})").find("rig.pattern"),
            std::string::npos);
}

TEST(Config, RangeChecksNameTheField) {
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "motion": {"frames": 0}})").find("motion.frames"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "energy": {"hist_bins": 20}})").find("energy"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"meshes": ["a.obj"], "rig": {"included_angles_deg": [180]}})").find("rig"),
            std::string::npos);
  EXPECT_NE(config_error("{not json").find("config"), std::string::npos);
}
