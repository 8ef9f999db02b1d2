#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvtrack/metrics.hpp"
#include "mvtrack/simulator.hpp"
#include "mvtrack/solver.hpp"

namespace mvtrack {

enum class SweepKind { kAngle, kResolution };

struct SweepSpec {
  SweepKind kind = SweepKind::kAngle;
  std::vector<double> angles_deg = {10.0, 30.0, 90.0};
  std::vector<int> widths = {320, 640, 1280};
  bool include_mono = true;
};

/// Everything one CLI invocation needs. Serialized as JSON; unknown keys and
/// wrong types are rejected with the dotted field name.
struct ExperimentConfig {
  /// "builtin:<name>" or OBJ paths. The first entry is used by simulate.
  std::vector<std::string> meshes;
  std::uint64_t seed = 1;
  std::string output = "out";
  RigSpec rig;
  MotionSpec motion;
  NoiseSpec noise;
  TrackerConfig tracker;
  MetricThresholds metrics;
  ResetRule reset;
  SweepSpec sweep;
  /// Views used by track (empty: all views of the sequence).
  std::vector<int> views;

  void validate() const;
};

/// Sweep defaults: the four built-in meshes, plane rig with one camera per
/// swept angle.
ExperimentConfig default_experiment();

std::string to_json_string(const ExperimentConfig& cfg);
/// Throws ConfigError naming the field (e.g. "motion.frames").
ExperimentConfig parse_experiment(const std::string& text);
ExperimentConfig load_experiment(const std::filesystem::path& path);
void save_experiment(const ExperimentConfig& cfg, const std::filesystem::path& path);

std::string to_string(SweepKind k);
std::string to_string(ResidualMode m);

}  // namespace mvtrack
