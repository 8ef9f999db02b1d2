#include "mvtrack/config.hpp"

#include <set>

#include <json.hpp>

#include "mvtrack/errors.hpp"
#include "mvtrack/io.hpp"

namespace mvtrack {
using nlohmann::json;

namespace {

// Typed access to one JSON object; remembers which keys were read so the
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(name_or_root() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!j_[key].is_number()) throw ConfigError(field(key) + ": expected a number");
    out = j_[key].get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    if (!j_[key].is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
    out = j_[key].get<int>();
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    if (!j_[key].is_number_unsigned()) throw ConfigError(field(key) + ": expected a non-negative integer");
    out = j_[key].get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!j_[key].is_boolean()) throw ConfigError(field(key) + ": expected true or false");
    out = j_[key].get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!j_[key].is_string()) throw ConfigError(field(key) + ": expected a string");
    out = j_[key].get<std::string>();
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& out) {
    if (!has(key)) return;
    const json& a = j_[key];
    if (!a.is_array()) throw ConfigError(field(key) + ": expected an array");
    std::vector<T> values;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string item = field(key) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_same_v<T, std::string>) {
        if (!a[i].is_string()) throw ConfigError(item + ": expected a string");
      } else if constexpr (std::is_integral_v<T>) {
        if (!a[i].is_number_integer()) throw ConfigError(item + ": expected an integer");
      } else {
        if (!a[i].is_number()) throw ConfigError(item + ": expected a number");
      }
      values.push_back(a[i].get<T>());
    }
    out = std::move(values);
  }

  void color(const std::string& key, std::array<std::uint8_t, 3>& out) {
    std::vector<int> v;
    list(key, v);
    if (!has(key)) return;
    if (v.size() != 3) throw ConfigError(field(key) + ": expected 3 integers");
    for (int c = 0; c < 3; ++c) {
      if (v[c] < 0 || v[c] > 255) throw ConfigError(field(key) + ": channel outside 0..255");
      out[c] = static_cast<std::uint8_t>(v[c]);
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_[key], field(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
    }
  }

 private:
  std::string name_or_root() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_child(Section& parent, const std::string& key, Fn&& fn) {
  if (!parent.has(key)) return;
  Section s = parent.child(key);
  fn(s);
  s.finish();
}

json intrinsics_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

ResidualMode residual_from_string(const std::string& s, const std::string& field) {
  if (s == "unit") return ResidualMode::kUnit;
  if (s == "energy_weighted") return ResidualMode::kEnergyWeighted;
  throw ConfigError(field + ": expected unit or energy_weighted, got '" + s + "'");
}

SweepKind sweep_kind_from_string(const std::string& s, const std::string& field) {
  if (s == "angle") return SweepKind::kAngle;
  if (s == "resolution") return SweepKind::kResolution;
  throw ConfigError(field + ": expected angle or resolution, got '" + s + "'");
}

template <typename Fn>
void as_config_error(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace

std::string to_string(SweepKind k) { return k == SweepKind::kAngle ? "angle" : "resolution"; }
std::string to_string(ResidualMode m) { return m == ResidualMode::kUnit ? "unit" : "energy_weighted"; }

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  for (const auto& name : meshes::builtin_names()) cfg.meshes.push_back("builtin:" + name);
  cfg.rig.included_angles_deg = {90.0};
  return cfg;
}

void ExperimentConfig::validate() const {
  if (meshes.empty()) throw ConfigError("meshes: at least one mesh is required");
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    if (meshes[i].empty()) throw ConfigError("meshes[" + std::to_string(i) + "]: empty mesh reference");
  }
  if (output.empty()) throw ConfigError("output: empty path");
  as_config_error("rig.intrinsics", [&] { rig.intrinsics.validate(); });
  if (!(rig.standoff_mm > 0.0)) throw ConfigError("rig.standoff_mm: must be positive");
  for (double a : rig.included_angles_deg) {
    if (!(a > 0.0 && a < 180.0)) throw ConfigError("rig.included_angles_deg: angles must lie in (0, 180)");
  }
  if (motion.frames < 1) throw ConfigError("motion.frames: must be >= 1");
  if (motion.waypoint_spacing < 1) throw ConfigError("motion.waypoint_spacing: must be >= 1");
  if (motion.translation_mm_per_frame < 0.0) throw ConfigError("motion.translation_mm_per_frame: must be >= 0");
  if (motion.rotation_deg_per_frame < 0.0) throw ConfigError("motion.rotation_deg_per_frame: must be >= 0");
  if (noise.sigma < 0.0) throw ConfigError("noise.sigma: must be >= 0");
  if (noise.supersample < 1) throw ConfigError("noise.supersample: must be >= 1");
  as_config_error("energy", [&] { tracker.energy.validate(); });
  as_config_error("solver", [&] { tracker.solver.validate(); });
  if (!(reset.rotation_deg > 0.0)) throw ConfigError("reset.rotation_deg: must be positive");
  if (!(reset.translation_mm > 0.0)) throw ConfigError("reset.translation_mm: must be positive");
  if (metrics.auc_steps < 1) throw ConfigError("metrics.auc_steps: must be >= 1");
  if (sweep.kind == SweepKind::kAngle && sweep.angles_deg.empty())
    throw ConfigError("sweep.angles_deg: at least one angle is required");
  if (sweep.kind == SweepKind::kResolution && sweep.widths.empty())
    throw ConfigError("sweep.widths: at least one width is required");
  for (int w : sweep.widths) {
    if (w < 16) throw ConfigError("sweep.widths: widths must be >= 16");
  }
  for (int v : views) {
    if (v < 0) throw ConfigError("views: indices must be non-negative");
  }
}

std::string to_json_string(const ExperimentConfig& cfg) {
  const auto& e = cfg.tracker.energy;
  const auto& s = cfg.tracker.solver;
  json deg_cm = json::array();
  for (const auto& [d, c] : cfg.metrics.deg_cm) deg_cm.push_back({d, c});
  json j{
      {"meshes", cfg.meshes},
      {"seed", cfg.seed},
      {"output", cfg.output},
      {"rig",
       {{"pattern", to_string(cfg.rig.pattern)},
        {"included_angles_deg", cfg.rig.included_angles_deg},
        {"standoff_mm", cfg.rig.standoff_mm},
        {"elevation_deg", cfg.rig.elevation_deg},
        {"intrinsics", intrinsics_json(cfg.rig.intrinsics)}}},
      {"motion",
       {{"mode", to_string(cfg.motion.mode)},
        {"frames", cfg.motion.frames},
        {"translation_mm_per_frame", cfg.motion.translation_mm_per_frame},
        {"rotation_deg_per_frame", cfg.motion.rotation_deg_per_frame},
        {"waypoint_spacing", cfg.motion.waypoint_spacing}}},
      {"noise",
       {{"sigma", cfg.noise.sigma},
        {"supersample", cfg.noise.supersample},
        {"foreground", cfg.noise.foreground},
        {"background", cfg.noise.background}}},
      {"energy",
       {{"heaviside_slope", e.heaviside_slope},
        {"band_halfwidth", e.band_halfwidth},
        {"hist_bins", e.hist_bins},
        {"alpha_fg", e.alpha_fg},
        {"alpha_bg", e.alpha_bg},
        {"probability_floor", e.probability_floor},
        {"stride", e.stride},
        {"residual", to_string(e.residual)}}},
      {"solver",
       {{"rounds", s.rounds},
        {"iters_per_round", s.iters_per_round},
        {"lambda_max", s.lambda_max},
        {"lambda_min", s.lambda_min},
        {"max_rejections", s.max_rejections},
        {"divergence_rounds", s.divergence_rounds},
        {"step_tolerance", s.step_tolerance}}},
      {"metrics",
       {{"deg_cm", deg_cm},
        {"deg", cfg.metrics.deg},
        {"cm", cfg.metrics.cm},
        {"add_fractions", cfg.metrics.add_fractions},
        {"auc_max_fraction", cfg.metrics.auc_max_fraction},
        {"auc_steps", cfg.metrics.auc_steps}}},
      {"reset", {{"rotation_deg", cfg.reset.rotation_deg}, {"translation_mm", cfg.reset.translation_mm}}},
      {"sweep",
       {{"kind", to_string(cfg.sweep.kind)},
        {"angles_deg", cfg.sweep.angles_deg},
        {"widths", cfg.sweep.widths},
        {"include_mono", cfg.sweep.include_mono}}},
      {"views", cfg.views},
  };
  return j.dump(2) + "\n";
}

ExperimentConfig parse_experiment(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  Section root(doc, "");
  if (!root.has("meshes")) throw ConfigError("meshes: required field missing");
  root.list("meshes", cfg.meshes);
  root.unsigned64("seed", cfg.seed);
  root.string("output", cfg.output);

  with_child(root, "rig", [&](Section& s) {
    std::string pattern = to_string(cfg.rig.pattern);
    s.string("pattern", pattern);
    as_config_error(s.field("pattern"), [&] { cfg.rig.pattern = rig_pattern_from_string(pattern); });
    s.list("included_angles_deg", cfg.rig.included_angles_deg);
    s.number("standoff_mm", cfg.rig.standoff_mm);
    s.number("elevation_deg", cfg.rig.elevation_deg);
    with_child(s, "intrinsics", [&](Section& k) {
      k.number("fx", cfg.rig.intrinsics.fx);
      k.number("fy", cfg.rig.intrinsics.fy);
      k.number("cx", cfg.rig.intrinsics.cx);
      k.number("cy", cfg.rig.intrinsics.cy);
      k.integer("width", cfg.rig.intrinsics.width);
      k.integer("height", cfg.rig.intrinsics.height);
    });
  });
  with_child(root, "motion", [&](Section& s) {
    std::string mode = to_string(cfg.motion.mode);
    s.string("mode", mode);
    as_config_error(s.field("mode"), [&] { cfg.motion.mode = motion_mode_from_string(mode); });
    s.integer("frames", cfg.motion.frames);
    s.number("translation_mm_per_frame", cfg.motion.translation_mm_per_frame);
    s.number("rotation_deg_per_frame", cfg.motion.rotation_deg_per_frame);
    s.integer("waypoint_spacing", cfg.motion.waypoint_spacing);
  });
  with_child(root, "noise", [&](Section& s) {
    s.number("sigma", cfg.noise.sigma);
    s.integer("supersample", cfg.noise.supersample);
    s.color("foreground", cfg.noise.foreground);
    s.color("background", cfg.noise.background);
  });
  with_child(root, "energy", [&](Section& s) {
    auto& e = cfg.tracker.energy;
    s.number("heaviside_slope", e.heaviside_slope);
    s.number("band_halfwidth", e.band_halfwidth);
    s.integer("hist_bins", e.hist_bins);
    s.number("alpha_fg", e.alpha_fg);
    s.number("alpha_bg", e.alpha_bg);
    s.number("probability_floor", e.probability_floor);
    s.integer("stride", e.stride);
    std::string residual = to_string(e.residual);
    s.string("residual", residual);
    e.residual = residual_from_string(residual, s.field("residual"));
  });
  with_child(root, "solver", [&](Section& s) {
    auto& v = cfg.tracker.solver;
    s.integer("rounds", v.rounds);
    s.integer("iters_per_round", v.iters_per_round);
    s.number("lambda_max", v.lambda_max);
    s.number("lambda_min", v.lambda_min);
    s.integer("max_rejections", v.max_rejections);
    s.integer("divergence_rounds", v.divergence_rounds);
    s.number("step_tolerance", v.step_tolerance);
  });
  with_child(root, "metrics", [&](Section& s) {
    std::vector<std::vector<double>> pairs;
    if (s.has("deg_cm")) {
      const json& a = doc["metrics"]["deg_cm"];
      if (!a.is_array()) throw ConfigError(s.field("deg_cm") + ": expected an array of [deg, cm] pairs");
      cfg.metrics.deg_cm.clear();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_array() || a[i].size() != 2 || !a[i][0].is_number() || !a[i][1].is_number())
          throw ConfigError(s.field("deg_cm") + "[" + std::to_string(i) + "]: expected [deg, cm]");
        cfg.metrics.deg_cm.emplace_back(a[i][0].get<double>(), a[i][1].get<double>());
      }
    }
    s.list("deg", cfg.metrics.deg);
    s.list("cm", cfg.metrics.cm);
    s.list("add_fractions", cfg.metrics.add_fractions);
    s.number("auc_max_fraction", cfg.metrics.auc_max_fraction);
    s.integer("auc_steps", cfg.metrics.auc_steps);
  });
  with_child(root, "reset", [&](Section& s) {
    s.number("rotation_deg", cfg.reset.rotation_deg);
    s.number("translation_mm", cfg.reset.translation_mm);
  });
  with_child(root, "sweep", [&](Section& s) {
    std::string kind = to_string(cfg.sweep.kind);
    s.string("kind", kind);
    cfg.sweep.kind = sweep_kind_from_string(kind, s.field("kind"));
    s.list("angles_deg", cfg.sweep.angles_deg);
    s.list("widths", cfg.sweep.widths);
    s.boolean("include_mono", cfg.sweep.include_mono);
  });
  root.list("views", cfg.views);
  root.finish();

  cfg.metrics.reset_deg = cfg.reset.rotation_deg;
  cfg.metrics.reset_cm = cfg.reset.translation_mm / 10.0;
  cfg.motion.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_experiment(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_experiment(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  write_text_file(path, to_json_string(cfg));
}

}  // namespace mvtrack
