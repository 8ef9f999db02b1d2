// mvtrack command line: simulate | track | evaluate | sweep.
//
// Flags fall back to MVTRACK_<FLAG> environment variables (e.g.
// MVTRACK_SEED, MVTRACK_ROUNDS), which in turn override the config file.
// Exit codes: 0 success, 1 configuration or input error, 2 tracking failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvtrack/config.hpp"
#include "mvtrack/errors.hpp"
#include "mvtrack/harness.hpp"

namespace {

using namespace mvtrack;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<int> views;
  std::optional<int> rounds;
  std::optional<int> iters;
  std::optional<double> band;
  std::optional<int> stride;
  std::optional<std::string> pattern;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment JSON")->envname("MVTRACK_CONFIG");
  cmd->add_option("--seed", f.seed, "trajectory and noise seed")->envname("MVTRACK_SEED");
  cmd->add_option("--views", f.views, "comma-separated view indices")->delimiter(',')->envname("MVTRACK_VIEWS");
  cmd->add_option("--rounds", f.rounds, "render rounds per frame")->envname("MVTRACK_ROUNDS");
  cmd->add_option("--iters", f.iters, "Gauss-Newton iterations per round")->envname("MVTRACK_ITERS");
  cmd->add_option("--band", f.band, "contour band half-width (px at 640 wide)")->envname("MVTRACK_BAND");
  cmd->add_option("--stride", f.stride, "band sampling stride")->envname("MVTRACK_STRIDE");
  cmd->add_option("--pattern", f.pattern, "rig pattern: plane or cone")->envname("MVTRACK_PATTERN");
  cmd->add_option("--out", f.out, "output directory")->envname("MVTRACK_OUT");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? default_experiment() : load_experiment(f.config);
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.motion.seed = *f.seed;
  }
  if (!f.views.empty()) cfg.views = f.views;
  if (f.rounds) cfg.tracker.solver.rounds = *f.rounds;
  if (f.iters) cfg.tracker.solver.iters_per_round = *f.iters;
  if (f.band) cfg.tracker.energy.band_halfwidth = *f.band;
  if (f.stride) cfg.tracker.energy.stride = *f.stride;
  if (f.pattern) {
    try {
      cfg.rig.pattern = rig_pattern_from_string(*f.pattern);
    } catch (const Error& e) {
      throw ConfigError(std::string("--pattern: ") + e.what());
    }
  }
  if (!f.out.empty()) cfg.output = f.out;
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view region-based object pose tracker"};
  app.require_subcommand(1);

  CommonFlags sim_flags, track_flags, eval_flags, sweep_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "render a synthetic multi-view sequence");
  add_common(simulate, sim_flags);

  CLI::App* track = app.add_subcommand("track", "track a sequence directory");
  add_common(track, track_flags);
  TrackOptions topt;
  std::string sequence, init, resume, dump;
  track->add_option("--sequence", sequence, "sequence directory")->required();
  track->add_flag("--mono", topt.monocular, "track view 0 only");
  bool no_reset = false;
  track->add_flag("--no-reset", no_reset, "disable the ground-truth reset rule");
  track->add_option("--init", init, "trajectory file whose first pose starts tracking");
  track->add_option("--resume", resume, "state file written by --dump-state");
  track->add_option("--dump-state", dump, "write the tracker state after --dump-after");
  track->add_option("--dump-after", topt.dump_after, "frame after which the state is dumped");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a predicted trajectory");
  add_common(evaluate, eval_flags);
  std::string pred, gt, mesh, rig;
  evaluate->add_option("--pred", pred, "predicted trajectory")->required();
  evaluate->add_option("--gt", gt, "ground-truth trajectory")->required();
  evaluate->add_option("--mesh", mesh, "OBJ path or builtin:<name>")->required();
  evaluate->add_option("--rig", rig, "rig.json; per-axis errors use its C-0");

  CLI::App* sweep = app.add_subcommand("sweep", "run an included-angle or resolution sweep");
  add_common(sweep, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) {
      const ExperimentConfig cfg = resolve(sim_flags);
      cli_simulate(cfg, cfg.output);
      std::cout << "wrote " << cfg.output << '\n';
    } else if (track->parsed()) {
      const ExperimentConfig cfg = resolve(track_flags);
      topt.sequence = sequence;
      topt.out = cfg.output;
      topt.views = cfg.views;
      topt.reset = !no_reset;
      if (!init.empty()) topt.initial_pose = init;
      if (!resume.empty()) topt.resume_state = resume;
      if (!dump.empty()) topt.dump_state = dump;
      const TrackingResult result = cli_track(cfg, topt);
      for (const auto& r : result.reports) {
        if (r.lost) {
          std::cerr << "tracking failed: " << r.error << '\n';
          return 2;
        }
      }
      std::cout << "wrote " << cfg.output << '\n';
    } else if (evaluate->parsed()) {
      const ExperimentConfig cfg = resolve(eval_flags);
      const std::optional<std::filesystem::path> rig_path =
          rig.empty() ? std::nullopt : std::optional<std::filesystem::path>(rig);
      const SequenceReport report = cli_evaluate(pred, gt, mesh, cfg.metrics, cfg.output, rig_path);
      for (const auto& r : report.rates) std::cout << r.name << ' ' << r.percent << '\n';
      std::cout << "AUC " << report.auc << '\n';
    } else if (sweep->parsed()) {
      const ExperimentConfig cfg = resolve(sweep_flags);
      const ErrorTable table = cli_sweep(cfg, cfg.output);
      std::cout << format_error_table(table);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const LengthMismatch& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "tracking failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
