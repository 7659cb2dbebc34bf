#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "floorgraph/app.hpp"
#include "floorgraph/io.hpp"
#include "floorgraph/svg.hpp"

using namespace floorgraph;
namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> iterations;
  std::string out;
  bool timing = false;
};

void add_run_args(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "Run configuration JSON (defaults when omitted)");
  cmd->add_option("--seed", a.seed, "Overrides the configured seed");
  cmd->add_option("--iterations", a.iterations, "Overrides the per-frame iteration budget");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_flag("--timing", a.timing, "Record wall-clock time in stats.json");
}

RunConfig resolve_config(const RunArgs& a) {
  RunConfig c = a.config.empty() ? RunConfig{} : load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.iterations) c.iterations_per_frame = *a.iterations;
  c.validate();
  return c;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "floorgraph: infeasible configuration: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const GenerationError& e) {
    std::cerr << "floorgraph: infeasible world spec: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "floorgraph: " << e.what() << "\n";
    return kExitBadInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floor plans and scene graphs from occupancy grid maps"};
  app.require_subcommand(1);

  RunArgs analyze_args;
  std::string map_path, meta_path;
  CLI::App* analyze = app.add_subcommand("analyze", "Analyze a single map");
  analyze->add_option("--map", map_path, "PGM occupancy map")->required();
  analyze->add_option("--meta", meta_path, "Map metadata (JSON or YAML)");
  add_run_args(analyze, analyze_args);

  RunArgs replay_args;
  std::string manifest_path;
  CLI::App* replay = app.add_subcommand("replay", "Process a stream of map updates");
  replay->add_option("--manifest", manifest_path, "Replay manifest JSON")->required();
  add_run_args(replay, replay_args);

  SynthOptions synth_opts;
  std::string rooms = "2..6", size = "64..256", synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic ground-truth dataset");
  synth->add_option("--rooms", rooms, "Room count range a..b");
  synth->add_option("--size", size, "Grid side range a..b in cells");
  synth->add_option("--count", synth_opts.count, "Number of instances");
  synth->add_option("--seed", synth_opts.seed, "Seed of the first instance");
  synth->add_flag("--noise", synth_opts.noise, "Sample observations from the likelihood table");
  synth->add_option("--replay-frames", synth_opts.replay_frames, "Also write an exploration with this many frames");
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string estimate_path, truth_path, eval_out;
  CLI::App* eval = app.add_subcommand("eval", "Compare an estimate with ground truth");
  eval->add_option("--estimate", estimate_path, "Scene JSON or analyze output tree")->required();
  eval->add_option("--truth", truth_path, "Truth scene JSON or synth dataset")->required();
  eval->add_option("--out", eval_out, "Metrics JSON (stdout when omitted)");

  std::string scene_path, render_map, render_meta, render_out;
  CLI::App* render = app.add_subcommand("render", "Draw a scene graph as SVG");
  render->add_option("--scene", scene_path, "Scene JSON")->required();
  render->add_option("--map", render_map, "Optional PGM underlay");
  render->add_option("--meta", render_meta, "Underlay metadata");
  render->add_option("--out", render_out, "SVG file")->required();

  bool init = false;
  CLI::App* config = app.add_subcommand("config", "Configuration helpers");
  config->add_flag("--init", init, "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  if (*analyze) {
    return guarded([&] {
      const RunConfig cfg = resolve_config(analyze_args);
      const OccupancyGrid grid = meta_path.empty() ? read_pgm(map_path) : load_map(map_path, meta_path);
      const auto t0 = std::chrono::steady_clock::now();
      const RunResult result = run({Frame{grid, std::nullopt}}, cfg.run_options());
      std::optional<double> wall;
      if (analyze_args.timing) wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_outputs(analyze_args.out, analyze_outputs(result, cfg, wall));
      std::printf("%zu rooms, %zu doors, log-posterior %.6f\n", result.best.rooms.size(), result.best.doors.size(),
                  result.best_score.total);
    });
  }
  if (*replay) {
    return guarded([&] {
      const RunConfig cfg = resolve_config(replay_args);
      const std::vector<Frame> frames = load_manifest(manifest_path);
      const auto t0 = std::chrono::steady_clock::now();
      const RunResult result = run(frames, cfg.run_options());
      std::optional<double> wall;
      if (replay_args.timing) wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_outputs(replay_args.out, replay_outputs(frames, result, cfg, wall));
      std::printf("%zu frames, %zu rooms, %zu doors, log-posterior %.6f\n", frames.size(), result.best.rooms.size(),
                  result.best.doors.size(), result.best_score.total);
    });
  }
  if (*synth) {
    return guarded([&] {
      std::tie(synth_opts.spec.rooms_min, synth_opts.spec.rooms_max) = parse_range(rooms);
      std::tie(synth_opts.spec.size_min, synth_opts.spec.size_max) = parse_range(size);
      if (synth_opts.count < 1) throw ConfigError("--count must be >= 1");
      if (synth_opts.replay_frames < 0) throw ConfigError("--replay-frames must be >= 0");
      write_outputs(synth_out, synth_outputs(synth_opts, ModelParams{}));
    });
  }
  if (*eval) {
    return guarded([&] {
      const std::string text = eval_paths(estimate_path, truth_path).dump(2) + "\n";
      if (eval_out.empty()) {
        std::cout << text;
      } else {
        write_file_atomic(eval_out, text);
      }
    });
  }
  if (*render) {
    return guarded([&] {
      const World world = load_scene(scene_path);
      const ModelParams params;
      std::optional<RotatedGrid> underlay;
      if (!render_map.empty()) {
        const OccupancyGrid grid = render_meta.empty() ? read_pgm(render_map) : load_map(render_map, render_meta);
        underlay = rotate_to_working_frame(classify(grid, params.thresholds), world.orientation_deg);
      }
      write_file_atomic(render_out, render_svg(world, params.geometry, underlay ? &underlay->grid : nullptr));
    });
  }
  if (*config) {
    return guarded([&] {
      if (!init) throw ConfigError("config: nothing to do (use --init)");
      std::cout << config_to_json(RunConfig{}).dump(2) << "\n";
    });
  }
  return kExitOk;
}
