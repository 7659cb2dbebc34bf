#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floorgraph/sampler.hpp"
#include "floorgraph/testkit.hpp"

namespace floorgraph {

enum ExitCode : int { kExitOk = 0, kExitBadInput = 2, kExitInfeasible = 3 };

struct RunConfig {
  ModelParams params;
  std::uint64_t seed = 0;
  long iterations_per_frame = 50000;
  long stall_window = 5000;
  long trace_every = 1000;

  // Throws ConfigError.
  void validate() const;
  RunOptions run_options() const;
};

nlohmann::ordered_json config_to_json(const RunConfig& c);
// Missing keys keep their defaults. Throws ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
// Throws IoError (unreadable), FormatError (not JSON) or ConfigError.
RunConfig load_config(const std::filesystem::path& path);

// Frames listed in a replay manifest; paths are relative to the manifest.
std::vector<Frame> load_manifest(const std::filesystem::path& path);

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string bytes;
};

// Wall-clock seconds go into stats.json only when `wall_seconds` is set.
nlohmann::ordered_json stats_to_json(const RunResult& result, const RunConfig& config,
                                     std::optional<double> wall_seconds = std::nullopt);

// scene.json, plan.svg and stats.json; replay adds frames/frame_NN.svg.
std::vector<OutputFile> analyze_outputs(const RunResult& result, const RunConfig& config,
                                        std::optional<double> wall_seconds = std::nullopt);
std::vector<OutputFile> replay_outputs(const std::vector<Frame>& frames, const RunResult& result,
                                       const RunConfig& config, std::optional<double> wall_seconds = std::nullopt);

// Nothing is written unless every file can be produced; each file is atomic.
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

World load_scene(const std::filesystem::path& path);

struct SynthOptions {
  WorldSpec spec;
  int count = 20;
  std::uint64_t seed = 0;
  bool noise = false;
  int replay_frames = 0;  // > 0 also writes an exploration and its manifest
};

// instance_NNN/{truth.json, map.pgm, meta.json} with instance i using seed + i.
std::vector<OutputFile> synth_outputs(const SynthOptions& options, const ModelParams& params);

// Single pair, or two directories matched by instance name (estimate
// instance_NNN/scene.json against truth instance_NNN/truth.json).
nlohmann::ordered_json eval_paths(const std::filesystem::path& estimate, const std::filesystem::path& truth);

// Parses "a..b" or "a".
std::pair<int, int> parse_range(const std::string& text);

}  // namespace floorgraph
