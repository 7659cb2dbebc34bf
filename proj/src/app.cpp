#include "floorgraph/app.hpp"

#include <algorithm>
#include <cstdio>

#include "floorgraph/io.hpp"
#include "floorgraph/svg.hpp"

namespace floorgraph {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void RunConfig::validate() const {
  params.validate();
  if (iterations_per_frame < 1) throw ConfigError("iterations_per_frame must be >= 1");
  if (stall_window < 0) throw ConfigError("stall_window must be >= 0");
  if (trace_every < 0) throw ConfigError("trace_every must be >= 0");
}

RunOptions RunConfig::run_options() const {
  RunOptions o;
  o.params = params;
  o.seed = seed;
  o.iterations_per_frame = iterations_per_frame;
  o.stall_window = stall_window;
  o.trace_every = trace_every;
  return o;
}

ojson config_to_json(const RunConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["iterations_per_frame"] = c.iterations_per_frame;
  j["stall_window"] = c.stall_window;
  j["trace_every"] = c.trace_every;
  j["model"] = params_to_json(c.params);
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.iterations_per_frame = j.value("iterations_per_frame", c.iterations_per_frame);
    c.stall_window = j.value("stall_window", c.stall_window);
    c.trace_every = j.value("trace_every", c.trace_every);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (j.contains("model")) c.params = params_from_json(j.at("model"));
  c.validate();
  return c;
}

namespace {

nlohmann::json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

RunConfig load_config(const fs::path& path) { return config_from_json(parse_json_file(path)); }

std::vector<Frame> load_manifest(const fs::path& path) {
  const nlohmann::json doc = parse_json_file(path);
  const fs::path base = path.parent_path();
  std::vector<Frame> frames;
  try {
    const auto& list = doc.at("frames");
    if (!list.is_array() || list.empty()) throw FormatError("manifest: frames must be a non-empty array");
    for (const auto& f : list) {
      const fs::path map = base / f.at("map").get<std::string>();
      Frame frame;
      frame.grid = f.contains("meta") ? load_map(map, base / f.at("meta").get<std::string>()) : read_pgm(map);
      if (f.contains("pose") && !f.at("pose").is_null()) {
        const auto& p = f.at("pose");
        if (!p.is_array() || p.size() != 2) throw FormatError("manifest: pose must be [x, y]");
        frame.pose = Point{p[0].get<double>(), p[1].get<double>()};
      }
      frames.push_back(std::move(frame));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return frames;
}

namespace {

ojson kernel_table_json(const KernelStatsTable& t) {
  ojson j;
  for (KernelKind k : kAllKernels) {
    const KernelStats& s = t[kernel_index(k)];
    j[to_string(k)] = {{"proposed", s.proposed}, {"invalid", s.invalid}, {"accepted", s.accepted}};
  }
  return j;
}

ojson score_json(const Score& s) {
  return {{"total", s.total}, {"log_prior", s.log_prior}, {"log_likelihood", s.log_likelihood}};
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::string scene_bytes(const World& w, const ModelParams& p) {
  return dump(export_scene_graph(build_scene_graph(w, p.geometry)));
}

RotatedGrid working_grid(const Frame& frame, double angle, const ModelParams& p) {
  return rotate_to_working_frame(classify(frame.grid, p.thresholds), angle);
}

}  // namespace

ojson stats_to_json(const RunResult& result, const RunConfig& config, std::optional<double> wall_seconds) {
  ojson j;
  j["seed"] = config.seed;
  j["iterations_per_frame"] = config.iterations_per_frame;
  j["stall_window"] = config.stall_window;
  j["best_score"] = score_json(result.best_score);
  j["rooms"] = result.best.rooms.size();
  j["doors"] = result.best.doors.size();
  j["kernels"] = kernel_table_json(result.stats);
  ojson frames = ojson::array();
  for (const FrameReport& f : result.frames) {
    ojson fr;
    fr["frame"] = f.index;
    fr["orientation_deg"] = f.orientation_deg;
    fr["iterations"] = f.iterations;
    fr["stalled"] = f.stalled;
    fr["chain_reset"] = f.chain_reset;
    fr["adds_near_pose"] = f.adds_near_pose;
    fr["best_score"] = f.best_score.total;
    fr["rooms"] = f.best.rooms.size();
    fr["doors"] = f.best.doors.size();
    fr["kernels"] = kernel_table_json(f.stats);
    frames.push_back(std::move(fr));
  }
  j["frames"] = frames;
  ojson trace = ojson::array();
  for (const TracePoint& t : result.trace) trace.push_back({t.frame, t.iteration, t.current, t.best});
  j["trace"] = {{"columns", {"frame", "iteration", "current", "best"}}, {"points", trace}};
  if (wall_seconds) j["wall_clock_s"] = *wall_seconds;
  return j;
}

std::vector<OutputFile> analyze_outputs(const RunResult& result, const RunConfig& config,
                                        std::optional<double> wall_seconds) {
  const ModelParams& p = config.params;
  std::optional<Point> pose;
  if (!result.frames.empty()) pose = result.frames.back().pose;
  return {{"scene.json", scene_bytes(result.best, p)},
          {"plan.svg", render_svg(result.best, p.geometry, &result.working.grid, pose)},
          {"stats.json", dump(stats_to_json(result, config, wall_seconds))}};
}

std::vector<OutputFile> replay_outputs(const std::vector<Frame>& frames, const RunResult& result,
                                       const RunConfig& config, std::optional<double> wall_seconds) {
  std::vector<OutputFile> out = analyze_outputs(result, config, wall_seconds);
  const ModelParams& p = config.params;
  for (const FrameReport& f : result.frames) {
    const RotatedGrid g = working_grid(frames[static_cast<std::size_t>(f.index)], f.orientation_deg, p);
    char name[64];
    std::snprintf(name, sizeof name, "frames/frame_%02d.svg", f.index);
    out.push_back({name, render_svg(f.best, p.geometry, &g.grid, f.pose)});
  }
  return out;
}

void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  for (const OutputFile& f : files) {
    fs::create_directories((dir / f.name).parent_path(), ec);
    if (ec) throw IoError("cannot create " + (dir / f.name).parent_path().string() + ": " + ec.message());
  }
  for (const OutputFile& f : files) write_file_atomic(dir / f.name, f.bytes);
}

World load_scene(const fs::path& path) { return world_from_graph(import_scene_graph(parse_json_file(path))); }

std::vector<OutputFile> synth_outputs(const SynthOptions& o, const ModelParams& params) {
  std::vector<OutputFile> out;
  ojson index;
  index["seed"] = o.seed;
  index["noise"] = o.noise;
  index["rooms"] = {o.spec.rooms_min, o.spec.rooms_max};
  index["size"] = {o.spec.size_min, o.spec.size_max};
  ojson instances = ojson::array();
  for (int i = 0; i < o.count; ++i) {
    char dir[32];
    std::snprintf(dir, sizeof dir, "instance_%03d/", i);
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(i);
    const std::string d = dir;
    instances.push_back({{"name", d.substr(0, d.size() - 1)}, {"seed", seed}});
    if (o.replay_frames > 0) {
      const Exploration ex = make_exploration(seed, o.spec, params, o.noise, o.replay_frames);
      out.push_back({d + "truth.json", scene_bytes(ex.ground_truth.truth.world, params)});
      out.push_back({d + "map.pgm", encode_pgm(ex.ground_truth.grid)});
      out.push_back({d + "meta.json", encode_map_meta(ex.ground_truth.grid, "map.pgm")});
      ojson manifest;
      ojson list = ojson::array();
      for (std::size_t f = 0; f < ex.frames.size(); ++f) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "frames/f%02zu", f);
        const std::string s = stem;
        out.push_back({d + s + ".pgm", encode_pgm(ex.frames[f].grid)});
        out.push_back({d + s + ".json", encode_map_meta(ex.frames[f].grid, s.substr(7) + ".pgm")});
        list.push_back({{"map", s + ".pgm"}, {"meta", s + ".json"}, {"pose", {ex.frames[f].pose->x, ex.frames[f].pose->y}}});
      }
      manifest["frames"] = list;
      out.push_back({d + "replay.json", dump(manifest)});
    } else {
      const GroundTruth gt = make_ground_truth(seed, o.spec, params, o.noise);
      out.push_back({d + "truth.json", scene_bytes(gt.truth.world, params)});
      out.push_back({d + "map.pgm", encode_pgm(gt.grid)});
      out.push_back({d + "meta.json", encode_map_meta(gt.grid, "map.pgm")});
    }
  }
  index["instances"] = instances;
  out.push_back({"dataset.json", dump(index)});
  return out;
}

nlohmann::ordered_json eval_paths(const fs::path& estimate, const fs::path& truth) {
  if (!fs::is_directory(truth)) {
    return metrics_to_json(evaluate(load_scene(estimate), load_scene(truth)));
  }
  if (!fs::is_directory(estimate)) throw IoError(estimate.string() + ": expected a directory");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(truth)) {
    if (e.is_directory() && fs::exists(e.path() / "truth.json")) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  ojson instances = ojson::array();
  int exact = 0;
  double iou = 0.0, precision = 0.0, recall = 0.0, edges = 0.0;
  for (const std::string& n : names) {
    const Metrics m = evaluate(load_scene(estimate / n / "scene.json"), load_scene(truth / n / "truth.json"));
    exact += m.room_count_error == 0 ? 1 : 0;
    iou += m.mean_iou;
    precision += m.door_precision;
    recall += m.door_recall;
    edges += m.edge_accuracy;
    ojson item = metrics_to_json(m);
    item["instance"] = n;
    instances.push_back(std::move(item));
  }
  const double k = names.empty() ? 1.0 : static_cast<double>(names.size());
  ojson j;
  j["instances"] = instances;
  j["aggregate"] = {{"count", names.size()},
                    {"room_count_exact", exact},
                    {"mean_iou", iou / k},
                    {"door_precision", precision / k},
                    {"door_recall", recall / k},
                    {"edge_accuracy", edges / k}};
  return j;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const int v = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string a = text.substr(0, dots);
    const std::string b = text.substr(dots + 2);
    const int lo = std::stoi(a, &used);
    if (used != a.size()) throw std::invalid_argument(text);
    const int hi = std::stoi(b, &used);
    if (used != b.size()) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("bad range '" + text + "', expected a..b");
  }
}

}  // namespace floorgraph
