#include "floorgraph/model.hpp"

#include <cmath>
#include <vector>

namespace floorgraph {

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Add: return "ADD";
    case KernelKind::Remove: return "REMOVE";
    case KernelKind::Split: return "SPLIT";
    case KernelKind::Merge: return "MERGE";
    case KernelKind::Shrink: return "SHRINK";
    case KernelKind::Dilate: return "DILATE";
    case KernelKind::Allocate: return "ALLOCATE";
    case KernelKind::Delete: return "DELETE";
  }
  return "?";
}

KernelKind reverse(KernelKind kind) {
  switch (kind) {
    case KernelKind::Add: return KernelKind::Remove;
    case KernelKind::Remove: return KernelKind::Add;
    case KernelKind::Split: return KernelKind::Merge;
    case KernelKind::Merge: return KernelKind::Split;
    case KernelKind::Shrink: return KernelKind::Dilate;
    case KernelKind::Dilate: return KernelKind::Shrink;
    case KernelKind::Allocate: return KernelKind::Delete;
    case KernelKind::Delete: return KernelKind::Allocate;
  }
  return kind;
}

void ModelParams::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(psi1) || !in_unit(psi2) || !in_unit(psi3) || !in_unit(psi4)) {
    throw ConfigError("psi1..psi4 must lie in (0, 1)");
  }
  for (const auto& row : likelihood) {
    for (double v : row) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("likelihood_table entries must be positive");
    }
  }
  if (!thresholds.valid()) throw ConfigError("thresholds must satisfy occupied < unexplored < free");
  const WorldGeometry& g = geometry;
  if (!(g.wall_thickness >= 1.0)) throw ConfigError("geometry.wall_thickness must be >= 1");
  if (!(g.adjacency_tolerance >= 0.0)) throw ConfigError("geometry.adjacency_tolerance must be >= 0");
  if (!(g.door_min > 0.0) || g.door_max < g.door_min) throw ConfigError("geometry.door_min/door_max out of range");
  if (!(g.min_room_size >= 2.0 * g.wall_thickness + 1.0)) {
    throw ConfigError("geometry.min_room_size must exceed twice the wall thickness");
  }
  const KernelParams& k = kernel;
  if (!(k.shift_sigma > 0.0)) throw ConfigError("kernel.shift_sigma must be positive");
  if (!(k.room_weight_cap >= 1.0) || !(k.wall_weight_cap >= 1.0) || !(k.door_weight_cap >= 1.0)) {
    throw ConfigError("kernel weight caps must be >= 1");
  }
  if (k.candidates < 1) throw ConfigError("kernel.candidates must be >= 1");
  if (k.growth_cap < 0) throw ConfigError("kernel.growth_cap must be >= 0");
  if (k.min_line_length < 1) throw ConfigError("kernel.min_line_length must be >= 1");
  if (!(k.split_uniform_mix >= 0.0 && k.split_uniform_mix < 1.0)) {
    throw ConfigError("kernel.split_uniform_mix must lie in [0, 1)");
  }
  if (!(k.split_offset_mix >= 0.0 && k.split_offset_mix < 1.0)) {
    throw ConfigError("kernel.split_offset_mix must lie in [0, 1)");
  }
  if (!(k.add_uniform_mix >= 0.0 && k.add_uniform_mix < 1.0)) {
    throw ConfigError("kernel.add_uniform_mix must lie in [0, 1)");
  }
  double sum = 0.0;
  for (double p : transition) {
    if (!(p >= 0.0)) throw ConfigError("transition probabilities must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("transition probabilities must sum to 1");
}

nlohmann::ordered_json params_to_json(const ModelParams& p) {
  nlohmann::ordered_json j;
  j["psi1"] = p.psi1;
  j["psi2"] = p.psi2;
  j["psi3"] = p.psi3;
  j["psi4"] = p.psi4;
  j["likelihood_table"] = p.likelihood;
  j["thresholds"] = {{"occupied", p.thresholds.occupied},
                     {"unexplored", p.thresholds.unexplored},
                     {"free", p.thresholds.free}};
  j["geometry"] = {{"wall_thickness", p.geometry.wall_thickness},
                   {"adjacency_tolerance", p.geometry.adjacency_tolerance},
                   {"door_min", p.geometry.door_min},
                   {"door_max", p.geometry.door_max},
                   {"min_room_size", p.geometry.min_room_size}};
  j["kernel"] = {{"shift_sigma", p.kernel.shift_sigma},
                 {"room_weight_cap", p.kernel.room_weight_cap},
                 {"wall_weight_cap", p.kernel.wall_weight_cap},
                 {"door_weight_cap", p.kernel.door_weight_cap},
                 {"candidates", p.kernel.candidates},
                 {"growth_cap", p.kernel.growth_cap},
                 {"min_line_length", p.kernel.min_line_length},
                 {"split_uniform_mix", p.kernel.split_uniform_mix},
                 {"split_offset_mix", p.kernel.split_offset_mix},
                 {"add_uniform_mix", p.kernel.add_uniform_mix}};
  nlohmann::ordered_json t;
  for (KernelKind k : kAllKernels) t[to_string(k)] = p.phi(k);
  j["transition"] = t;
  return j;
}

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  try {
    read_opt(j, "psi1", p.psi1);
    read_opt(j, "psi2", p.psi2);
    read_opt(j, "psi3", p.psi3);
    read_opt(j, "psi4", p.psi4);
    if (j.contains("likelihood_table")) {
      const auto& t = j.at("likelihood_table");
      if (!t.is_array() || t.size() != 3) throw ConfigError("likelihood_table must be 3x3");
      for (int r = 0; r < 3; ++r) {
        if (!t[r].is_array() || t[r].size() != 3) throw ConfigError("likelihood_table must be 3x3");
        for (int c = 0; c < 3; ++c) p.likelihood[r][c] = t[r][c].get<double>();
      }
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      auto byte = [&](const char* key, std::uint8_t& out) {
        if (!t.contains(key)) return;
        const int v = t.at(key).get<int>();
        if (v < 0 || v > 255) throw ConfigError(std::string("thresholds.") + key + " must be 0..255");
        out = static_cast<std::uint8_t>(v);
      };
      byte("occupied", p.thresholds.occupied);
      byte("unexplored", p.thresholds.unexplored);
      byte("free", p.thresholds.free);
    }
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      read_opt(g, "wall_thickness", p.geometry.wall_thickness);
      read_opt(g, "adjacency_tolerance", p.geometry.adjacency_tolerance);
      read_opt(g, "door_min", p.geometry.door_min);
      read_opt(g, "door_max", p.geometry.door_max);
      read_opt(g, "min_room_size", p.geometry.min_room_size);
    }
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      read_opt(k, "shift_sigma", p.kernel.shift_sigma);
      read_opt(k, "room_weight_cap", p.kernel.room_weight_cap);
      read_opt(k, "wall_weight_cap", p.kernel.wall_weight_cap);
      read_opt(k, "door_weight_cap", p.kernel.door_weight_cap);
      read_opt(k, "candidates", p.kernel.candidates);
      read_opt(k, "growth_cap", p.kernel.growth_cap);
      read_opt(k, "min_line_length", p.kernel.min_line_length);
      read_opt(k, "split_uniform_mix", p.kernel.split_uniform_mix);
      read_opt(k, "split_offset_mix", p.kernel.split_offset_mix);
      read_opt(k, "add_uniform_mix", p.kernel.add_uniform_mix);
    }
    if (j.contains("transition")) {
      const auto& t = j.at("transition");
      for (KernelKind k : kAllKernels) {
        if (t.contains(to_string(k))) p.transition[kernel_index(k)] = t.at(to_string(k)).get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  p.validate();
  return p;
}

namespace {

int doorless_rooms(const World& world) {
  int n = 0;
  for (const Room& r : world.rooms) n += world.door_count(r.id) == 0 ? 1 : 0;
  return n;
}

void finalize(Score& s, const ModelParams& params) {
  s.log_alpha2 = s.doorless_rooms * std::log(params.psi2);
  s.log_alpha3 = static_cast<double>(s.overlap_excess) * std::log(params.psi3);
  // alpha1 = alpha4 = 1: rectangles are axis-aligned in the working frame.
  s.log_prior = s.log_alpha2 + s.log_alpha3;
  double ll = 0.0;
  for (int w = 0; w < kNumClasses; ++w) {
    for (int m = 0; m < kNumClasses; ++m) {
      if (s.confusion[w][m] != 0) ll += static_cast<double>(s.confusion[w][m]) * std::log(params.likelihood[w][m]);
    }
  }
  s.log_likelihood = ll;
  s.total = s.log_prior + s.log_likelihood;
}

void set_prior_stats(Score& s, const World& world) {
  s.doorless_rooms = doorless_rooms(world);
  s.overlap_excess = overlap_excess(world);
}

ConfusionCounts full_confusion(const World& world, const ClassifiedGrid& cgrid, const ModelParams& params) {
  const CellRect region = cgrid.bounds();
  std::vector<CellClass> predicted(static_cast<std::size_t>(region.area()));
  paint_predicted(world, params.geometry, region, predicted);
  ConfusionCounts counts{};
  const auto observed = cgrid.classes();
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++counts[class_index(predicted[i])][class_index(observed[i])];
  }
  return counts;
}

}  // namespace

double log_prior(const World& world, const ModelParams& params) {
  Score s;
  set_prior_stats(s, world);
  finalize(s, params);
  return s.log_prior;
}

double log_likelihood(const World& world, const ClassifiedGrid& cgrid, const ModelParams& params) {
  return log_posterior(world, cgrid, params).log_likelihood;
}

Score log_posterior(const World& world, const ClassifiedGrid& cgrid, const ModelParams& params) {
  Score s;
  s.confusion = full_confusion(world, cgrid, params);
  set_prior_stats(s, world);
  finalize(s, params);
  return s;
}

Score rescore_delta(const Score& before_score, const World& before, const World& after, const CellRect& dirty,
                    const ClassifiedGrid& cgrid, const ModelParams& params, DeltaCheck check) {
  Score s = before_score;
  const CellRect region = dirty.intersect(cgrid.bounds());
  if (!region.empty()) {
    const auto n = static_cast<std::size_t>(region.area());
    thread_local std::vector<CellClass> old_buf, new_buf;
    old_buf.resize(n);
    new_buf.resize(n);
    paint_predicted(before, params.geometry, region, old_buf);
    paint_predicted(after, params.geometry, region, new_buf);
    std::size_t i = 0;
    for (int y = region.y0; y < region.y1; ++y) {
      for (int x = region.x0; x < region.x1; ++x, ++i) {
        if (old_buf[i] == new_buf[i]) continue;
        const int m = class_index(cgrid.at(x, y));
        --s.confusion[class_index(old_buf[i])][m];
        ++s.confusion[class_index(new_buf[i])][m];
      }
    }
  }
  set_prior_stats(s, after);
  finalize(s, params);
  if (check == DeltaCheck::FullRecompute) {
    const Score full = log_posterior(after, cgrid, params);
    if (!(full == s)) throw ContractError("incremental score disagrees with full recompute: dirty region mis-declared");
  }
  return s;
}

}  // namespace floorgraph
