#include "floorgraph/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

namespace floorgraph {

namespace {

struct Box {
  int x0, y0, x1, y1;
  int w() const { return x1 - x0; }
  int h() const { return y1 - y0; }
};

int uniform_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
}

std::vector<Box> slice(Rng& rng, Box root, int count, int min_dim) {
  std::vector<Box> boxes{root};
  while (static_cast<int>(boxes.size()) < count) {
    std::vector<double> weight;
    for (const Box& b : boxes) {
      const bool splittable = b.w() >= 2 * min_dim || b.h() >= 2 * min_dim;
      weight.push_back(splittable ? static_cast<double>(b.w()) * b.h() : 0.0);
    }
    WeightedSet set(weight);
    if (!set.any_positive()) throw GenerationError("gen_world: box too small for the requested room count");
    const std::size_t i = resample(set, rng.uniform());
    const Box b = boxes[i];
    bool vertical;  // cut along x
    if (b.w() >= 2 * min_dim && b.h() >= 2 * min_dim) {
      vertical = b.w() == b.h() ? rng.uniform() < 0.5 : b.w() > b.h();
    } else {
      vertical = b.w() >= 2 * min_dim;
    }
    if (vertical) {
      const int c = uniform_int(rng, b.x0 + min_dim, b.x1 - min_dim);
      boxes[i] = {b.x0, b.y0, c, b.y1};
      boxes.push_back({c, b.y0, b.x1, b.y1});
    } else {
      const int c = uniform_int(rng, b.y0 + min_dim, b.y1 - min_dim);
      boxes[i] = {b.x0, b.y0, b.x1, c};
      boxes.push_back({b.x0, c, b.x1, b.y1});
    }
  }
  return boxes;
}

struct DoorSlot {
  int a, b;
  SharedWall wall;
};

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

bool try_doors(Rng& rng, World& world, const WorldSpec& spec, const WorldGeometry& geom) {
  const double t = geom.wall_thickness;
  std::vector<DoorSlot> slots;
  for (std::size_t i = 0; i < world.rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < world.rooms.size(); ++j) {
      for (const SharedWall& sw : shared_walls(world.rooms[i], world.rooms[j], 0.0)) {
        if (sw.overlap1 - sw.overlap0 - 2 * t >= spec.door_min) slots.push_back({world.rooms[i].id, world.rooms[j].id, sw});
      }
    }
  }
  for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);
  std::vector<int> parent(world.rooms.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::size_t joined = 0;
  for (const DoorSlot& s : slots) {
    const int ra = find_root(parent, s.a);
    const int rb = find_root(parent, s.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    const int room = static_cast<int>(s.wall.overlap1 - s.wall.overlap0 - 2 * t);
    const int len = uniform_int(rng, spec.door_min, std::min(spec.door_max, room));
    const int lo = static_cast<int>(s.wall.overlap0 + t);
    const int start = uniform_int(rng, lo, lo + room - len);
    world.doors.push_back({0, s.a, s.b, s.wall.axis, static_cast<double>(start), static_cast<double>(start + len)});
    ++joined;
  }
  return joined + 1 == world.rooms.size();
}

}  // namespace

SyntheticWorld gen_world(std::uint64_t seed, const WorldSpec& spec, const WorldGeometry& geom) {
  if (spec.rooms_min < 1 || spec.rooms_max < spec.rooms_min || spec.size_min < 1 || spec.size_max < spec.size_min ||
      spec.door_min < 1 || spec.door_max < spec.door_min || spec.door_min < geom.door_min ||
      spec.door_max > geom.door_max || spec.min_room_dim < geom.min_room_size) {
    throw GenerationError("gen_world: infeasible spec");
  }
  Rng rng(seed);
  SyntheticWorld out;
  out.width = uniform_int(rng, spec.size_min, spec.size_max);
  out.height = uniform_int(rng, spec.size_min, spec.size_max);
  const int n = uniform_int(rng, spec.rooms_min, spec.rooms_max);
  const Box root{spec.margin, spec.margin, out.width - spec.margin, out.height - spec.margin};
  if (root.w() < spec.min_room_dim || root.h() < spec.min_room_dim) throw GenerationError("gen_world: grid too small");

  for (int attempt = 0; attempt < 200; ++attempt) {
    World w;
    for (const Box& b : slice(rng, root, n, spec.min_room_dim)) {
      w.rooms.push_back({w.allocate_id(), Rect{double(b.x0), double(b.y0), double(b.x1), double(b.y1)}});
    }
    std::sort(w.rooms.begin(), w.rooms.end(), [](const Room& a, const Room& b) { return a.rect < b.rect; });
    for (std::size_t i = 0; i < w.rooms.size(); ++i) w.rooms[i].id = static_cast<int>(i);
    if (!try_doors(rng, w, spec, geom)) continue;
    for (Door& d : w.doors) d.id = w.allocate_id();
    out.world = std::move(w);
    return out;
  }
  throw GenerationError("gen_world: no door-connected layout found");
}

OccupancyGrid render_grid(const World& world, int width, int height, const ModelParams& params, bool noise,
                          std::uint64_t seed) {
  const ClassifiedGrid predicted = rasterize(world, width, height, params.geometry);
  OccupancyGrid g;
  g.width = width;
  g.height = height;
  g.intensities.resize(static_cast<std::size_t>(width) * height);
  Rng rng(seed);
  std::array<WeightedSet, kNumClasses> rows;
  for (int c = 0; c < kNumClasses; ++c) {
    rows[c] = WeightedSet(std::vector<double>(params.likelihood[c].begin(), params.likelihood[c].end()));
  }
  const auto classes = predicted.classes();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    int observed = class_index(classes[i]);
    if (noise) observed = static_cast<int>(resample(rows[observed], rng.uniform()));
    g.intensities[i] = kCanonicalIntensity[observed];
  }
  return g;
}

GroundTruth make_ground_truth(std::uint64_t seed, const WorldSpec& spec, const ModelParams& params, bool noise) {
  GroundTruth gt;
  gt.seed = seed;
  gt.noise = noise;
  gt.truth = gen_world(seed, spec, params.geometry);
  gt.grid = render_grid(gt.truth.world, gt.truth.width, gt.truth.height, params, noise, seed ^ 0x9e3779b97f4a7c15ULL);
  return gt;
}

World subset_world(const std::vector<Rect>& candidates, std::uint32_t mask) {
  World w;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (mask & (1u << i)) w.rooms.push_back({static_cast<int>(i), candidates[i]});
  }
  w.next_id = static_cast<int>(candidates.size());
  return w;
}

std::vector<PosteriorState> enumerate_posterior(const std::vector<Rect>& candidates, const ClassifiedGrid& cgrid,
                                                const ModelParams& params) {
  if (candidates.size() > static_cast<std::size_t>(kMaxEnumerated)) {
    throw std::invalid_argument("enumerate_posterior: at most 12 candidates");
  }
  const std::uint32_t count = 1u << candidates.size();
  std::vector<PosteriorState> out(count);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::uint32_t m = 0; m < count; ++m) {
    out[m].mask = m;
    out[m].log_posterior = log_posterior(subset_world(candidates, m), cgrid, params).total;
    peak = std::max(peak, out[m].log_posterior);
  }
  double z = 0.0;
  for (auto& s : out) z += s.probability = std::exp(s.log_posterior - peak);
  for (auto& s : out) s.probability /= z;
  return out;
}

double rect_iou(const Rect& a, const Rect& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = iw > 0 && ih > 0 ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

namespace {

// Assignment maximizing total IoU. Returns est index per truth index (-1 = none).
std::vector<int> match_rooms(const std::vector<Rect>& truth, const std::vector<Rect>& est) {
  const std::size_t nt = truth.size(), ne = est.size();
  std::vector<int> assign(nt, -1);
  if (nt == 0 || ne == 0) return assign;
  if (std::min(nt, ne) <= static_cast<std::size_t>(kMaxEnumerated)) {
    const bool truth_small = nt <= ne;
    const auto& big = truth_small ? est : truth;
    const auto& small = truth_small ? truth : est;
    const std::size_t nb = big.size(), ns = small.size();
    const std::size_t masks = std::size_t{1} << ns;
    std::vector<double> dp((nb + 1) * masks, -1.0);
    std::vector<int> choice((nb + 1) * masks, -1);
    dp[0] = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t m = 0; m < masks; ++m) {
        const double cur = dp[i * masks + m];
        if (cur < 0) continue;
        auto relax = [&](std::size_t nm, double v, int c) {
          double& slot = dp[(i + 1) * masks + nm];
          if (v > slot + 1e-15) {
            slot = v;
            choice[(i + 1) * masks + nm] = c;
          }
        };
        relax(m, cur, -1);
        for (std::size_t j = 0; j < ns; ++j) {
          if (m & (std::size_t{1} << j)) continue;
          const double iou = truth_small ? rect_iou(small[j], big[i]) : rect_iou(big[i], small[j]);
          if (iou > 0) relax(m | (std::size_t{1} << j), cur + iou, static_cast<int>(j));
        }
      }
    }
    std::size_t best = 0;
    for (std::size_t m = 1; m < masks; ++m) {
      if (dp[nb * masks + m] > dp[nb * masks + best] + 1e-15) best = m;
    }
    std::size_t m = best;
    for (std::size_t i = nb; i > 0; --i) {
      const int c = choice[i * masks + m];
      if (c >= 0) {
        if (truth_small) assign[c] = static_cast<int>(i - 1);
        else assign[i - 1] = c;
        m &= ~(std::size_t{1} << c);
      }
    }
    return assign;
  }
  struct Pair {
    double iou;
    std::size_t t, e;
  };
  std::vector<Pair> pairs;
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t e = 0; e < ne; ++e) {
      const double iou = rect_iou(truth[t], est[e]);
      if (iou > 0) pairs.push_back({iou, t, e});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
  std::vector<bool> used(ne, false);
  for (const Pair& p : pairs) {
    if (assign[p.t] < 0 && !used[p.e]) {
      assign[p.t] = static_cast<int>(p.e);
      used[p.e] = true;
    }
  }
  return assign;
}

double point_distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

Metrics evaluate(const World& estimate, const World& truth, const WorldGeometry& geom) {
  Metrics m;
  m.truth_rooms = static_cast<int>(truth.rooms.size());
  m.estimate_rooms = static_cast<int>(estimate.rooms.size());
  m.room_count_error = std::abs(m.truth_rooms - m.estimate_rooms);

  std::vector<Rect> tr, er;
  for (const Room& r : truth.rooms) tr.push_back(r.rect);
  for (const Room& r : estimate.rooms) er.push_back(r.rect);
  const std::vector<int> assign = match_rooms(tr, er);
  double iou_sum = 0.0;
  std::map<int, int> est_of_truth;
  for (std::size_t t = 0; t < assign.size(); ++t) {
    if (assign[t] < 0) continue;
    const Rect& a = tr[t];
    const Rect& b = er[assign[t]];
    iou_sum += rect_iou(a, b);
    m.matches.emplace_back(truth.rooms[t].id, estimate.rooms[assign[t]].id);
    est_of_truth[truth.rooms[t].id] = estimate.rooms[assign[t]].id;
    m.max_wall_offset = std::max({m.max_wall_offset, std::abs(a.x0 - b.x0), std::abs(a.y0 - b.y0),
                                  std::abs(a.x1 - b.x1), std::abs(a.y1 - b.y1)});
  }
  m.mean_iou = m.truth_rooms == 0 ? (m.estimate_rooms == 0 ? 1.0 : 0.0) : iou_sum / m.truth_rooms;

  m.truth_doors = static_cast<int>(truth.doors.size());
  m.estimate_doors = static_cast<int>(estimate.doors.size());
  struct DoorPair {
    double dist;
    std::size_t t, e;
  };
  std::vector<DoorPair> pairs;
  for (std::size_t t = 0; t < truth.doors.size(); ++t) {
    const auto [t0, t1] = door_segment(truth, truth.doors[t]);
    for (std::size_t e = 0; e < estimate.doors.size(); ++e) {
      const auto [e0, e1] = door_segment(estimate, estimate.doors[e]);
      const double same = std::max(point_distance(t0, e0), point_distance(t1, e1));
      const double flip = std::max(point_distance(t0, e1), point_distance(t1, e0));
      const double d = std::min(same, flip);
      if (d <= 2.0) pairs.push_back({d, t, e});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const DoorPair& a, const DoorPair& b) { return a.dist < b.dist; });
  std::vector<bool> t_used(truth.doors.size()), e_used(estimate.doors.size());
  for (const DoorPair& p : pairs) {
    if (t_used[p.t] || e_used[p.e]) continue;
    t_used[p.t] = e_used[p.e] = true;
    ++m.matched_doors;
  }
  m.door_precision = m.estimate_doors == 0 ? 1.0 : double(m.matched_doors) / m.estimate_doors;
  m.door_recall = m.truth_doors == 0 ? 1.0 : double(m.matched_doors) / m.truth_doors;

  const SceneGraph tg = build_scene_graph(truth, geom);
  const SceneGraph eg = build_scene_graph(estimate, geom);
  if (!tg.edges.empty()) {
    int correct = 0;
    for (const GraphEdge& e : tg.edges) {
      auto a = est_of_truth.find(e.room_a);
      auto b = est_of_truth.find(e.room_b);
      if (a == est_of_truth.end() || b == est_of_truth.end()) continue;
      const int lo = std::min(a->second, b->second), hi = std::max(a->second, b->second);
      for (const GraphEdge& f : eg.edges) {
        if (f.room_a == lo && f.room_b == hi && f.label == e.label) ++correct;
      }
    }
    m.edge_accuracy = double(correct) / tg.edges.size();
  }
  return m;
}

nlohmann::ordered_json metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["room_count_error"] = m.room_count_error;
  j["truth_rooms"] = m.truth_rooms;
  j["estimate_rooms"] = m.estimate_rooms;
  j["mean_iou"] = m.mean_iou;
  j["max_wall_offset"] = m.max_wall_offset;
  auto matches = nlohmann::ordered_json::array();
  for (auto [t, e] : m.matches) matches.push_back({{"truth", t}, {"estimate", e}});
  j["matches"] = matches;
  j["truth_doors"] = m.truth_doors;
  j["estimate_doors"] = m.estimate_doors;
  j["matched_doors"] = m.matched_doors;
  j["door_precision"] = m.door_precision;
  j["door_recall"] = m.door_recall;
  j["edge_accuracy"] = m.edge_accuracy;
  return j;
}

double ground_truth_error(const Metrics& m) {
  return m.room_count_error + (1.0 - m.mean_iou) + (1.0 - m.door_recall);
}

Exploration make_exploration(std::uint64_t seed, const WorldSpec& spec, const ModelParams& params, bool noise,
                             int frame_count) {
  Exploration ex;
  ex.ground_truth = make_ground_truth(seed, spec, params, noise);
  const World& w = ex.ground_truth.truth.world;
  const int width = ex.ground_truth.truth.width;
  const int height = ex.ground_truth.truth.height;
  const int n = static_cast<int>(w.rooms.size());

  // Breadth-first tour over the door tree from room 0.
  std::vector<int> tour;
  std::vector<bool> seen(n, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    const int r = q.front();
    q.pop();
    tour.push_back(r);
    for (const Door& d : w.doors) {
      const int other = d.room_a == r ? d.room_b : d.room_b == r ? d.room_a : -1;
      if (other >= 0 && !seen[other]) {
        seen[other] = true;
        q.push(other);
      }
    }
  }

  // Rooms before the current one are fully visible; the current one opens up
  // as a box around its center that widens from frame to frame.
  const int reveal_frames = std::max(1, frame_count * 13 / 18);
  for (int f = 0; f < frame_count; ++f) {
    int k = n - 1;
    double frac = 1.0;
    if (f < reveal_frames) {
      const double t = static_cast<double>(f + 1) * n / reveal_frames;
      k = std::min(n - 1, static_cast<int>(std::ceil(t)) - 1);
      frac = t - k;
    }
    const int room = f < reveal_frames ? tour[k] : tour[(f - reveal_frames) % n];
    const Rect& cur = w.rooms[tour[k]].rect;
    const double alpha = 0.4 + 0.6 * frac;
    const Point cc = cur.center();
    const Rect partial{cc.x - alpha * cur.width() / 2, cc.y - alpha * cur.height() / 2,
                       cc.x + alpha * cur.width() / 2, cc.y + alpha * cur.height() / 2};

    OccupancyGrid g = ex.ground_truth.grid;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        bool visible = partial.contains_center(x, y);
        for (int i = 0; i < k && !visible; ++i) visible = w.rooms[tour[i]].rect.contains_center(x, y);
        if (!visible) g.intensities[static_cast<std::size_t>(y) * width + x] = kCanonicalIntensity[1];
      }
    }
    const Point c = w.rooms[room].rect.center();
    ex.frames.push_back({std::move(g), Point{std::floor(c.x) + 0.5, std::floor(c.y) + 0.5}});
    ex.visited.push_back(room);
  }
  return ex;
}

}  // namespace floorgraph
