#include "floorgraph/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace floorgraph {

WeightedSet::WeightedSet(std::vector<double> raw) : weights(std::move(raw)) {
  normalized.assign(weights.size(), 0.0);
  cumulative.assign(weights.size(), 0.0);
  double sum = 0.0;
  for (double w : weights) {
    if (w > 0.0 && std::isfinite(w)) sum += w;
  }
  if (sum <= 0.0) return;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i] > 0.0 && std::isfinite(weights[i]) ? weights[i] : 0.0;
    normalized[i] = w / sum;
    acc += normalized[i];
    cumulative[i] = acc;
    if (w > 0.0) last = i;
  }
  for (std::size_t i = last; i < cumulative.size(); ++i) cumulative[i] = 1.0;
}

std::size_t resample(const WeightedSet& set, double k) {
  if (!set.any_positive()) throw EmptySelectionError("resample: all weights are zero");
  std::size_t last = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.normalized[i] <= 0.0) continue;
    if (k <= set.cumulative[i]) return i;
    last = i;
  }
  return last;
}

namespace {

Room* find_room(World& w, int id) {
  auto it = std::find_if(w.rooms.begin(), w.rooms.end(), [id](const Room& r) { return r.id == id; });
  return it == w.rooms.end() ? nullptr : &*it;
}

bool duplicate_rect(const World& w, const Rect& rect, int ignore_a = -1, int ignore_b = -1) {
  return std::any_of(w.rooms.begin(), w.rooms.end(), [&](const Room& r) {
    return r.id != ignore_a && r.id != ignore_b && r.rect == rect;
  });
}

bool attached_doors_valid(const World& w, int room_id, const WorldGeometry& geom) {
  return std::all_of(w.doors.begin(), w.doors.end(), [&](const Door& d) {
    return (d.room_a != room_id && d.room_b != room_id) || door_valid(w, d, geom);
  });
}

CellRect door_cells(const World& w, const Door& d, const WorldGeometry& geom) {
  auto opening = door_opening(w, d, geom);
  return opening ? opening->cells() : CellRect{};
}

bool same_door(const Door& a, const Door& b) {
  const bool same_pair = (a.room_a == b.room_a && a.room_b == b.room_b) || (a.room_a == b.room_b && a.room_b == b.room_a);
  return same_pair && a.axis == b.axis && a.span0 == b.span0 && a.span1 == b.span1;
}

Rect shifted(const Rect& r, WallSide side, int delta, bool outward) {
  const double d = outward ? delta : -delta;
  Rect o = r;
  switch (side) {
    case WallSide::Left: o.x0 -= d; break;
    case WallSide::Right: o.x1 += d; break;
    case WallSide::Top: o.y0 -= d; break;
    case WallSide::Bottom: o.y1 += d; break;
  }
  return o;
}

std::optional<AppliedMove> apply_add(World w, const Move& m, const ModelParams& p, int width, int height) {
  Room room{w.allocate_id(), m.rect};
  if (!room_valid(room, p.geometry, width, height) || duplicate_rect(w, m.rect)) return std::nullopt;
  w.rooms.push_back(room);
  CellRect dirty = m.rect.cells();
  for (Door d : m.restore_doors) {
    if (d.room_a == m.room) d.room_a = room.id;
    if (d.room_b == m.room) d.room_b = room.id;
    if (!door_valid(w, d, p.geometry)) return std::nullopt;
    d.id = w.allocate_id();
    w.doors.push_back(d);
    dirty = dirty.unite(door_cells(w, d, p.geometry));
  }
  Move rev;
  rev.kind = KernelKind::Remove;
  rev.room = room.id;
  return AppliedMove{std::move(w), rev, dirty};
}

std::optional<AppliedMove> apply_remove(World w, const Move& m, const ModelParams& p) {
  auto it = std::find_if(w.rooms.begin(), w.rooms.end(), [&](const Room& r) { return r.id == m.room; });
  if (it == w.rooms.end()) return std::nullopt;
  Move rev;
  rev.kind = KernelKind::Add;
  rev.rect = it->rect;
  rev.room = m.room;
  CellRect dirty = it->rect.cells();
  for (const Door& d : w.doors) {
    if (d.room_a != m.room && d.room_b != m.room) continue;
    rev.restore_doors.push_back(d);
    dirty = dirty.unite(door_cells(w, d, p.geometry));
  }
  w.rooms.erase(it);
  std::erase_if(w.doors, [&](const Door& d) { return d.room_a == m.room || d.room_b == m.room; });
  return AppliedMove{std::move(w), rev, dirty};
}

std::optional<AppliedMove> apply_split(World w, const Move& m, const ModelParams& p, int width, int height) {
  Room* room = find_room(w, m.room);
  if (!room) return std::nullopt;
  const Rect parent = room->rect;
  Rect c1 = parent, c2 = parent;
  if (m.cut_axis == Axis::Vertical) {
    c1.x1 = m.cut;
    c2.x0 = m.cut2;
  } else {
    c1.y1 = m.cut;
    c2.y0 = m.cut2;
  }
  if (std::abs(m.cut2 - m.cut) > p.geometry.adjacency_tolerance) return std::nullopt;
  const int child2 = w.allocate_id();
  if (!room_valid({m.room, c1}, p.geometry, width, height) || !room_valid({child2, c2}, p.geometry, width, height)) {
    return std::nullopt;
  }
  if (duplicate_rect(w, c1, m.room) || duplicate_rect(w, c2, m.room)) return std::nullopt;
  room->rect = c1;
  w.rooms.push_back({child2, c2});
  for (Door& d : w.doors) {
    if (d.room_a != m.room && d.room_b != m.room) continue;
    if (door_valid(w, d, p.geometry)) continue;
    (d.room_a == m.room ? d.room_a : d.room_b) = child2;
    if (!door_valid(w, d, p.geometry)) return std::nullopt;
  }
  Move rev;
  rev.kind = KernelKind::Merge;
  rev.room = m.room;
  rev.other = child2;
  return AppliedMove{std::move(w), rev, parent.cells()};
}

std::optional<AppliedMove> apply_merge(World w, const Move& m, const ModelParams& p) {
  const Room* a = w.find_room(m.room);
  const Room* b = w.find_room(m.other);
  if (!a || !b || a == b) return std::nullopt;
  for (const Door& d : w.doors) {
    if ((d.room_a == a->id && d.room_b == b->id) || (d.room_a == b->id && d.room_b == a->id)) return std::nullopt;
  }
  // The pair must line up across the full side, with facing edges no further
  // apart (or overlapping) than the adjacency tolerance.
  const double tol = p.geometry.adjacency_tolerance;
  auto chained = [tol](double lo0, double lo1, double hi0, double hi1) {
    return lo0 < hi0 && lo1 < hi1 && std::abs(lo1 - hi0) <= tol;
  };
  const Rect ra = a->rect;
  const Rect rb = b->rect;
  const bool a_first = ra.x0 < rb.x0 || (ra.x0 == rb.x0 && ra.y0 < rb.y0);
  const Room& lo = a_first ? *a : *b;
  const Room& hi = a_first ? *b : *a;
  Axis axis;
  if (ra.y0 == rb.y0 && ra.y1 == rb.y1 && chained(lo.rect.x0, lo.rect.x1, hi.rect.x0, hi.rect.x1)) {
    axis = Axis::Vertical;
  } else if (ra.x0 == rb.x0 && ra.x1 == rb.x1 && chained(lo.rect.y0, lo.rect.y1, hi.rect.y0, hi.rect.y1)) {
    axis = Axis::Horizontal;
  } else {
    return std::nullopt;
  }
  const int low = lo.id;
  const int high = hi.id;
  const Rect rlow = lo.rect;
  const Rect rhigh = hi.rect;
  const Rect merged{std::min(ra.x0, rb.x0), std::min(ra.y0, rb.y0), std::max(ra.x1, rb.x1), std::max(ra.y1, rb.y1)};
  if (duplicate_rect(w, merged, low, high)) return std::nullopt;

  // The reverse SPLIT hands a door to the first child whenever it fits there,
  // so doors of the second room must not fit the first.
  for (const Door& d : w.doors) {
    if (d.room_a != high && d.room_b != high) continue;
    Door moved = d;
    (moved.room_a == high ? moved.room_a : moved.room_b) = low;
    if (door_valid(w, moved, p.geometry)) return std::nullopt;
  }

  find_room(w, low)->rect = merged;
  w.rooms.erase(std::find_if(w.rooms.begin(), w.rooms.end(), [&](const Room& r) { return r.id == high; }));
  for (Door& d : w.doors) {
    if (d.room_a == high) d.room_a = low;
    if (d.room_b == high) d.room_b = low;
  }
  if (!attached_doors_valid(w, low, p.geometry)) return std::nullopt;
  Move rev;
  rev.kind = KernelKind::Split;
  rev.room = low;
  rev.cut_axis = axis;
  rev.cut = axis == Axis::Vertical ? rlow.x1 : rlow.y1;
  rev.cut2 = axis == Axis::Vertical ? rhigh.x0 : rhigh.y0;
  return AppliedMove{std::move(w), rev, merged.cells()};
}

std::optional<AppliedMove> apply_shift(World w, const Move& m, const ModelParams& p, int width, int height) {
  if (m.delta < 1) return std::nullopt;
  Room* room = find_room(w, m.room);
  if (!room) return std::nullopt;
  const World before = w;
  const Rect old_rect = room->rect;
  const Rect new_rect = shifted(old_rect, m.side, m.delta, m.kind == KernelKind::Dilate);
  if (!room_valid({m.room, new_rect}, p.geometry, width, height) || duplicate_rect(w, new_rect, m.room)) {
    return std::nullopt;
  }
  room->rect = new_rect;
  if (!attached_doors_valid(w, m.room, p.geometry)) return std::nullopt;

  const double t = p.geometry.wall_thickness;
  Rect strip;
  switch (m.side) {
    case WallSide::Left:
    case WallSide::Right: {
      const double a = m.side == WallSide::Left ? old_rect.x0 : old_rect.x1;
      const double b = m.side == WallSide::Left ? new_rect.x0 : new_rect.x1;
      strip = {std::min(a, b) - t, std::min(old_rect.y0, new_rect.y0), std::max(a, b) + t,
               std::max(old_rect.y1, new_rect.y1)};
      break;
    }
    case WallSide::Top:
    case WallSide::Bottom: {
      const double a = m.side == WallSide::Top ? old_rect.y0 : old_rect.y1;
      const double b = m.side == WallSide::Top ? new_rect.y0 : new_rect.y1;
      strip = {std::min(old_rect.x0, new_rect.x0), std::min(a, b) - t, std::max(old_rect.x1, new_rect.x1),
               std::max(a, b) + t};
      break;
    }
  }
  CellRect dirty = strip.cells();
  for (const Door& d : w.doors) {
    if (d.room_a != m.room && d.room_b != m.room) continue;
    dirty = dirty.unite(door_cells(before, d, p.geometry)).unite(door_cells(w, d, p.geometry));
  }
  Move rev = m;
  rev.kind = m.kind == KernelKind::Shrink ? KernelKind::Dilate : KernelKind::Shrink;
  return AppliedMove{std::move(w), rev, dirty};
}

std::optional<AppliedMove> apply_allocate(World w, const Move& m, const ModelParams& p) {
  Door door = m.door;
  if (door.room_a == door.room_b) return std::nullopt;
  door.id = -1;
  if (!door_valid(w, door, p.geometry)) return std::nullopt;
  for (const Door& d : w.doors) {
    const bool same_pair =
        (d.room_a == door.room_a && d.room_b == door.room_b) || (d.room_a == door.room_b && d.room_b == door.room_a);
    if (same_pair && d.axis == door.axis && std::max(d.span0, door.span0) < std::min(d.span1, door.span1)) {
      return std::nullopt;
    }
  }
  door.id = w.allocate_id();
  w.doors.push_back(door);
  Move rev;
  rev.kind = KernelKind::Delete;
  rev.door_id = door.id;
  return AppliedMove{w, rev, door_cells(w, door, p.geometry)};
}

std::optional<AppliedMove> apply_delete(World w, const Move& m, const ModelParams& p) {
  auto it = std::find_if(w.doors.begin(), w.doors.end(), [&](const Door& d) { return d.id == m.door_id; });
  if (it == w.doors.end()) return std::nullopt;
  const CellRect dirty = door_cells(w, *it, p.geometry);
  Move rev;
  rev.kind = KernelKind::Allocate;
  rev.door = *it;
  w.doors.erase(it);
  return AppliedMove{std::move(w), rev, dirty};
}

}  // namespace

std::optional<AppliedMove> apply_move(const World& world, const Move& move, const ModelParams& params, int width,
                                      int height) {
  switch (move.kind) {
    case KernelKind::Add: return apply_add(world, move, params, width, height);
    case KernelKind::Remove: return apply_remove(world, move, params);
    case KernelKind::Split: return apply_split(world, move, params, width, height);
    case KernelKind::Merge: return apply_merge(world, move, params);
    case KernelKind::Shrink:
    case KernelKind::Dilate: return apply_shift(world, move, params, width, height);
    case KernelKind::Allocate: return apply_allocate(world, move, params);
    case KernelKind::Delete: return apply_delete(world, move, params);
  }
  return std::nullopt;
}

ProposalContext::ProposalContext(MapEvidence evidence, AddSeeding seeding, std::optional<Point> pose,
                                 std::vector<RoomCandidate> fixed_batch)
    : evidence_(std::move(evidence)), seeding_(seeding), pose_(pose), batch_(std::move(fixed_batch)) {
  if (seeding_ == AddSeeding::Pose) {
    if (!pose_) throw std::invalid_argument("pose seeding needs a pose");
    batch_ = room_candidates(evidence_, *pose_);
  }
}

std::vector<RoomCandidate> ProposalContext::forward_batch(Rng& rng) const {
  if (seeding_ != AddSeeding::FreeCells) return batch_;
  const auto& free = evidence_.free_cells();
  if (free.empty()) return {};
  const int cell = free[rng.below(free.size())];
  const int w = evidence_.grid().width();
  return room_candidates(evidence_, {cell % w + 0.5, cell / w + 0.5});
}

std::vector<RoomCandidate> ProposalContext::reverse_batch(const Rect& room) const {
  if (seeding_ != AddSeeding::FreeCells) return batch_;
  return room_candidates(evidence_, room.center());
}

namespace {

double capped_inverse(double w, double cap) {
  if (!(w > 0.0)) return cap;
  const double inv = 1.0 / w;
  return inv <= cap ? inv : cap;
}

}  // namespace

double room_selection_weight(const ClassifiedGrid& cgrid, const Rect& room, const ModelParams& params) {
  return capped_inverse(room_weight(cgrid, room, params.geometry.wall_thickness), params.kernel.room_weight_cap);
}

double wall_selection_weight(const ClassifiedGrid& cgrid, const Rect& room, WallSide side, const ModelParams& params) {
  return capped_inverse(wall_weight(cgrid, room, side, params.geometry.wall_thickness), params.kernel.wall_weight_cap);
}

double door_selection_weight(const ClassifiedGrid& cgrid, const World& world, const Door& door,
                             const ModelParams& params) {
  return capped_inverse(door_weight(cgrid, world, door, params.geometry), params.kernel.door_weight_cap);
}

double merge_affinity(const Rect& r, const Rect& s) {
  const Point a = r.center();
  const Point b = s.center();
  // Concentric rooms would give an infinite weight.
  return 1.0 / std::max(std::hypot(a.x - b.x, a.y - b.y), 0.5);
}

double shift_probability(int delta, double sigma) {
  if (delta < 1) return 0.0;
  const double scale = sigma * std::sqrt(2.0);
  if (delta == 1) return std::erf(1.5 / scale);
  return std::erf((delta + 0.5) / scale) - std::erf((delta - 0.5) / scale);
}

namespace {

// Split positions that leave both children at least min_room_size wide.
struct CutRange {
  int first = 0;
  int count = 0;
};

CutRange cut_range(const Rect& r, Axis axis, double min_size) {
  const double lo = (axis == Axis::Vertical ? r.x0 : r.y0) + min_size;
  const double hi = (axis == Axis::Vertical ? r.x1 : r.y1) - min_size;
  const int first = static_cast<int>(std::ceil(lo));
  const int last = static_cast<int>(std::floor(hi));
  return {first, std::max(0, last - first + 1)};
}

std::pair<Axis, double> cut_of(const LineSegment& s) {
  // A row of wall cells at y cuts the room below that row.
  return s.axis == LineAxis::Row ? std::pair{Axis::Horizontal, static_cast<double>(s.fixed + 1)}
                                 : std::pair{Axis::Vertical, static_cast<double>(s.fixed + 1)};
}

WeightedSet line_set(const std::vector<WeightedLine>& lines) {
  std::vector<double> w;
  w.reserve(lines.size());
  for (const WeightedLine& l : lines) w.push_back(l.weight);
  return WeightedSet(std::move(w));
}

WeightedSet room_set(const World& world, const ClassifiedGrid& cgrid, const ModelParams& params) {
  std::vector<double> w;
  w.reserve(world.rooms.size());
  for (const Room& r : world.rooms) w.push_back(room_selection_weight(cgrid, r.rect, params));
  return WeightedSet(std::move(w));
}

WeightedSet wall_set(const Rect& rect, const ClassifiedGrid& cgrid, const ModelParams& params) {
  std::vector<double> w;
  for (WallSide s : kWallSides) w.push_back(wall_selection_weight(cgrid, rect, s, params));
  return WeightedSet(std::move(w));
}

WeightedSet door_set(const World& world, const ClassifiedGrid& cgrid, const ModelParams& params) {
  std::vector<double> w;
  for (const Door& d : world.doors) w.push_back(door_selection_weight(cgrid, world, d, params));
  return WeightedSet(std::move(w));
}

WeightedSet candidate_set(const std::vector<RoomCandidate>& batch) {
  std::vector<double> w;
  for (const RoomCandidate& c : batch) w.push_back(c.weight);
  return WeightedSet(std::move(w));
}

WeightedSet door_candidate_set(const std::vector<DoorCandidate>& cands) {
  std::vector<double> w;
  for (const DoorCandidate& c : cands) w.push_back(c.weight);
  return WeightedSet(std::move(w));
}

double batch_probability(const std::vector<RoomCandidate>& batch, const Rect& rect) {
  const WeightedSet set = candidate_set(batch);
  double p = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].rect == rect) p += set.normalized[i];
  }
  return p;
}

// Integer intervals [a, b] inside [0, extent] with b - a >= min_len.
double interval_count(int extent, int min_len) {
  if (extent < min_len) return 0.0;
  const double n = extent - min_len + 1;
  return n * (n + 1) / 2.0;
}

double uniform_rect_probability(const Rect& r, const ClassifiedGrid& g, double min_size) {
  const int m = static_cast<int>(std::ceil(min_size));
  const bool integral = r.x0 == std::floor(r.x0) && r.y0 == std::floor(r.y0) && r.x1 == std::floor(r.x1) &&
                        r.y1 == std::floor(r.y1);
  if (!integral || r.x0 < 0 || r.y0 < 0 || r.x1 > g.width() || r.y1 > g.height() || r.width() < m ||
      r.height() < m) {
    return 0.0;
  }
  return 1.0 / (interval_count(g.width(), m) * interval_count(g.height(), m));
}

std::optional<Rect> draw_uniform_rect(const ClassifiedGrid& g, double min_size, Rng& rng) {
  const int m = static_cast<int>(std::ceil(min_size));
  if (g.width() < m || g.height() < m) return std::nullopt;
  auto interval = [&](int extent) {
    for (;;) {
      const int a = static_cast<int>(rng.below(static_cast<std::size_t>(extent) + 1));
      const int b = static_cast<int>(rng.below(static_cast<std::size_t>(extent) + 1));
      if (b - a >= m) return std::pair{a, b};
    }
  };
  const auto [x0, x1] = interval(g.width());
  const auto [y0, y1] = interval(g.height());
  return Rect{double(x0), double(y0), double(x1), double(y1)};
}

double add_probability(const std::vector<RoomCandidate>& batch, const Rect& rect, const ClassifiedGrid& g,
                       const ModelParams& p) {
  const double mix = p.kernel.add_uniform_mix;
  double q = (1.0 - mix) * batch_probability(batch, rect);
  if (mix > 0.0) q += mix * uniform_rect_probability(rect, g, p.geometry.min_room_size);
  return q;
}

double door_candidate_probability(const std::vector<DoorCandidate>& cands, const Door& door) {
  const WeightedSet set = door_candidate_set(cands);
  double p = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (same_door(cands[i].door, door)) p += set.normalized[i];
  }
  return p;
}

std::ptrdiff_t room_index(const World& w, int id) {
  for (std::size_t i = 0; i < w.rooms.size(); ++i) {
    if (w.rooms[i].id == id) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

// a'_r(s): affinity of s normalized over all rooms other than r.
double merge_partner_probability(const World& w, std::size_t r, std::size_t s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < w.rooms.size(); ++i) {
    if (i != r) sum += merge_affinity(w.rooms[r].rect, w.rooms[i].rect);
  }
  return sum > 0.0 ? merge_affinity(w.rooms[r].rect, w.rooms[s].rect) / sum : 0.0;
}

}  // namespace

double split_cut_probability(const ClassifiedGrid& cgrid, const Room& room, Axis axis, double cut,
                             const ModelParams& params) {
  const auto lines = split_lines(cgrid, room, params);
  const WeightedSet set = line_set(lines);
  double line_mass = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto [a, c] = cut_of(lines[i].segment);
    if (a == axis && c == cut) line_mass += set.normalized[i];
  }
  const double mix = params.kernel.split_uniform_mix;
  const CutRange v = cut_range(room.rect, Axis::Vertical, params.geometry.min_room_size);
  const CutRange h = cut_range(room.rect, Axis::Horizontal, params.geometry.min_room_size);
  const int total = v.count + h.count;
  double uniform_mass = 0.0;
  const CutRange& own = axis == Axis::Vertical ? v : h;
  if (total > 0 && cut == std::floor(cut) && cut >= own.first && cut < own.first + own.count) {
    uniform_mass = 1.0 / total;
  }
  return (1.0 - mix) * line_mass + mix * uniform_mass;
}

double split_offset_probability(double offset, const ModelParams& params) {
  const int k = static_cast<int>(std::floor(params.geometry.adjacency_tolerance));
  if (offset != std::floor(offset) || std::abs(offset) > k) return 0.0;
  if (k == 0) return 1.0;
  const double spread = params.kernel.split_offset_mix;
  return offset == 0.0 ? 1.0 - spread : spread / (2.0 * k);
}

double move_probability(const World& world, const Move& move, const ProposalContext& ctx) {
  const ClassifiedGrid& g = ctx.grid();
  const ModelParams& p = ctx.params();
  const double n = static_cast<double>(world.rooms.size());
  switch (move.kind) {
    case KernelKind::Add: return add_probability(ctx.reverse_batch(move.rect), move.rect, g, p);
    case KernelKind::Remove: {
      const auto i = room_index(world, move.room);
      return i < 0 ? 0.0 : room_set(world, g, p).normalized[i];
    }
    case KernelKind::Split: {
      const Room* r = world.find_room(move.room);
      if (!r) return 0.0;
      return split_cut_probability(g, *r, move.cut_axis, move.cut, p) *
             split_offset_probability(move.cut2 - move.cut, p) / n;
    }
    case KernelKind::Merge: {
      const auto a = room_index(world, move.room);
      const auto b = room_index(world, move.other);
      if (a < 0 || b < 0 || a == b) return 0.0;
      return (merge_partner_probability(world, a, b) + merge_partner_probability(world, b, a)) / n;
    }
    case KernelKind::Shrink:
    case KernelKind::Dilate: {
      const auto i = room_index(world, move.room);
      if (i < 0) return 0.0;
      const double pr = room_set(world, g, p).normalized[i];
      const double pw = wall_set(world.rooms[i].rect, g, p).normalized[static_cast<int>(move.side)];
      return pr * pw * shift_probability(move.delta, p.kernel.shift_sigma);
    }
    case KernelKind::Allocate: return door_candidate_probability(door_candidates(g, world, p), move.door);
    case KernelKind::Delete: {
      for (std::size_t i = 0; i < world.doors.size(); ++i) {
        if (world.doors[i].id == move.door_id) return door_set(world, g, p).normalized[i];
      }
      return 0.0;
    }
  }
  return 0.0;
}

Proposal propose(KernelKind kind, const World& world, const ProposalContext& ctx, Rng& rng) {
  const ClassifiedGrid& g = ctx.grid();
  const ModelParams& p = ctx.params();
  Proposal prop;
  prop.kind = kind;
  prop.move.kind = kind;
  double fwd = 0.0;
  Move& m = prop.move;

  switch (kind) {
    case KernelKind::Add: {
      const double mix = p.kernel.add_uniform_mix;
      if (mix > 0.0 && rng.uniform() < mix) {
        auto rect = draw_uniform_rect(g, p.geometry.min_room_size, rng);
        if (!rect) return prop;
        m.rect = *rect;
        // The batch a seeded draw would have used is not known here.
        fwd = add_probability(ctx.reverse_batch(m.rect), m.rect, g, p);
      } else {
        const auto batch = ctx.forward_batch(rng);
        const WeightedSet set = candidate_set(batch);
        if (!set.any_positive()) return prop;
        m.rect = batch[resample(set, rng.uniform())].rect;
        fwd = add_probability(batch, m.rect, g, p);
      }
      break;
    }
    case KernelKind::Remove: {
      if (world.rooms.empty()) return prop;
      const WeightedSet set = room_set(world, g, p);
      const std::size_t i = resample(set, rng.uniform());
      m.room = world.rooms[i].id;
      fwd = set.normalized[i];
      break;
    }
    case KernelKind::Split: {
      if (world.rooms.empty()) return prop;
      const Room& room = world.rooms[rng.below(world.rooms.size())];
      const auto lines = split_lines(g, room, p);
      m.room = room.id;
      const CutRange v = cut_range(room.rect, Axis::Vertical, p.geometry.min_room_size);
      const CutRange h = cut_range(room.rect, Axis::Horizontal, p.geometry.min_room_size);
      const int total = v.count + h.count;
      if (rng.uniform() < p.kernel.split_uniform_mix) {
        if (total == 0) return prop;
        const int k = static_cast<int>(rng.below(static_cast<std::size_t>(total)));
        m.cut_axis = k < v.count ? Axis::Vertical : Axis::Horizontal;
        m.cut = k < v.count ? v.first + k : h.first + (k - v.count);
      } else {
        if (lines.empty()) return prop;
        const auto [axis, cut] = cut_of(lines[resample(line_set(lines), rng.uniform())].segment);
        m.cut_axis = axis;
        m.cut = cut;
      }
      m.cut2 = m.cut;
      const int k = static_cast<int>(std::floor(p.geometry.adjacency_tolerance));
      if (k > 0 && rng.uniform() < p.kernel.split_offset_mix) {
        const int j = static_cast<int>(rng.below(static_cast<std::size_t>(2 * k)));
        m.cut2 = m.cut + (j < k ? j - k : j - k + 1);
      }
      fwd = move_probability(world, m, ctx);
      break;
    }
    case KernelKind::Merge: {
      if (world.rooms.size() < 2) return prop;
      const std::size_t first = rng.below(world.rooms.size());
      std::vector<double> w(world.rooms.size(), 0.0);
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (i != first) w[i] = merge_affinity(world.rooms[first].rect, world.rooms[i].rect);
      }
      const std::size_t second = resample(WeightedSet(std::move(w)), rng.uniform());
      m.room = world.rooms[first].id;
      m.other = world.rooms[second].id;
      fwd = move_probability(world, m, ctx);
      break;
    }
    case KernelKind::Shrink:
    case KernelKind::Dilate: {
      if (world.rooms.empty()) return prop;
      const WeightedSet rooms = room_set(world, g, p);
      const std::size_t i = resample(rooms, rng.uniform());
      const WeightedSet walls = wall_set(world.rooms[i].rect, g, p);
      const std::size_t s = resample(walls, rng.uniform());
      m.room = world.rooms[i].id;
      m.side = kWallSides[s];
      m.delta = std::max(1, static_cast<int>(std::lround(std::abs(rng.normal(p.kernel.shift_sigma)))));
      fwd = rooms.normalized[i] * walls.normalized[s] * shift_probability(m.delta, p.kernel.shift_sigma);
      break;
    }
    case KernelKind::Allocate: {
      const auto cands = door_candidates(g, world, p);
      const WeightedSet set = door_candidate_set(cands);
      if (!set.any_positive()) return prop;
      m.door = cands[resample(set, rng.uniform())].door;
      fwd = door_candidate_probability(cands, m.door);
      break;
    }
    case KernelKind::Delete: {
      if (world.doors.empty()) return prop;
      const WeightedSet set = door_set(world, g, p);
      const std::size_t i = resample(set, rng.uniform());
      m.door_id = world.doors[i].id;
      fwd = set.normalized[i];
      break;
    }
  }

  auto applied = apply_move(world, m, p, g.width(), g.height());
  if (!applied || !(fwd > 0.0)) return prop;
  const double bwd = move_probability(applied->world, applied->reverse, ctx);
  const double phi_fwd = p.phi(kind);
  const double phi_bwd = p.phi(reverse(kind));
  if (!(bwd > 0.0) || !(phi_fwd > 0.0) || !(phi_bwd > 0.0)) return prop;
  prop.valid = true;
  prop.world = std::move(applied->world);
  prop.reverse = applied->reverse;
  prop.dirty = applied->dirty;
  prop.log_q_fwd = std::log(phi_fwd) + std::log(fwd);
  prop.log_q_bwd = std::log(phi_bwd) + std::log(bwd);
  return prop;
}

double acceptance_probability(double current_total, double proposal_total, const Proposal& proposal) {
  if (!proposal.valid) return 0.0;
  const double log_ratio = (proposal_total - current_total) + (proposal.log_q_bwd - proposal.log_q_fwd);
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

bool mh_accept(double current_total, double proposal_total, const Proposal& proposal, double u) {
  return u < acceptance_probability(current_total, proposal_total, proposal);
}

}  // namespace floorgraph
