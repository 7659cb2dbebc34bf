#include "floorgraph/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace floorgraph {

Point LineSegment::p0() const {
  return axis == LineAxis::Row ? Point{static_cast<double>(begin), fixed + 0.5}
                               : Point{fixed + 0.5, static_cast<double>(begin)};
}

Point LineSegment::p1() const {
  return axis == LineAxis::Row ? Point{static_cast<double>(end), fixed + 0.5}
                               : Point{fixed + 0.5, static_cast<double>(end)};
}

double LineSegment::length() const {
  const Point a = p0();
  const Point b = p1();
  return std::hypot(a.x - b.x, a.y - b.y);
}

int growth_run_length(int variant) {
  switch (variant) {
    case 0: return 3;
    case 1: return 6;
    case 2: return 6;
    case 3: return 6;
    default: return 3 << (variant - 2);
  }
}

namespace {

enum class GrowthOrder { RoundRobin, HorizontalFirst, VerticalFirst };

GrowthOrder growth_order(int variant) {
  if (variant == 2) return GrowthOrder::HorizontalFirst;
  if (variant == 3) return GrowthOrder::VerticalFirst;
  return GrowthOrder::RoundRobin;
}

}  // namespace

MapEvidence::MapEvidence(ClassifiedGrid grid, const ModelParams& params)
    : grid_(std::move(grid)), params_(params) {
  const auto classes = grid_.classes();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == CellClass::Free) free_cells_.push_back(static_cast<int>(i));
  }
  for (int v = 0; v + 2 <= params_.kernel.candidates; ++v) {
    const int len = growth_run_length(v);
    if (!runs_.contains(len)) runs_.emplace(len, build(len));
  }
}

MapEvidence::RunTable MapEvidence::build(int min_run) const {
  const int w = grid_.width();
  const int h = grid_.height();
  RunTable t;
  t.rows.assign(static_cast<std::size_t>(w + 1) * h, 0);
  t.cols.assign(static_cast<std::size_t>(h + 1) * w, 0);
  for (int y = 0; y < h; ++y) {
    int run = 0;
    std::int32_t* row = &t.rows[static_cast<std::size_t>(y) * (w + 1)];
    for (int x = 0; x < w; ++x) {
      run = grid_.at(x, y) == CellClass::Occupied ? run + 1 : 0;
      row[x + 1] = row[x] + (run >= min_run ? 1 : 0);
    }
  }
  for (int x = 0; x < w; ++x) {
    int run = 0;
    std::int32_t* col = &t.cols[static_cast<std::size_t>(x) * (h + 1)];
    for (int y = 0; y < h; ++y) {
      run = grid_.at(x, y) == CellClass::Occupied ? run + 1 : 0;
      col[y + 1] = col[y] + (run >= min_run ? 1 : 0);
    }
  }
  return t;
}

const MapEvidence::RunTable& MapEvidence::table(int min_run) const {
  auto it = runs_.find(min_run);
  if (it == runs_.end()) throw DetectionError("no run table for length " + std::to_string(min_run));
  return it->second;
}

bool MapEvidence::line_has_run(LineAxis axis, int fixed, int begin, int end, int min_run) const {
  const int limit = axis == LineAxis::Row ? grid_.width() : grid_.height();
  begin = std::max(begin, 0);
  end = std::min(end, limit);
  if (end - begin < min_run) return false;
  const RunTable& t = table(min_run);
  // A run fully inside [begin, end) ends at some cell in [begin + min_run - 1, end).
  const std::int32_t* line = axis == LineAxis::Row ? &t.rows[static_cast<std::size_t>(fixed) * (grid_.width() + 1)]
                                                   : &t.cols[static_cast<std::size_t>(fixed) * (grid_.height() + 1)];
  return line[end] - line[begin + min_run - 1] > 0;
}

double main_orientation(const ClassifiedGrid& cgrid) {
  const int w = cgrid.width();
  const int h = cgrid.height();
  std::vector<Point> occupied;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (cgrid.at(x, y) == CellClass::Occupied) occupied.push_back({x + 0.5 - w / 2.0, y + 0.5 - h / 2.0});
    }
  }
  if (occupied.empty()) throw DetectionError("main orientation needs at least one occupied cell");

  // Bin theta scores how sharply occupied cells project onto the axes rotated
  // by theta (sum of squared 1-cell bin counts over both axes). Walls along
  // theta or theta + 90 collapse into few bins; speckle spreads evenly.
  const int span = static_cast<int>(std::ceil(std::hypot(w, h))) + 2;
  std::vector<std::int32_t> along(static_cast<std::size_t>(2 * span)), across(along.size());
  int best = 0;
  double best_v = -1.0;
  for (int b = 0; b < 90; ++b) {
    const double rad = b * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    std::fill(along.begin(), along.end(), 0);
    std::fill(across.begin(), across.end(), 0);
    for (const Point& p : occupied) {
      ++along[static_cast<std::size_t>(std::floor(c * p.x + s * p.y) + span)];
      ++across[static_cast<std::size_t>(std::floor(-s * p.x + c * p.y) + span)];
    }
    double v = 0.0;
    for (std::size_t i = 0; i < along.size(); ++i) {
      v += static_cast<double>(along[i]) * along[i] + static_cast<double>(across[i]) * across[i];
    }
    if (v > best_v) {
      best_v = v;
      best = b;
    }
  }
  return static_cast<double>(best);
}

namespace {

Point rotate(Point p, double rad) {
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

}  // namespace

Point RotatedGrid::to_working(Point source) const {
  const double rad = -angle_deg * std::numbers::pi / 180.0;
  const Point r = rotate({source.x - source_center.x, source.y - source_center.y}, rad);
  return {r.x + target_center.x, r.y + target_center.y};
}

Point RotatedGrid::to_source(Point working) const {
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const Point r = rotate({working.x - target_center.x, working.y - target_center.y}, rad);
  return {r.x + source_center.x, r.y + source_center.y};
}

RotatedGrid rotate_to_working_frame(const ClassifiedGrid& cgrid, double angle_deg) {
  RotatedGrid out;
  out.angle_deg = angle_deg;
  out.source_center = {cgrid.width() / 2.0, cgrid.height() / 2.0};
  if (angle_deg == 0.0) {
    out.grid = cgrid;
    out.target_center = out.source_center;
    return out;
  }
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::abs(std::cos(rad));
  const double s = std::abs(std::sin(rad));
  const int w = static_cast<int>(std::ceil(cgrid.width() * c + cgrid.height() * s - 1e-9));
  const int h = static_cast<int>(std::ceil(cgrid.width() * s + cgrid.height() * c - 1e-9));
  out.target_center = {w / 2.0, h / 2.0};
  std::vector<CellClass> classes(static_cast<std::size_t>(w) * h, CellClass::Unexplored);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Point src = out.to_source({x + 0.5, y + 0.5});
      const int sx = static_cast<int>(std::floor(src.x));
      const int sy = static_cast<int>(std::floor(src.y));
      if (sx >= 0 && sy >= 0 && sx < cgrid.width() && sy < cgrid.height()) {
        classes[static_cast<std::size_t>(y) * w + x] = cgrid.at(sx, sy);
      }
    }
  }
  out.grid = ClassifiedGrid(w, h, std::move(classes));
  return out;
}

double wall_weight(const ClassifiedGrid& cgrid, const Rect& room, WallSide side, double thickness) {
  const CellRect band = wall_of(Room{0, room}, side, thickness).band_cells().intersect(cgrid.bounds());
  if (band.empty()) return 0.0;
  return static_cast<double>(cgrid.count(band, CellClass::Occupied)) / static_cast<double>(band.area());
}

double room_weight(const ClassifiedGrid& cgrid, const Rect& room, double thickness) {
  double w = 1.0;
  for (WallSide s : kWallSides) w = std::min(w, wall_weight(cgrid, room, s, thickness));
  return w;
}

double door_weight(const ClassifiedGrid& cgrid, const World& world, const Door& door, const WorldGeometry& geom) {
  auto opening = door_opening(world, door, geom);
  if (!opening) return 0.0;
  const CellRect cells = opening->cells().intersect(cgrid.bounds());
  if (cells.empty()) return 0.0;
  return static_cast<double>(cgrid.count(cells, CellClass::Free)) / static_cast<double>(cells.area());
}

std::vector<WeightedLine> split_lines(const ClassifiedGrid& cgrid, const Room& room, const ModelParams& params) {
  std::vector<WeightedLine> out;
  const CellRect in = room.rect.shrunk(params.geometry.wall_thickness).cells().intersect(cgrid.bounds());
  if (in.empty()) return out;
  const int min_len = params.kernel.min_line_length;
  auto emit = [&](LineAxis axis, int fixed, int begin, int end) {
    if (end - begin >= min_len) {
      LineSegment seg{axis, fixed, begin, end};
      out.push_back({seg, seg.length()});
    }
  };
  for (int y = in.y0; y < in.y1; ++y) {
    int start = -1;
    for (int x = in.x0; x <= in.x1; ++x) {
      const bool occ = x < in.x1 && cgrid.at(x, y) == CellClass::Occupied;
      if (occ && start < 0) start = x;
      if (!occ && start >= 0) {
        emit(LineAxis::Row, y, start, x);
        start = -1;
      }
    }
  }
  for (int x = in.x0; x < in.x1; ++x) {
    int start = -1;
    for (int y = in.y0; y <= in.y1; ++y) {
      const bool occ = y < in.y1 && cgrid.at(x, y) == CellClass::Occupied;
      if (occ && start < 0) start = y;
      if (!occ && start >= 0) {
        emit(LineAxis::Column, x, start, y);
        start = -1;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const WeightedLine& a, const WeightedLine& b) { return a.segment < b.segment; });
  return out;
}

std::vector<DoorCandidate> door_candidates(const ClassifiedGrid& cgrid, const World& world, const ModelParams& params) {
  std::vector<DoorCandidate> out;
  const WorldGeometry& geom = params.geometry;
  const double t = geom.wall_thickness;
  for (std::size_t i = 0; i < world.rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < world.rooms.size(); ++j) {
      for (const SharedWall& sw : shared_walls(world.rooms[i], world.rooms[j], geom.adjacency_tolerance)) {
        const bool vertical = sw.axis == Axis::Vertical;
        const double lo = std::min(sw.edge_first, sw.edge_second) - t;
        const double hi = std::max(sw.edge_first, sw.edge_second) + t;
        // Across-wall cell range and along-wall cell range.
        const CellRect across_cells = Rect{lo, lo, hi, hi}.cells();
        const CellRect along_cells = Rect{sw.overlap0 + t, sw.overlap0 + t, sw.overlap1 - t, sw.overlap1 - t}.cells();
        const int limit_across = vertical ? cgrid.width() : cgrid.height();
        const int limit_along = vertical ? cgrid.height() : cgrid.width();
        const int c0 = std::max(across_cells.x0, 0);
        const int c1 = std::min(across_cells.x1, limit_across);
        const int a0 = std::max(along_cells.x0, 0);
        const int a1 = std::min(along_cells.x1, limit_along);
        if (c1 <= c0 || a1 <= a0) continue;

        std::vector<char> open(static_cast<std::size_t>(a1 - a0), 0);
        for (int a = a0; a < a1; ++a) {
          const CellRect cross = vertical ? CellRect{c0, a, c1, a + 1} : CellRect{a, c0, a + 1, c1};
          const long free = cgrid.count(cross, CellClass::Free);
          open[a - a0] = 2 * free >= cross.area() ? 1 : 0;
        }
        // Bridge single closed positions between open neighbours.
        std::vector<char> bridged = open;
        for (std::size_t k = 1; k + 1 < open.size(); ++k) {
          if (!open[k] && open[k - 1] && open[k + 1]) bridged[k] = 1;
        }
        int start = -1;
        for (int a = a0; a <= a1; ++a) {
          const bool is_open = a < a1 && bridged[a - a0];
          if (is_open && start < 0) start = a;
          if (!is_open && start >= 0) {
            const int len = a - start;
            if (len >= geom.door_min && len <= geom.door_max) {
              Door d{-1, sw.first, sw.second, sw.axis, static_cast<double>(start), static_cast<double>(a)};
              if (door_valid(world, d, geom)) out.push_back({d, door_weight(cgrid, world, d, geom)});
            }
            start = -1;
          }
        }
      }
    }
  }
  return out;
}

namespace {

struct GrowRect {
  int x0, y0, x1, y1;
};

class Grower {
 public:
  Grower(const MapEvidence& ev, int min_run)
      : ev_(ev),
        min_run_(min_run),
        t_(std::max(1, static_cast<int>(std::lround(ev.params().geometry.wall_thickness)))),
        cap_(ev.params().kernel.growth_cap) {}

  // One outward step of `side`; false once the side has stopped.
  bool step(GrowRect& r, WallSide side, int& steps) const {
    if (steps >= cap_) return false;
    const ClassifiedGrid& g = ev_.grid();
    LineAxis axis;
    int fixed, begin, end;
    if (side == WallSide::Left || side == WallSide::Right) {
      axis = LineAxis::Column;
      fixed = side == WallSide::Left ? r.x0 + t_ - 1 : r.x1 - t_;
      begin = r.y0 + t_;
      end = r.y1 - t_;
      if (end <= begin) {
        begin = r.y0;
        end = r.y1;
      }
    } else {
      axis = LineAxis::Row;
      fixed = side == WallSide::Top ? r.y0 + t_ - 1 : r.y1 - t_;
      begin = r.x0 + t_;
      end = r.x1 - t_;
      if (end <= begin) {
        begin = r.x0;
        end = r.x1;
      }
    }
    if (ev_.line_has_run(axis, fixed, begin, end, min_run_)) return false;
    const CellRect line = axis == LineAxis::Column ? CellRect{fixed, begin, fixed + 1, end}
                                                   : CellRect{begin, fixed, end, fixed + 1};
    if (g.count(line, CellClass::Unexplored) == line.area()) return false;
    switch (side) {
      case WallSide::Left:
        if (r.x0 <= 0) return false;
        --r.x0;
        break;
      case WallSide::Right:
        if (r.x1 >= g.width()) return false;
        ++r.x1;
        break;
      case WallSide::Top:
        if (r.y0 <= 0) return false;
        --r.y0;
        break;
      case WallSide::Bottom:
        if (r.y1 >= g.height()) return false;
        ++r.y1;
        break;
    }
    ++steps;
    return true;
  }

  GrowRect grow(GrowRect r, GrowthOrder order) const {
    std::array<int, 4> steps{};
    auto run_side = [&](WallSide s) {
      while (step(r, s, steps[static_cast<int>(s)])) {
      }
    };
    switch (order) {
      case GrowthOrder::HorizontalFirst:
        for (WallSide s : kWallSides) run_side(s);
        break;
      case GrowthOrder::VerticalFirst:
        for (WallSide s : {WallSide::Top, WallSide::Bottom, WallSide::Left, WallSide::Right}) run_side(s);
        break;
      case GrowthOrder::RoundRobin: {
        std::array<bool, 4> active{true, true, true, true};
        bool any = true;
        while (any) {
          any = false;
          for (WallSide s : kWallSides) {
            auto& a = active[static_cast<int>(s)];
            if (a) a = step(r, s, steps[static_cast<int>(s)]);
            any = any || a;
          }
        }
        break;
      }
    }
    return r;
  }

 private:
  const MapEvidence& ev_;
  int min_run_;
  int t_;
  int cap_;
};

}  // namespace

std::vector<RoomCandidate> room_candidates(const MapEvidence& evidence, Point pose) {
  const ClassifiedGrid& g = evidence.grid();
  const ModelParams& params = evidence.params();
  std::vector<RoomCandidate> out;
  const int px = static_cast<int>(std::floor(pose.x));
  const int py = static_cast<int>(std::floor(pose.y));
  if (px < 0 || py < 0 || px >= g.width() || py >= g.height()) return out;
  if (g.at(px, py) == CellClass::Occupied) return out;
  const int m = static_cast<int>(std::ceil(params.geometry.min_room_size));
  if (m > g.width() || m > g.height()) return out;

  GrowRect base;
  base.x0 = std::clamp(px - m / 2, 0, g.width() - m);
  base.y0 = std::clamp(py - m / 2, 0, g.height() - m);
  base.x1 = base.x0 + m;
  base.y1 = base.y0 + m;

  std::vector<GrowRect> rects{base};
  for (int v = 0; v + 2 <= params.kernel.candidates; ++v) {
    rects.push_back(Grower(evidence, growth_run_length(v)).grow(base, growth_order(v)));
  }
  const double t = params.geometry.wall_thickness;
  double sum = 0.0;
  for (const GrowRect& r : rects) {
    Rect rect{static_cast<double>(r.x0), static_cast<double>(r.y0), static_cast<double>(r.x1),
              static_cast<double>(r.y1)};
    const double w = room_weight(g, rect, t);
    sum += w;
    out.push_back({rect, w, 0.0});
  }
  for (RoomCandidate& c : out) c.normalized = sum > 0.0 ? c.weight / sum : 0.0;
  std::sort(out.begin(), out.end(), [](const RoomCandidate& a, const RoomCandidate& b) { return a.rect < b.rect; });
  return out;
}

}  // namespace floorgraph
