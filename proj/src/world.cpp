#include "floorgraph/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace floorgraph {

CellRect Rect::cells() const {
  const int cx0 = static_cast<int>(std::ceil(x0 - 0.5));
  const int cy0 = static_cast<int>(std::ceil(y0 - 0.5));
  const int cx1 = static_cast<int>(std::floor(x1 - 0.5)) + 1;
  const int cy1 = static_cast<int>(std::floor(y1 - 0.5)) + 1;
  return {cx0, cy0, std::max(cx0, cx1), std::max(cy0, cy1)};
}

const char* to_string(WallSide side) {
  switch (side) {
    case WallSide::Left: return "left";
    case WallSide::Right: return "right";
    case WallSide::Top: return "top";
    case WallSide::Bottom: return "bottom";
  }
  return "?";
}

const char* to_string(EdgeLabel label) {
  return label == EdgeLabel::Connected ? "connected" : "adjacent";
}

double Wall::length() const { return std::hypot(p0.x - p1.x, p0.y - p1.y); }

CellRect Wall::band_cells() const {
  Rect band;
  switch (side) {
    case WallSide::Left: band = {p0.x, p0.y, p0.x + thickness, p1.y}; break;
    case WallSide::Right: band = {p0.x - thickness, p0.y, p0.x, p1.y}; break;
    case WallSide::Top: band = {p0.x, p0.y, p1.x, p0.y + thickness}; break;
    case WallSide::Bottom: band = {p0.x, p0.y - thickness, p1.x, p0.y}; break;
  }
  return band.cells();
}

Wall wall_of(const Room& room, WallSide side, double thickness) {
  const Rect& r = room.rect;
  Wall w{room.id, side, {}, {}, thickness};
  switch (side) {
    case WallSide::Left: w.p0 = {r.x0, r.y0}; w.p1 = {r.x0, r.y1}; break;
    case WallSide::Right: w.p0 = {r.x1, r.y0}; w.p1 = {r.x1, r.y1}; break;
    case WallSide::Top: w.p0 = {r.x0, r.y0}; w.p1 = {r.x1, r.y0}; break;
    case WallSide::Bottom: w.p0 = {r.x0, r.y1}; w.p1 = {r.x1, r.y1}; break;
  }
  return w;
}

const Room* World::find_room(int id) const {
  auto it = std::find_if(rooms.begin(), rooms.end(), [id](const Room& r) { return r.id == id; });
  return it == rooms.end() ? nullptr : &*it;
}

const Door* World::find_door(int id) const {
  auto it = std::find_if(doors.begin(), doors.end(), [id](const Door& d) { return d.id == id; });
  return it == doors.end() ? nullptr : &*it;
}

int World::door_count(int room_id) const {
  return static_cast<int>(std::count_if(doors.begin(), doors.end(), [room_id](const Door& d) {
    return d.room_a == room_id || d.room_b == room_id;
  }));
}

std::optional<SharedWall> shared_wall(const Room& a, const Room& b, Axis axis, double tolerance) {
  const bool vertical = axis == Axis::Vertical;
  const double ca = vertical ? a.rect.center().x : a.rect.center().y;
  const double cb = vertical ? b.rect.center().x : b.rect.center().y;
  if (ca == cb) return std::nullopt;
  const Room& lo = ca < cb ? a : b;
  const Room& hi = ca < cb ? b : a;
  SharedWall sw;
  sw.axis = axis;
  sw.first = lo.id;
  sw.second = hi.id;
  sw.edge_first = vertical ? lo.rect.x1 : lo.rect.y1;
  sw.edge_second = vertical ? hi.rect.x0 : hi.rect.y0;
  if (std::abs(sw.edge_first - sw.edge_second) > tolerance) return std::nullopt;
  sw.overlap0 = vertical ? std::max(lo.rect.y0, hi.rect.y0) : std::max(lo.rect.x0, hi.rect.x0);
  sw.overlap1 = vertical ? std::min(lo.rect.y1, hi.rect.y1) : std::min(lo.rect.x1, hi.rect.x1);
  if (sw.overlap1 <= sw.overlap0) return std::nullopt;
  return sw;
}

std::vector<SharedWall> shared_walls(const Room& a, const Room& b, double tolerance) {
  std::vector<SharedWall> out;
  for (Axis axis : {Axis::Vertical, Axis::Horizontal}) {
    if (auto sw = shared_wall(a, b, axis, tolerance)) out.push_back(*sw);
  }
  return out;
}

namespace {

std::optional<SharedWall> door_wall(const World& world, const Door& door, double tolerance) {
  const Room* a = world.find_room(door.room_a);
  const Room* b = world.find_room(door.room_b);
  if (!a || !b || a == b) return std::nullopt;
  return shared_wall(*a, *b, door.axis, tolerance);
}

}  // namespace

std::optional<Rect> door_opening(const World& world, const Door& door, const WorldGeometry& geom) {
  auto sw = door_wall(world, door, geom.adjacency_tolerance);
  if (!sw) return std::nullopt;
  const double t = geom.wall_thickness;
  const double lo = std::min(sw->edge_first, sw->edge_second) - t;
  const double hi = std::max(sw->edge_first, sw->edge_second) + t;
  if (door.axis == Axis::Vertical) return Rect{lo, door.span0, hi, door.span1};
  return Rect{door.span0, lo, door.span1, hi};
}

std::pair<Point, Point> door_segment(const World& world, const Door& door) {
  double line = 0.0;
  if (auto sw = door_wall(world, door, std::numeric_limits<double>::infinity())) line = sw->line();
  if (door.axis == Axis::Vertical) return {{line, door.span0}, {line, door.span1}};
  return {{door.span0, line}, {door.span1, line}};
}

bool door_valid(const World& world, const Door& door, const WorldGeometry& geom) {
  auto sw = door_wall(world, door, geom.adjacency_tolerance);
  if (!sw) return false;
  const double len = door.length();
  if (len < geom.door_min || len > geom.door_max) return false;
  return door.span0 >= sw->overlap0 + geom.wall_thickness && door.span1 <= sw->overlap1 - geom.wall_thickness;
}

bool room_valid(const Room& room, const WorldGeometry& geom, int width, int height) {
  const Rect& r = room.rect;
  return r.x0 >= 0 && r.y0 >= 0 && r.x1 <= width && r.y1 <= height && r.width() >= geom.min_room_size &&
         r.height() >= geom.min_room_size;
}

bool world_valid(const World& world, const WorldGeometry& geom, int width, int height) {
  for (std::size_t i = 0; i < world.rooms.size(); ++i) {
    if (!room_valid(world.rooms[i], geom, width, height)) return false;
    for (std::size_t j = i + 1; j < world.rooms.size(); ++j) {
      if (world.rooms[i].id == world.rooms[j].id || world.rooms[i].rect == world.rooms[j].rect) return false;
    }
  }
  for (std::size_t i = 0; i < world.doors.size(); ++i) {
    if (!door_valid(world, world.doors[i], geom)) return false;
    for (std::size_t j = i + 1; j < world.doors.size(); ++j) {
      if (world.doors[i].id == world.doors[j].id) return false;
    }
  }
  return true;
}

namespace {

void fill(std::span<CellClass> out, const CellRect& region, const CellRect& r, CellClass c) {
  const CellRect clip = r.intersect(region);
  if (clip.empty()) return;
  const int stride = region.width();
  for (int y = clip.y0; y < clip.y1; ++y) {
    auto row = out.begin() + static_cast<std::ptrdiff_t>(y - region.y0) * stride;
    std::fill(row + (clip.x0 - region.x0), row + (clip.x1 - region.x0), c);
  }
}

}  // namespace

void paint_predicted(const World& world, const WorldGeometry& geom, const CellRect& region,
                     std::span<CellClass> out) {
  std::fill(out.begin(), out.begin() + region.area(), CellClass::Unexplored);
  const double t = geom.wall_thickness;
  for (const Room& room : world.rooms) {
    fill(out, region, room.rect.shrunk(t).cells(), CellClass::Free);
  }
  for (const Room& room : world.rooms) {
    const CellRect rc = room.rect.cells();
    if (rc.intersect(region).empty()) continue;
    CellRect ic = room.rect.shrunk(t).cells().intersect(rc);
    if (ic.empty()) {
      fill(out, region, rc, CellClass::Occupied);
      continue;
    }
    fill(out, region, {rc.x0, rc.y0, rc.x1, ic.y0}, CellClass::Occupied);
    fill(out, region, {rc.x0, ic.y1, rc.x1, rc.y1}, CellClass::Occupied);
    fill(out, region, {rc.x0, ic.y0, ic.x0, ic.y1}, CellClass::Occupied);
    fill(out, region, {ic.x1, ic.y0, rc.x1, ic.y1}, CellClass::Occupied);
  }
  for (const Door& door : world.doors) {
    if (auto opening = door_opening(world, door, geom)) fill(out, region, opening->cells(), CellClass::Free);
  }
}

ClassifiedGrid rasterize(const World& world, int width, int height, const WorldGeometry& geom) {
  const CellRect region{0, 0, width, height};
  std::vector<CellClass> classes(static_cast<std::size_t>(region.area()));
  paint_predicted(world, geom, region, classes);
  return ClassifiedGrid(width, height, std::move(classes));
}

int overlap_count(const World& world, int x, int y) {
  return static_cast<int>(std::count_if(world.rooms.begin(), world.rooms.end(),
                                        [&](const Room& r) { return r.rect.contains_center(x, y); }));
}

long overlap_excess(const World& world) {
  std::vector<CellRect> rects;
  rects.reserve(world.rooms.size());
  for (const Room& r : world.rooms) {
    CellRect c = r.rect.cells();
    if (!c.empty()) rects.push_back(c);
  }
  bool any = false;
  for (std::size_t i = 0; i < rects.size() && !any; ++i) {
    for (std::size_t j = i + 1; j < rects.size() && !any; ++j) any = !rects[i].intersect(rects[j]).empty();
  }
  if (!any) return 0;

  // Coordinate-compressed union area.
  std::vector<int> xs, ys;
  long total = 0;
  for (const CellRect& c : rects) {
    xs.insert(xs.end(), {c.x0, c.x1});
    ys.insert(ys.end(), {c.y0, c.y1});
    total += c.area();
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  long uni = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const bool covered = std::any_of(rects.begin(), rects.end(), [&](const CellRect& c) {
        return c.x0 <= xs[i] && xs[i + 1] <= c.x1 && c.y0 <= ys[j] && ys[j + 1] <= c.y1;
      });
      if (covered) uni += static_cast<long>(xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  }
  return total - uni;
}

namespace {

using DoorKey = std::tuple<int, double, double, Rect, Rect>;

std::vector<DoorKey> door_keys(const World& w) {
  std::vector<DoorKey> keys;
  for (const Door& d : w.doors) {
    const Room* a = w.find_room(d.room_a);
    const Room* b = w.find_room(d.room_b);
    Rect ra = a ? a->rect : Rect{};
    Rect rb = b ? b->rect : Rect{};
    if (rb < ra) std::swap(ra, rb);
    keys.emplace_back(static_cast<int>(d.axis), d.span0, d.span1, ra, rb);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<Rect> room_rects(const World& w) {
  std::vector<Rect> rects;
  for (const Room& r : w.rooms) rects.push_back(r.rect);
  std::sort(rects.begin(), rects.end());
  return rects;
}

}  // namespace

bool structurally_equal(const World& a, const World& b) {
  return a.orientation_deg == b.orientation_deg && room_rects(a) == room_rects(b) && door_keys(a) == door_keys(b);
}

SceneGraph build_scene_graph(const World& world, const WorldGeometry& geom) {
  SceneGraph g;
  g.orientation_deg = world.orientation_deg;
  std::vector<Room> rooms = world.rooms;
  std::sort(rooms.begin(), rooms.end(), [](const Room& a, const Room& b) { return a.id < b.id; });

  std::map<int, std::array<bool, 4>> touched;
  for (const Room& r : rooms) touched[r.id] = {false, false, false, false};

  for (std::size_t i = 0; i < rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < rooms.size(); ++j) {
      const auto walls = shared_walls(rooms[i], rooms[j], geom.adjacency_tolerance);
      for (const SharedWall& sw : walls) {
        const bool vertical = sw.axis == Axis::Vertical;
        touched[sw.first][static_cast<int>(vertical ? WallSide::Right : WallSide::Bottom)] = true;
        touched[sw.second][static_cast<int>(vertical ? WallSide::Left : WallSide::Top)] = true;
      }
      std::vector<int> joining;
      for (const Door& d : world.doors) {
        if ((d.room_a == rooms[i].id && d.room_b == rooms[j].id) ||
            (d.room_a == rooms[j].id && d.room_b == rooms[i].id)) {
          joining.push_back(d.id);
        }
      }
      std::sort(joining.begin(), joining.end());
      if (!joining.empty()) {
        g.edges.push_back({rooms[i].id, rooms[j].id, EdgeLabel::Connected, joining});
      } else if (!walls.empty()) {
        g.edges.push_back({rooms[i].id, rooms[j].id, EdgeLabel::Adjacent, {}});
      }
    }
  }

  for (const Room& r : rooms) {
    GraphRoom node{r.id, r.rect, {}};
    for (WallSide s : kWallSides) {
      if (!touched[r.id][static_cast<int>(s)]) node.boundary_sides.push_back(s);
    }
    if (!node.boundary_sides.empty()) g.boundary_rooms.push_back(r.id);
    g.rooms.push_back(std::move(node));
  }

  std::vector<Door> doors = world.doors;
  std::sort(doors.begin(), doors.end(), [](const Door& a, const Door& b) { return a.id < b.id; });
  for (const Door& d : doors) {
    auto [p0, p1] = door_segment(world, d);
    g.doors.push_back({d.id, std::min(d.room_a, d.room_b), std::max(d.room_a, d.room_b), p0, p1});
  }
  return g;
}

nlohmann::ordered_json export_scene_graph(const SceneGraph& g) {
  using json = nlohmann::ordered_json;
  json doc;
  doc["orientation_deg"] = g.orientation_deg;
  doc["unexplored"] = {{"id", "unexplored"}, {"boundary_rooms", g.boundary_rooms}};
  json rooms = json::array();
  for (const GraphRoom& r : g.rooms) {
    json sides = json::array();
    for (WallSide s : r.boundary_sides) sides.push_back(to_string(s));
    rooms.push_back({{"id", r.id}, {"rect", {r.rect.x0, r.rect.y0, r.rect.x1, r.rect.y1}}, {"boundary_sides", sides}});
  }
  doc["rooms"] = rooms;
  json doors = json::array();
  for (const GraphDoor& d : g.doors) {
    doors.push_back({{"id", d.id},
                     {"rooms", {d.room_a, d.room_b}},
                     {"segment", {{d.p0.x, d.p0.y}, {d.p1.x, d.p1.y}}}});
  }
  doc["doors"] = doors;
  json edges = json::array();
  for (const GraphEdge& e : g.edges) {
    json edge = {{"rooms", {e.room_a, e.room_b}}, {"label", to_string(e.label)}};
    if (e.label == EdgeLabel::Connected) edge["doors"] = e.doors;
    edges.push_back(edge);
  }
  doc["edges"] = edges;
  return doc;
}

namespace {

WallSide side_from_string(const std::string& s) {
  for (WallSide side : kWallSides) {
    if (s == to_string(side)) return side;
  }
  throw FormatError("unknown wall side '" + s + "'");
}

}  // namespace

SceneGraph import_scene_graph(const nlohmann::json& doc) {
  SceneGraph g;
  try {
    g.orientation_deg = doc.value("orientation_deg", 0.0);
    for (const auto& r : doc.at("rooms")) {
      const auto& rect = r.at("rect");
      if (!rect.is_array() || rect.size() != 4) throw FormatError("room rect must have 4 numbers");
      GraphRoom node{r.at("id").get<int>(),
                     {rect[0].get<double>(), rect[1].get<double>(), rect[2].get<double>(), rect[3].get<double>()},
                     {}};
      if (r.contains("boundary_sides")) {
        for (const auto& s : r.at("boundary_sides")) node.boundary_sides.push_back(side_from_string(s.get<std::string>()));
      }
      g.rooms.push_back(std::move(node));
    }
    for (const auto& d : doc.at("doors")) {
      const auto& rooms = d.at("rooms");
      const auto& seg = d.at("segment");
      if (rooms.size() != 2 || seg.size() != 2) throw FormatError("door needs two rooms and two endpoints");
      g.doors.push_back({d.at("id").get<int>(), rooms[0].get<int>(), rooms[1].get<int>(),
                         {seg[0][0].get<double>(), seg[0][1].get<double>()},
                         {seg[1][0].get<double>(), seg[1][1].get<double>()}});
    }
    for (const auto& e : doc.at("edges")) {
      const auto& rooms = e.at("rooms");
      if (rooms.size() != 2) throw FormatError("edge needs two rooms");
      const std::string label = e.at("label").get<std::string>();
      GraphEdge edge{rooms[0].get<int>(), rooms[1].get<int>(), EdgeLabel::Adjacent, {}};
      if (label == "connected") {
        edge.label = EdgeLabel::Connected;
        if (e.contains("doors")) edge.doors = e.at("doors").get<std::vector<int>>();
      } else if (label != "adjacent") {
        throw FormatError("unknown edge label '" + label + "'");
      }
      g.edges.push_back(std::move(edge));
    }
    if (doc.contains("unexplored")) {
      g.boundary_rooms = doc.at("unexplored").value("boundary_rooms", std::vector<int>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scene graph: ") + e.what());
  }
  return g;
}

World world_from_graph(const SceneGraph& g) {
  World w;
  w.orientation_deg = g.orientation_deg;
  int max_id = -1;
  for (const GraphRoom& r : g.rooms) {
    w.rooms.push_back({r.id, r.rect});
    max_id = std::max(max_id, r.id);
  }
  for (const GraphDoor& d : g.doors) {
    Door door{d.id, d.room_a, d.room_b, Axis::Vertical, 0, 0};
    if (d.p0.x == d.p1.x) {
      door.axis = Axis::Vertical;
      door.span0 = std::min(d.p0.y, d.p1.y);
      door.span1 = std::max(d.p0.y, d.p1.y);
    } else {
      door.axis = Axis::Horizontal;
      door.span0 = std::min(d.p0.x, d.p1.x);
      door.span1 = std::max(d.p0.x, d.p1.x);
    }
    w.doors.push_back(door);
    max_id = std::max(max_id, d.id);
  }
  w.next_id = max_id + 1;
  return w;
}

}  // namespace floorgraph
