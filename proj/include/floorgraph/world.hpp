#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "floorgraph/grid.hpp"

namespace floorgraph {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned rectangle in continuous cell coordinates of the working frame.
// A cell (x, y) belongs to the rectangle when its center (x + .5, y + .5) lies
// in the closed rectangle.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  Point center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
  bool contains_center(int x, int y) const {
    return x0 <= x + 0.5 && x + 0.5 <= x1 && y0 <= y + 0.5 && y + 0.5 <= y1;
  }
  // Cells whose centers lie inside, as a half-open range (may be empty).
  CellRect cells() const;
  Rect shrunk(double by) const { return {x0 + by, y0 + by, x1 - by, y1 - by}; }

  friend bool operator==(const Rect&, const Rect&) = default;
  friend auto operator<=>(const Rect&, const Rect&) = default;
};

enum class WallSide : std::uint8_t { Left = 0, Right = 1, Top = 2, Bottom = 3 };
inline constexpr std::array<WallSide, 4> kWallSides = {WallSide::Left, WallSide::Right, WallSide::Top,
                                                       WallSide::Bottom};
const char* to_string(WallSide side);

// Orientation of the wall line a door sits on. A door on a Vertical wall
// spans a y-interval; one on a Horizontal wall spans an x-interval.
enum class Axis : std::uint8_t { Vertical = 0, Horizontal = 1 };

struct Room {
  int id = 0;
  Rect rect;
};

// Walls are derived from the room rectangle, never stored.
struct Wall {
  int room = 0;
  WallSide side = WallSide::Left;
  Point p0;
  Point p1;
  double thickness = 0.0;

  double length() const;
  // Band of cells making up the wall inside the room rectangle.
  CellRect band_cells() const;
};

Wall wall_of(const Room& room, WallSide side, double thickness);

struct Door {
  int id = 0;
  int room_a = 0;
  int room_b = 0;
  Axis axis = Axis::Vertical;
  double span0 = 0.0;  // along-wall extent
  double span1 = 0.0;

  double length() const { return span1 - span0; }
};

struct WorldGeometry {
  double wall_thickness = 2.0;       // t_w
  double adjacency_tolerance = 3.0;  // tau_adj
  double door_min = 3.0;             // d_min
  double door_max = 12.0;            // d_max
  double min_room_size = 12.0;
};

struct World {
  std::vector<Room> rooms;
  std::vector<Door> doors;
  double orientation_deg = 0.0;
  int next_id = 0;

  const Room* find_room(int id) const;
  const Door* find_door(int id) const;
  int door_count(int room_id) const;
  int allocate_id() { return next_id++; }
};

// Two rooms whose facing edges lie within the adjacency tolerance and whose
// extents overlap along the wall.
struct SharedWall {
  Axis axis = Axis::Vertical;
  int first = 0;         // room on the low-coordinate side (left / top)
  int second = 0;        // room on the high-coordinate side
  double edge_first = 0;   // first.x1 (or y1)
  double edge_second = 0;  // second.x0 (or y0)
  double overlap0 = 0;   // common along-wall extent
  double overlap1 = 0;

  double line() const { return (edge_first + edge_second) / 2.0; }
};

std::optional<SharedWall> shared_wall(const Room& a, const Room& b, Axis axis, double tolerance);
std::vector<SharedWall> shared_walls(const Room& a, const Room& b, double tolerance);

// The continuous region a door opens: both rooms' wall bands across the span.
std::optional<Rect> door_opening(const World& world, const Door& door, const WorldGeometry& geom);
std::pair<Point, Point> door_segment(const World& world, const Door& door);

bool door_valid(const World& world, const Door& door, const WorldGeometry& geom);
bool room_valid(const Room& room, const WorldGeometry& geom, int width, int height);
bool world_valid(const World& world, const WorldGeometry& geom, int width, int height);

// Paints predicted classes for the cells of `region` into `out` (row-major,
// region.width() per row). Precedence: door opening > wall band > interior.
void paint_predicted(const World& world, const WorldGeometry& geom, const CellRect& region,
                     std::span<CellClass> out);

ClassifiedGrid rasterize(const World& world, int width, int height, const WorldGeometry& geom);

// sigma(c): number of rooms whose closed rectangle contains the cell center.
int overlap_count(const World& world, int x, int y);

// Sum over cells of max(sigma - 1, 0).
long overlap_excess(const World& world);

// Id-free equality: same rectangles, same doors between the same rectangles.
bool structurally_equal(const World& a, const World& b);

enum class EdgeLabel : std::uint8_t { Connected, Adjacent };
const char* to_string(EdgeLabel label);

struct GraphRoom {
  int id = 0;
  Rect rect;
  std::vector<WallSide> boundary_sides;
  friend bool operator==(const GraphRoom&, const GraphRoom&) = default;
};

struct GraphDoor {
  int id = 0;
  int room_a = 0;
  int room_b = 0;
  Point p0;
  Point p1;
  friend bool operator==(const GraphDoor&, const GraphDoor&) = default;
};

struct GraphEdge {
  int room_a = 0;  // room_a < room_b
  int room_b = 0;
  EdgeLabel label = EdgeLabel::Adjacent;
  std::vector<int> doors;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

// Rooms plus a single aggregate unexplored node; rooms with at least one
// boundary wall hang off the unexplored node.
struct SceneGraph {
  double orientation_deg = 0.0;
  std::vector<GraphRoom> rooms;
  std::vector<GraphDoor> doors;
  std::vector<GraphEdge> edges;
  std::vector<int> boundary_rooms;
  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

SceneGraph build_scene_graph(const World& world, const WorldGeometry& geom);
nlohmann::ordered_json export_scene_graph(const SceneGraph& graph);
SceneGraph import_scene_graph(const nlohmann::json& doc);  // throws FormatError
World world_from_graph(const SceneGraph& graph);

}  // namespace floorgraph
