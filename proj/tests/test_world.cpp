#include <doctest.h>

#include <random>

#include "floorgraph/testkit.hpp"
#include "floorgraph/world.hpp"
#include "oracles.hpp"

using namespace floorgraph;

namespace {

Rect R(double x0, double y0, double x1, double y1) { return {x0, y0, x1, y1}; }

World two_rooms(bool door) {
  World w;
  w.rooms = {{0, R(0, 0, 10, 12)}, {1, R(10, 0, 20, 12)}};
  if (door) w.doors = {{2, 0, 1, Axis::Vertical, 4, 8}};
  w.next_id = 3;
  return w;
}

const GraphEdge* edge(const SceneGraph& g, int a, int b) {
  for (const GraphEdge& e : g.edges) {
    if (e.room_a == std::min(a, b) && e.room_b == std::max(a, b)) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("empty world rasterizes to unknown") {
  const ClassifiedGrid g = rasterize(World{}, 7, 5, WorldGeometry{});
  CHECK(g.count(g.bounds(), CellClass::Unexplored) == 35);
}

TEST_CASE("single room with unit walls") {
  WorldGeometry geom;
  geom.wall_thickness = 1.0;
  World w;
  w.rooms = {{0, R(2, 3, 12, 13)}};
  const ClassifiedGrid g = rasterize(w, 16, 16, geom);
  CHECK(g.count({3, 4, 11, 12}, CellClass::Free) == 64);
  CHECK(g.count({2, 3, 12, 13}, CellClass::Occupied) == 100 - 64);
  CHECK(g.count(g.bounds(), CellClass::Unexplored) == 256 - 100);
}

TEST_CASE("door opening is free inside the shared wall band") {
  const WorldGeometry geom;
  const World w = two_rooms(true);
  const ClassifiedGrid g = rasterize(w, 20, 12, geom);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 20; ++x) CHECK(g.at(x, y) == oracle::predicted(w, geom, x, y));
  }
  // Shared band is x in [8, 12); the door spans y in [4, 8).
  CHECK(g.count({8, 4, 12, 8}, CellClass::Free) == 16);
  CHECK(g.count({8, 2, 12, 4}, CellClass::Occupied) == 8);
  CHECK(g.count({8, 8, 12, 10}, CellClass::Occupied) == 8);
}

TEST_CASE("rasterize agrees with the per-cell oracle on random worlds") {
  std::mt19937_64 rng(21);
  const WorldGeometry geom;
  long mismatches = 0, doors = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const World w = oracle::random_world(32, rng);
    doors += static_cast<long>(w.doors.size());
    const ClassifiedGrid g = rasterize(w, 32, 32, geom);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) mismatches += g.at(x, y) != oracle::predicted(w, geom, x, y);
    }
  }
  CHECK(mismatches == 0);
  CHECK(doors > 100);
}

TEST_CASE("overlap counts") {
  World w;
  w.rooms = {{0, R(0, 0, 10, 10)}, {1, R(7, 7, 20, 20)}};
  CHECK(overlap_count(w, 25, 25) == 0);
  CHECK(overlap_count(w, 2, 2) == 1);
  int patch = 0;
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 30; ++x) patch += overlap_count(w, x, y) == 2;
  }
  CHECK(patch == 9);
  CHECK(overlap_excess(w) == 9);
}

TEST_CASE("overlap excess matches the cell loop") {
  std::mt19937_64 rng(5);
  const ModelParams p;
  for (int trial = 0; trial < 200; ++trial) {
    const World w = oracle::random_world(32, rng);
    long excess = 0, doubly = 0;
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const int s = overlap_count(w, x, y);
        excess += std::max(s - 1, 0);
        doubly += s > 1;
      }
    }
    CHECK(overlap_excess(w) == excess);
    if (w.rooms.size() == 2) {
      const Rect& a = w.rooms[0].rect;
      const Rect& b = w.rooms[1].rect;
      const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
      const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
      CHECK(doubly == static_cast<long>(ix * iy));
    }
  }
}

TEST_CASE("walls follow the room rectangle") {
  const Room r{0, R(0, 0, 3, 4)};
  const Wall left = wall_of(r, WallSide::Left, 2.0);
  CHECK(left.p0 == Point{0, 0});
  CHECK(left.p1 == Point{0, 4});
  CHECK(left.length() == 4.0);
  CHECK(wall_of(r, WallSide::Bottom, 2.0).length() == 3.0);
  CHECK(left.band_cells() == CellRect{0, 0, 2, 4});
}

TEST_CASE("door validity") {
  const WorldGeometry geom;
  World w = two_rooms(true);
  CHECK(door_valid(w, w.doors[0], geom));
  Door too_long = w.doors[0];
  too_long.span0 = 2;
  too_long.span1 = 10;
  CHECK(door_valid(w, too_long, geom));
  too_long.span0 = 1;
  CHECK_FALSE(door_valid(w, too_long, geom));  // reaches into the corner
  Door short_door = w.doors[0];
  short_door.span1 = short_door.span0 + 2;
  CHECK_FALSE(door_valid(w, short_door, geom));
  Door wrong_axis = w.doors[0];
  wrong_axis.axis = Axis::Horizontal;
  CHECK_FALSE(door_valid(w, wrong_axis, geom));
  w.rooms[1].rect = R(14, 0, 24, 12);  // gap of 4 exceeds the tolerance
  CHECK_FALSE(door_valid(w, w.doors[0], geom));
  w.rooms[1].rect = R(13, 0, 23, 12);
  CHECK(door_valid(w, w.doors[0], geom));
}

TEST_CASE("scene graph of one room") {
  World w;
  w.rooms = {{0, R(0, 0, 20, 20)}};
  const SceneGraph g = build_scene_graph(w, WorldGeometry{});
  CHECK(g.rooms.size() == 1);
  CHECK(g.edges.empty());
  CHECK(g.boundary_rooms == std::vector<int>{0});
  CHECK(g.rooms[0].boundary_sides.size() == 4);
}

TEST_CASE("scene graph of two rooms") {
  const SceneGraph plain = build_scene_graph(two_rooms(false), WorldGeometry{});
  REQUIRE(plain.edges.size() == 1);
  CHECK(plain.edges[0].label == EdgeLabel::Adjacent);
  const SceneGraph joined = build_scene_graph(two_rooms(true), WorldGeometry{});
  REQUIRE(joined.edges.size() == 1);
  CHECK(joined.edges[0].label == EdgeLabel::Connected);
  CHECK(joined.edges[0].doors == std::vector<int>{2});
  const auto doc = export_scene_graph(joined);
  CHECK(doc["edges"][0]["label"] == "connected");
  CHECK(doc["edges"][0]["doors"][0] == 2);
}

TEST_CASE("four-room layout labels connected and adjacent pairs") {
  // 1 | 2      doors 1-2, 1-3, 3-4; 2 and 4 are neighbours without a door;
  // --+--      diagonal pairs share no wall.
  // 3 | 4
  World w;
  w.rooms = {{1, R(0, 0, 30, 20)}, {2, R(30, 0, 60, 20)}, {3, R(0, 20, 30, 45)}, {4, R(30, 20, 60, 45)}};
  w.doors = {{10, 1, 2, Axis::Vertical, 6, 12}, {11, 1, 3, Axis::Horizontal, 10, 16}, {12, 3, 4, Axis::Vertical, 30, 36}};
  w.next_id = 13;
  const SceneGraph g = build_scene_graph(w, WorldGeometry{});
  CHECK(g.edges.size() == 4);
  CHECK(edge(g, 1, 2)->label == EdgeLabel::Connected);
  CHECK(edge(g, 1, 3)->label == EdgeLabel::Connected);
  CHECK(edge(g, 3, 4)->label == EdgeLabel::Connected);
  CHECK(edge(g, 2, 4)->label == EdgeLabel::Adjacent);
  CHECK(edge(g, 1, 4) == nullptr);
  CHECK(edge(g, 2, 3) == nullptr);
  CHECK(g.boundary_rooms == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("scene graph JSON") {
  const auto empty = export_scene_graph(build_scene_graph(World{}, WorldGeometry{}));
  CHECK(empty["rooms"].empty());
  CHECK(empty["unexplored"]["id"] == "unexplored");

  const ModelParams p;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SyntheticWorld sw = gen_world(seed, WorldSpec{});
    const SceneGraph g = build_scene_graph(sw.world, p.geometry);
    const SceneGraph back = import_scene_graph(nlohmann::json::parse(export_scene_graph(g).dump()));
    CHECK(back == g);
    CHECK(structurally_equal(world_from_graph(back), sw.world));
  }
  CHECK_THROWS_AS(import_scene_graph(nlohmann::json::parse(R"({"rooms": [{"id": 1, "rect": [0, 0]}]})")),
                  FormatError);
}

TEST_CASE("structural equality ignores ids") {
  World a = two_rooms(true);
  World b;
  b.rooms = {{7, R(10, 0, 20, 12)}, {5, R(0, 0, 10, 12)}};
  b.doors = {{9, 7, 5, Axis::Vertical, 4, 8}};
  CHECK(structurally_equal(a, b));
  b.doors[0].span1 = 9;
  CHECK_FALSE(structurally_equal(a, b));
}
