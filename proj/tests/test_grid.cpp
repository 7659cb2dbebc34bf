#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "floorgraph/detect.hpp"
#include "floorgraph/grid.hpp"
#include "floorgraph/io.hpp"
#include "floorgraph/testkit.hpp"
#include "oracles.hpp"

using namespace floorgraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "floorgraph_test_grid";
  fs::create_directories(dir);
  return dir / name;
}

ClassifiedGrid uniform_grid(int w, int h, CellClass c) {
  return ClassifiedGrid(w, h, std::vector<CellClass>(static_cast<std::size_t>(w) * h, c));
}

// Nearest-neighbour rotation by +deg (x right, y down) onto a square canvas.
ClassifiedGrid rotated(const ClassifiedGrid& src, double deg, int side) {
  const double a = deg * std::numbers::pi / 180.0;
  std::vector<CellClass> out(static_cast<std::size_t>(side) * side, CellClass::Unexplored);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double dx = x + 0.5 - side / 2.0, dy = y + 0.5 - side / 2.0;
      const int sx = static_cast<int>(std::floor(std::cos(a) * dx + std::sin(a) * dy + src.width() / 2.0));
      const int sy = static_cast<int>(std::floor(-std::sin(a) * dx + std::cos(a) * dy + src.height() / 2.0));
      if (sx >= 0 && sy >= 0 && sx < src.width() && sy < src.height()) out[static_cast<std::size_t>(y) * side + x] = src.at(sx, sy);
    }
  }
  return ClassifiedGrid(side, side, std::move(out));
}

}  // namespace

TEST_CASE("classify bands") {
  const Thresholds t;
  CHECK(classify_intensity(0, t) == CellClass::Occupied);
  CHECK(classify_intensity(100, t) == CellClass::Occupied);
  CHECK(classify_intensity(101, t) == CellClass::Unexplored);
  CHECK(classify_intensity(205, t) == CellClass::Unexplored);
  CHECK(classify_intensity(230, t) == CellClass::Unexplored);
  CHECK(classify_intensity(231, t) == CellClass::Free);
  CHECK(classify_intensity(254, t) == CellClass::Free);
  CHECK(classify_intensity(255, t) == CellClass::Free);

  const Thresholds low{100, 200, 250};
  CHECK(classify_intensity(251, low) == CellClass::Unexplored);
  CHECK_FALSE(Thresholds{200, 100, 255}.valid());
}

TEST_CASE("classification of canonical intensities is a fixed point") {
  std::mt19937_64 rng(7);
  OccupancyGrid g;
  g.width = 23;
  g.height = 17;
  for (int i = 0; i < g.width * g.height; ++i) g.intensities.push_back(static_cast<std::uint8_t>(rng() % 256));
  const ClassifiedGrid once = classify(g, Thresholds{});
  const ClassifiedGrid twice = classify(to_canonical_grid(once), Thresholds{});
  CHECK(std::equal(once.classes().begin(), once.classes().end(), twice.classes().begin()));
}

TEST_CASE("class counts on uniform grids") {
  const ClassifiedGrid g = uniform_grid(4, 4, CellClass::Free);
  CHECK(g.count({0, 0, 4, 4}, CellClass::Free) == 16);
  CHECK(g.count({0, 0, 4, 4}, CellClass::Occupied) == 0);
  CHECK(g.count({1, 1, 1, 3}, CellClass::Free) == 0);
  CHECK_THROWS_AS(g.count({0, 0, 5, 4}, CellClass::Free), BoundsError);
  CHECK_THROWS_AS(g.count({-1, 0, 2, 2}, CellClass::Free), BoundsError);
}

TEST_CASE("class counts match a cell loop on random rectangles") {
  std::mt19937_64 rng(11);
  const ClassifiedGrid g = oracle::random_grid(64, 64, rng);
  for (int i = 0; i < 100; ++i) {
    int x0 = static_cast<int>(rng() % 65), x1 = static_cast<int>(rng() % 65);
    int y0 = static_cast<int>(rng() % 65), y1 = static_cast<int>(rng() % 65);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    for (int c = 0; c < kNumClasses; ++c) {
      CHECK(g.count({x0, y0, x1, y1}, static_cast<CellClass>(c)) ==
            oracle::count_class(g, x0, y0, x1, y1, static_cast<CellClass>(c)));
    }
  }
}

TEST_CASE("class counts match a cell loop on every rectangle of small grids") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 4; ++trial) {
    const int w = 5 + static_cast<int>(rng() % 12), h = 5 + static_cast<int>(rng() % 12);
    const ClassifiedGrid g = oracle::random_grid(w, h, rng);
    long mismatches = 0;
    for (int x0 = 0; x0 <= w; ++x0)
      for (int x1 = x0; x1 <= w; ++x1)
        for (int y0 = 0; y0 <= h; ++y0)
          for (int y1 = y0; y1 <= h; ++y1)
            for (int c = 0; c < kNumClasses; ++c) {
              const auto cc = static_cast<CellClass>(c);
              mismatches += g.count({x0, y0, x1, y1}, cc) != oracle::count_class(g, x0, y0, x1, y1, cc);
            }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("load a 4x4 map") {
  write_file_atomic(scratch("free.pgm"), std::string("P5\n4 4\n255\n") + std::string(16, char(254)));
  write_file_atomic(scratch("free.json"), R"({"image": "free.pgm", "resolution": 0.05, "origin": [1.0, -2.0, 0.0]})");
  const OccupancyGrid g = load_map(scratch("free.pgm"), scratch("free.json"));
  CHECK(g.width == 4);
  CHECK(g.height == 4);
  CHECK(g.resolution == doctest::Approx(0.05));
  CHECK(g.origin.x == 1.0);
  CHECK(g.origin.y == -2.0);
  CHECK(std::count(g.intensities.begin(), g.intensities.end(), 254) == 16);
}

TEST_CASE("yaml metadata") {
  write_file_atomic(scratch("m.pgm"), std::string("P5\n# saver comment\n2 1\n255\n") + std::string(2, char(0)));
  write_file_atomic(scratch("m.yaml"), "image: m.pgm\nresolution: 0.1\norigin: [0.5, 0.25, 0.0]\nnegate: 0\n");
  const OccupancyGrid g = load_map(scratch("m.pgm"), scratch("m.yaml"));
  CHECK(g.resolution == doctest::Approx(0.1));
  CHECK(g.origin.y == doctest::Approx(0.25));

  write_file_atomic(scratch("bad.yaml"), "image: m.pgm\n");
  CHECK_THROWS_AS(load_map(scratch("m.pgm"), scratch("bad.yaml")), FormatError);
}

TEST_CASE("malformed maps are rejected") {
  write_file_atomic(scratch("max.pgm"), std::string("P5\n2 2\n65535\n") + std::string(8, '\0'));
  CHECK_THROWS_AS(read_pgm(scratch("max.pgm")), FormatError);
  write_file_atomic(scratch("short.pgm"), std::string("P5\n4 4\n255\n") + std::string(15, '\0'));
  CHECK_THROWS_AS(read_pgm(scratch("short.pgm")), FormatError);
  write_file_atomic(scratch("ascii.pgm"), "P2\n1 1\n255\n0\n");
  CHECK_THROWS_AS(read_pgm(scratch("ascii.pgm")), FormatError);
  CHECK_THROWS_AS(read_pgm(scratch("does-not-exist.pgm")), IoError);
}

TEST_CASE("synthetic 200x200 map round trip") {
  const ModelParams p;
  const SyntheticWorld sw = gen_world(5, WorldSpec{2, 6, 200, 200});
  const OccupancyGrid g = render_grid(sw.world, sw.width, sw.height, p, true, 9);
  write_pgm(scratch("rt.pgm"), g);
  write_map_meta(scratch("rt.json"), g, "rt.pgm");
  const OccupancyGrid back = load_map(scratch("rt.pgm"), scratch("rt.json"));
  CHECK(back.width == 200);
  CHECK(back.height == 200);
  CHECK(back.intensities == g.intensities);
}

TEST_CASE("main orientation") {
  const ModelParams p;
  const WorldSpec spec{2, 4, 80, 120};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const GroundTruth gt = make_ground_truth(seed, spec, p, false);
    const ClassifiedGrid g = classify(gt.grid, p.thresholds);
    CHECK(std::abs(main_orientation(g)) <= 1.0);
    CHECK(std::abs(main_orientation(rotated(g, 30.0, 200)) - 30.0) <= 2.0);
  }
  CHECK_THROWS_AS(main_orientation(uniform_grid(8, 8, CellClass::Free)), DetectionError);

  std::mt19937_64 rng(5);
  const ClassifiedGrid noise = oracle::random_grid(40, 40, rng);
  const double a = main_orientation(noise);
  CHECK(a >= 0.0);
  CHECK(a < 90.0);
  CHECK(main_orientation(noise) == a);
}

TEST_CASE("working frame rotation round trip") {
  const ModelParams p;
  const GroundTruth gt = make_ground_truth(2, WorldSpec{2, 3, 80, 100}, p, false);
  const ClassifiedGrid g = classify(gt.grid, p.thresholds);
  const RotatedGrid same = rotate_to_working_frame(g, 0.0);
  CHECK(std::equal(g.classes().begin(), g.classes().end(), same.grid.classes().begin()));
  const RotatedGrid r = rotate_to_working_frame(rotated(g, 25.0, 160), 25.0);
  const Point q = r.to_working(r.to_source({40.0, 50.0}));
  CHECK(q.x == doctest::Approx(40.0));
  CHECK(q.y == doctest::Approx(50.0));
  const double back = main_orientation(r.grid);
  CHECK(std::min(back, 90.0 - back) <= 2.0);
}
