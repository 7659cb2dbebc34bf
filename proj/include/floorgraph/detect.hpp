#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "floorgraph/grid.hpp"
#include "floorgraph/model.hpp"
#include "floorgraph/world.hpp"

namespace floorgraph {

class DetectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LineAxis : std::uint8_t { Row = 0, Column = 1 };

// Axis-aligned run of cells: cells [begin, end) along row/column `fixed`.
struct LineSegment {
  LineAxis axis = LineAxis::Row;
  int fixed = 0;
  int begin = 0;
  int end = 0;

  Point p0() const;
  Point p1() const;
  double length() const;  // Euclidean distance of the endpoints
  friend bool operator==(const LineSegment&, const LineSegment&) = default;
  friend auto operator<=>(const LineSegment&, const LineSegment&) = default;
};

struct WeightedLine {
  LineSegment segment;
  double weight = 0.0;  // omega_e = l(e)
};

struct DoorCandidate {
  Door door;  // id is unassigned (-1)
  double weight = 0.0;
};

struct RoomCandidate {
  Rect rect;
  double weight = 0.0;
  double normalized = 0.0;
};

// Classified map plus the lookup structures the detectors share: O(1)
// "does this line contain an occupied run of length >= L" queries for the
// run lengths the room-candidate generator uses, and the list of free cells.
class MapEvidence {
 public:
  MapEvidence(ClassifiedGrid grid, const ModelParams& params);

  const ClassifiedGrid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const std::vector<int>& free_cells() const { return free_cells_; }

  // Occupied run of length >= min_run among cells [begin, end) of the line.
  bool line_has_run(LineAxis axis, int fixed, int begin, int end, int min_run) const;

 private:
  struct RunTable {
    std::vector<std::int32_t> rows;  // per row prefix of run-end flags, stride width + 1
    std::vector<std::int32_t> cols;  // per column prefix, stride height + 1
  };
  const RunTable& table(int min_run) const;
  RunTable build(int min_run) const;

  ClassifiedGrid grid_;
  ModelParams params_;
  std::vector<int> free_cells_;
  std::map<int, RunTable> runs_;
};

// Run length used by growth variant `variant` (candidate index minus two).
int growth_run_length(int variant);

// Dominant wall direction in degrees within [0, 90): the 1-degree bin whose
// rotated axes give the sharpest projection of the occupied cells. Ties
// resolve to the lowest angle. Throws DetectionError without occupied cells.
double main_orientation(const ClassifiedGrid& cgrid);

// Working-frame resampling: the result is `cgrid` rotated so that structure at
// `angle_deg` becomes axis-aligned. Cells outside the source are unexplored.
struct RotatedGrid {
  ClassifiedGrid grid;
  double angle_deg = 0.0;
  Point source_center;
  Point target_center;

  Point to_working(Point source) const;
  Point to_source(Point working) const;
};
RotatedGrid rotate_to_working_frame(const ClassifiedGrid& cgrid, double angle_deg);

// Match fraction of a wall band: occupied cells over band cells.
double wall_weight(const ClassifiedGrid& cgrid, const Rect& room, WallSide side, double thickness);
// Lowest wall weight of the four walls.
double room_weight(const ClassifiedGrid& cgrid, const Rect& room, double thickness);
// Free fraction of the door opening; 0 when the door has no opening.
double door_weight(const ClassifiedGrid& cgrid, const World& world, const Door& door, const WorldGeometry& geom);

std::vector<WeightedLine> split_lines(const ClassifiedGrid& cgrid, const Room& room, const ModelParams& params);
std::vector<DoorCandidate> door_candidates(const ClassifiedGrid& cgrid, const World& world, const ModelParams& params);
std::vector<RoomCandidate> room_candidates(const MapEvidence& evidence, Point pose);

}  // namespace floorgraph
