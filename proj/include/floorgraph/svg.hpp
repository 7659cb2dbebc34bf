#pragma once

#include <optional>
#include <string>

#include "floorgraph/grid.hpp"
#include "floorgraph/world.hpp"

namespace floorgraph {

struct SvgOptions {
  double scale = 3.0;  // pixels per cell
  bool show_edges = true;
};

// Floor plan over an optional classified underlay (black occupied, grey
// unexplored, white free). Walls blue, doors orange, pose violet; graph edges
// green for connected rooms and red for merely adjacent ones. Coordinates are
// cells of the world's working frame. Output is byte-stable for equal input.
std::string render_svg(const World& world, const WorldGeometry& geom, const ClassifiedGrid* underlay = nullptr,
                       std::optional<Point> pose = std::nullopt, const SvgOptions& options = {});

}  // namespace floorgraph
