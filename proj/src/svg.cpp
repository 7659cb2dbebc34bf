#include "floorgraph/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace floorgraph {

namespace {

constexpr const char* kWall = "#1f4fd8";
constexpr const char* kDoor = "#ff8c00";
constexpr const char* kPose = "#8a2be2";
constexpr const char* kConnected = "#1a9e2f";
constexpr const char* kAdjacent = "#d62828";
constexpr const char* kClassFill[kNumClasses] = {"#000000", "#9a9a9a", "#ffffff"};

void append(std::string& out, const char* fmt, auto... args) {
  char buf[256];
  const int n = std::snprintf(buf, sizeof buf, fmt, args...);
  out.append(buf, static_cast<std::size_t>(std::clamp(n, 0, static_cast<int>(sizeof buf) - 1)));
}

// One rect per horizontal run of equal class; white runs are left to the
// background.
void append_underlay(std::string& out, const ClassifiedGrid& g) {
  out += "<g id=\"map\" shape-rendering=\"crispEdges\">\n";
  for (int y = 0; y < g.height(); ++y) {
    int x = 0;
    while (x < g.width()) {
      const CellClass c = g.at(x, y);
      int end = x + 1;
      while (end < g.width() && g.at(end, y) == c) ++end;
      if (c != CellClass::Free) {
        append(out, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"1\" fill=\"%s\"/>\n", x, y, end - x,
               kClassFill[class_index(c)]);
      }
      x = end;
    }
  }
  out += "</g>\n";
}

}  // namespace

std::string render_svg(const World& world, const WorldGeometry& geom, const ClassifiedGrid* underlay,
                       std::optional<Point> pose, const SvgOptions& options) {
  double w = underlay ? underlay->width() : 0.0;
  double h = underlay ? underlay->height() : 0.0;
  for (const Room& r : world.rooms) {
    w = std::max(w, r.rect.x1);
    h = std::max(h, r.rect.y1);
  }
  w = std::max(w, 1.0);
  h = std::max(h, 1.0);

  std::string out;
  append(out,
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
         w * options.scale, h * options.scale, w, h);
  append(out, "<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"%s\"/>\n", w, h,
         underlay ? kClassFill[class_index(CellClass::Free)] : "#f4f4f4");
  if (underlay) append_underlay(out, *underlay);

  std::vector<Room> rooms = world.rooms;
  std::sort(rooms.begin(), rooms.end(), [](const Room& a, const Room& b) { return a.id < b.id; });

  const double t = geom.wall_thickness;
  out += "<g id=\"walls\" fill=\"none\" stroke-opacity=\"0.85\">\n";
  for (const Room& r : rooms) {
    append(out,
           "<rect data-room=\"%d\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" stroke=\"%s\" "
           "stroke-width=\"%.2f\"/>\n",
           r.id, r.rect.x0 + t / 2, r.rect.y0 + t / 2, std::max(r.rect.width() - t, 0.0),
           std::max(r.rect.height() - t, 0.0), kWall, t);
  }
  out += "</g>\n";

  std::vector<Door> doors = world.doors;
  std::sort(doors.begin(), doors.end(), [](const Door& a, const Door& b) { return a.id < b.id; });
  out += "<g id=\"doors\">\n";
  for (const Door& d : doors) {
    const auto opening = door_opening(world, d, geom);
    if (!opening) continue;
    append(out, "<rect data-door=\"%d\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n", d.id,
           opening->x0, opening->y0, opening->width(), opening->height(), kDoor);
  }
  out += "</g>\n";

  if (options.show_edges && rooms.size() > 1) {
    const SceneGraph graph = build_scene_graph(world, geom);
    std::map<int, Point> centers;
    for (const Room& r : rooms) centers[r.id] = r.rect.center();
    out += "<g id=\"edges\" stroke-width=\"1\" stroke-dasharray=\"3 2\">\n";
    for (const GraphEdge& e : graph.edges) {
      const Point a = centers[e.room_a];
      const Point b = centers[e.room_b];
      append(out, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\"/>\n", a.x, a.y, b.x, b.y,
             e.label == EdgeLabel::Connected ? kConnected : kAdjacent);
    }
    out += "</g>\n";
  }

  if (pose) append(out, "<circle id=\"pose\" cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", pose->x, pose->y, kPose);
  out += "</svg>\n";
  return out;
}

}  // namespace floorgraph
