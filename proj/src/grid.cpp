#include "floorgraph/grid.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <sstream>

#include "floorgraph/io.hpp"

namespace floorgraph {

void OccupancyGrid::validate() const {
  if (width <= 0 || height <= 0) throw FormatError("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw FormatError("grid resolution must be positive");
  if (intensities.size() != static_cast<std::size_t>(width) * height) {
    throw FormatError("intensity buffer does not match width x height");
  }
}

CellRect CellRect::intersect(const CellRect& o) const {
  CellRect r{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  if (r.x1 < r.x0) r.x1 = r.x0;
  if (r.y1 < r.y0) r.y1 = r.y0;
  return r;
}

CellRect CellRect::unite(const CellRect& o) const {
  if (empty()) return o;
  if (o.empty()) return *this;
  return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
}

ClassifiedGrid::ClassifiedGrid(int width, int height, std::vector<CellClass> classes)
    : width_(width), height_(height), classes_(std::move(classes)) {
  if (width_ <= 0 || height_ <= 0) throw FormatError("classified grid dimensions must be positive");
  if (classes_.size() != static_cast<std::size_t>(width_) * height_) {
    throw FormatError("class buffer does not match width x height");
  }
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  for (auto& table : prefix_) table.assign(stride * (height_ + 1), 0);
  for (int y = 0; y < height_; ++y) {
    std::array<std::int32_t, kNumClasses> row{};
    for (int x = 0; x < width_; ++x) {
      ++row[class_index(at(x, y))];
      for (int c = 0; c < kNumClasses; ++c) {
        prefix_[c][(y + 1) * stride + x + 1] = prefix_[c][y * stride + x + 1] + row[c];
      }
    }
  }
}

long ClassifiedGrid::count(const CellRect& r, CellClass c) const {
  if (r.x0 < 0 || r.y0 < 0 || r.x1 > width_ || r.y1 > height_ || r.x1 < r.x0 || r.y1 < r.y0) {
    throw BoundsError("rectangle outside classified grid");
  }
  const int k = class_index(c);
  return prefix(k, r.x1, r.y1) - prefix(k, r.x0, r.y1) - prefix(k, r.x1, r.y0) + prefix(k, r.x0, r.y0);
}

CellClass classify_intensity(std::uint8_t value, const Thresholds& t) {
  if (value <= t.occupied) return CellClass::Occupied;
  if (value <= t.unexplored) return CellClass::Unexplored;
  if (value <= t.free) return CellClass::Free;
  return CellClass::Unexplored;
}

ClassifiedGrid classify(const OccupancyGrid& grid, const Thresholds& t) {
  grid.validate();
  std::vector<CellClass> classes(grid.intensities.size());
  std::transform(grid.intensities.begin(), grid.intensities.end(), classes.begin(),
                 [&](std::uint8_t v) { return classify_intensity(v, t); });
  return ClassifiedGrid(grid.width, grid.height, std::move(classes));
}

OccupancyGrid to_canonical_grid(const ClassifiedGrid& cgrid, double resolution, MapOrigin origin) {
  OccupancyGrid g;
  g.width = cgrid.width();
  g.height = cgrid.height();
  g.resolution = resolution;
  g.origin = origin;
  g.intensities.resize(cgrid.classes().size());
  std::transform(cgrid.classes().begin(), cgrid.classes().end(), g.intensities.begin(),
                 [](CellClass c) { return kCanonicalIntensity[class_index(c)]; });
  return g;
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    const char ch = data[pos];
    if (ch == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])) && data[pos] != '#') ++pos;
  return data.substr(start, pos - start);
}

int parse_positive(const std::string& token, const char* what) {
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw FormatError(std::string("PGM header: bad ") + what + " '" + token + "'");
  }
  long v = std::stol(token);
  if (v <= 0 || v > (1L << 24)) throw FormatError(std::string("PGM header: out of range ") + what);
  return static_cast<int>(v);
}

struct MapMeta {
  double resolution = 0.0;
  MapOrigin origin;
};

MapMeta parse_meta(const std::filesystem::path& meta_path) {
  const std::string text = read_file(meta_path);
  MapMeta meta;
  const auto ext = meta_path.extension().string();
  try {
    if (ext == ".yaml" || ext == ".yml") {
      YAML::Node node = YAML::Load(text);
      if (!node["resolution"]) throw FormatError("metadata lacks 'resolution'");
      meta.resolution = node["resolution"].as<double>();
      if (auto o = node["origin"]) {
        if (!o.IsSequence() || o.size() != 3) throw FormatError("metadata 'origin' must be [x, y, theta]");
        meta.origin = {o[0].as<double>(), o[1].as<double>(), o[2].as<double>()};
      }
    } else {
      auto j = nlohmann::json::parse(text);
      if (!j.contains("resolution")) throw FormatError("metadata lacks 'resolution'");
      meta.resolution = j.at("resolution").get<double>();
      if (j.contains("origin")) {
        const auto& o = j.at("origin");
        if (!o.is_array() || o.size() != 3) throw FormatError("metadata 'origin' must be [x, y, theta]");
        meta.origin = {o[0].get<double>(), o[1].get<double>(), o[2].get<double>()};
      }
    }
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("metadata: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metadata: ") + e.what());
  }
  if (!(meta.resolution > 0.0)) throw FormatError("metadata resolution must be positive");
  return meta;
}

}  // namespace

OccupancyGrid read_pgm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  if (next_token(data, pos) != "P5") throw FormatError("not a binary PGM (P5): " + path.string());
  OccupancyGrid g;
  g.width = parse_positive(next_token(data, pos), "width");
  g.height = parse_positive(next_token(data, pos), "height");
  const int maxval = parse_positive(next_token(data, pos), "maxval");
  if (maxval != 255) throw FormatError("PGM maxval must be 255, got " + std::to_string(maxval));
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    throw FormatError("PGM header not terminated");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(g.width) * g.height;
  if (data.size() - pos != n) {
    throw FormatError("PGM raster size mismatch: expected " + std::to_string(n) + " bytes, got " +
                      std::to_string(data.size() - pos));
  }
  g.intensities.assign(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end());
  return g;
}

OccupancyGrid load_map(const std::filesystem::path& pgm_path, const std::filesystem::path& meta_path) {
  OccupancyGrid g = read_pgm(pgm_path);
  const MapMeta meta = parse_meta(meta_path);
  g.resolution = meta.resolution;
  g.origin = meta.origin;
  g.validate();
  return g;
}

std::string encode_pgm(const OccupancyGrid& grid) {
  grid.validate();
  std::string out = "P5\n" + std::to_string(grid.width) + " " + std::to_string(grid.height) + "\n255\n";
  out.append(grid.intensities.begin(), grid.intensities.end());
  return out;
}

std::string encode_map_meta(const OccupancyGrid& grid, const std::string& image_name) {
  nlohmann::ordered_json j;
  j["image"] = image_name;
  j["resolution"] = grid.resolution;
  j["origin"] = {grid.origin.x, grid.origin.y, grid.origin.theta};
  return j.dump(2) + "\n";
}

void write_pgm(const std::filesystem::path& path, const OccupancyGrid& grid) {
  write_file_atomic(path, encode_pgm(grid));
}

void write_map_meta(const std::filesystem::path& path, const OccupancyGrid& grid, const std::string& image_name) {
  write_file_atomic(path, encode_map_meta(grid, image_name));
}

}  // namespace floorgraph
