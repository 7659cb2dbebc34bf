#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace floorgraph {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct MapOrigin {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Raw 8-bit map as written by common SLAM map savers. Row 0 is the first
// image row; cell (x, y) lives at intensities[y * width + x].
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double resolution = 0.05;  // meters per cell
  MapOrigin origin;
  std::vector<std::uint8_t> intensities;

  std::uint8_t at(int x, int y) const { return intensities[static_cast<std::size_t>(y) * width + x]; }

  // Throws FormatError when dimensions or buffer size are inconsistent.
  void validate() const;
};

enum class CellClass : std::uint8_t { Occupied = 0, Unexplored = 1, Free = 2 };
inline constexpr int kNumClasses = 3;

inline constexpr int class_index(CellClass c) { return static_cast<int>(c); }

// Canonical map-server intensities for each class.
inline constexpr std::array<std::uint8_t, kNumClasses> kCanonicalIntensity = {0, 205, 254};

struct Thresholds {
  std::uint8_t occupied = 100;    // h_o
  std::uint8_t unexplored = 230;  // h_u
  std::uint8_t free = 255;        // h_f

  bool valid() const { return occupied < unexplored && unexplored < free; }
};

// Half-open cell range [x0, x1) x [y0, y1).
struct CellRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 > x0 ? x1 - x0 : 0; }
  int height() const { return y1 > y0 ? y1 - y0 : 0; }
  long area() const { return static_cast<long>(width()) * height(); }
  bool empty() const { return width() == 0 || height() == 0; }

  CellRect intersect(const CellRect& o) const;
  CellRect unite(const CellRect& o) const;  // bounding box; empty operands are ignored
  CellRect inflate(int by) const { return {x0 - by, y0 - by, x1 + by, y1 + by}; }

  friend bool operator==(const CellRect&, const CellRect&) = default;
};

// Three-class quantization of a map with per-class summed-area tables so that
// class counts over any rectangle are O(1).
class ClassifiedGrid {
 public:
  ClassifiedGrid() = default;
  ClassifiedGrid(int width, int height, std::vector<CellClass> classes);

  int width() const { return width_; }
  int height() const { return height_; }
  CellRect bounds() const { return {0, 0, width_, height_}; }

  CellClass at(int x, int y) const { return classes_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const CellClass> classes() const { return classes_; }

  // Number of cells of class `c` inside `rect`. Throws BoundsError when the
  // rectangle is not contained in the grid.
  long count(const CellRect& rect, CellClass c) const;

 private:
  long prefix(int c, int x, int y) const {
    return prefix_[c][static_cast<std::size_t>(y) * (width_ + 1) + x];
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<CellClass> classes_;
  std::array<std::vector<std::int32_t>, kNumClasses> prefix_;
};

CellClass classify_intensity(std::uint8_t value, const Thresholds& t);

ClassifiedGrid classify(const OccupancyGrid& grid, const Thresholds& t);

// Maps classes back to canonical intensities (0 / 205 / 254).
OccupancyGrid to_canonical_grid(const ClassifiedGrid& cgrid, double resolution = 0.05,
                                MapOrigin origin = {});

// Binary P5 PGM (maxval 255) plus a metadata file carrying resolution and
// origin. The metadata may be JSON or map_server-style YAML.
OccupancyGrid load_map(const std::filesystem::path& pgm_path,
                       const std::filesystem::path& meta_path);

OccupancyGrid read_pgm(const std::filesystem::path& path);
std::string encode_pgm(const OccupancyGrid& grid);
std::string encode_map_meta(const OccupancyGrid& grid, const std::string& image_name);
void write_pgm(const std::filesystem::path& path, const OccupancyGrid& grid);
void write_map_meta(const std::filesystem::path& path, const OccupancyGrid& grid,
                    const std::string& image_name);

}  // namespace floorgraph
