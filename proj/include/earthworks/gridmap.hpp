#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earthworks/common.hpp"

namespace earthworks::grid {

enum class MaskValue : std::uint8_t {
  Dig = 0,
  PermanentDump = 1,
  Neutral = 2,
  NoGo = 3,
  Boundary = 4,
};

std::string_view mask_value_name(MaskValue v);

namespace layer {
inline constexpr const char* kElevation = "elevation";
inline constexpr const char* kTargetElevation = "target_elevation";
inline constexpr const char* kOriginalElevation = "original_elevation";
inline constexpr const char* kExcavationMask = "excavation_mask";
inline constexpr const char* kOccupancy = "occupancy";
}  // namespace layer

inline constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();
inline bool is_no_data(double v) { return std::isnan(v); }

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

struct GridSpec {
  double resolution = 0.1;
  Vec2 origin{};  // center of cell (0, 0)
  int rows = 0;
  int cols = 0;
  std::string crs = "local";

  std::size_t size() const { return std::size_t(rows) * std::size_t(cols); }
  std::size_t index(int r, int c) const { return std::size_t(r) * std::size_t(cols) + std::size_t(c); }
  CellIndex cell(std::size_t idx) const { return {int(idx / std::size_t(cols)), int(idx % std::size_t(cols))}; }
  bool in_bounds(int r, int c) const { return r >= 0 && c >= 0 && r < rows && c < cols; }
  Vec2 center(int r, int c) const { return {origin.x + c * resolution, origin.y + r * resolution}; }
  Vec2 center(std::size_t idx) const {
    const CellIndex ci = cell(idx);
    return center(ci.row, ci.col);
  }
  double cell_area() const { return resolution * resolution; }
  // Cell whose square contains p, if any.
  std::optional<CellIndex> locate(Vec2 p) const;
  // Continuous (row, col) coordinates of p.
  Vec2 fractional(Vec2 p) const {
    return {(p.x - origin.x) / resolution, (p.y - origin.y) / resolution};
  }
  bool operator==(const GridSpec&) const = default;
};

class LayeredGrid {
 public:
  LayeredGrid() = default;
  explicit LayeredGrid(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int rows() const { return spec_.rows; }
  int cols() const { return spec_.cols; }
  double resolution() const { return spec_.resolution; }
  std::size_t size() const { return spec_.size(); }

  // Adds or overwrites a layer filled with `fill`.
  void add_layer(const std::string& name, double fill = 0.0);
  void set_layer(const std::string& name, std::vector<double> values);
  bool has_layer(const std::string& name) const;
  std::span<double> layer(const std::string& name);
  std::span<const double> layer(const std::string& name) const;
  const std::vector<std::string>& layer_names() const { return names_; }

  MaskValue mask(std::size_t idx) const {
    return static_cast<MaskValue>(int(layer(layer::kExcavationMask)[idx]));
  }
  std::vector<MaskValue> mask_values() const;

 private:
  std::size_t find(const std::string& name) const;

  GridSpec spec_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
};

// Oriented rectangle, e.g. the machine body.
struct Footprint {
  Pose2 pose;
  double half_length = 2.5;
  double half_width = 1.5;

  bool contains(Vec2 p) const {
    const Vec2 l = to_local(pose, p);
    return std::abs(l.x) <= half_length && std::abs(l.y) <= half_width;
  }
  std::array<Vec2, 4> corners() const;
};

// Calls f(idx) for every in-bounds cell whose center lies inside fp.
// Returns false if part of the footprint extends beyond the map.
template <class F>
bool for_each_cell_under(const GridSpec& spec, const Footprint& fp, F&& f);

struct PolygonFeature {
  std::vector<Vec2> ring;
  std::string layer;
  double value = 0.0;
  // For target_elevation: value is an offset from the elevation layer.
  bool relative = false;
};

bool point_in_ring(std::span<const Vec2> ring, Vec2 p);
// True if two non-adjacent edges touch or cross.
bool ring_self_intersects(std::span<const Vec2> ring);

// Builds the standard layers. The last feature covering a cell center
// wins per layer. Cells not covered get elevation 0, target equal to the
// elevation, mask Neutral, occupancy 0.
LayeredGrid rasterize_polygons(std::span<const PolygonFeature> features, const GridSpec& spec);

struct DistanceField {
  std::vector<double> values;  // metres, +inf when the set is empty
  bool empty_set = false;
};

// Exact Euclidean distance from each cell center to the nearest cell
// center of the set (0 on the set).
DistanceField distance_transform(const GridSpec& spec, std::span<const std::uint8_t> set);

// Distance to cells whose mask is one of `values`.
DistanceField signed_distance(const LayeredGrid& grid, std::span<const MaskValue> values);

// Positive outside the set, negative inside (distance to the complement).
std::vector<double> signed_distance_field(const GridSpec& spec, std::span<const std::uint8_t> set);

// sum over region of (a - b) * res^2.
double volume_between(const LayeredGrid& grid, const std::string& a, const std::string& b,
                       std::span<const std::uint8_t> region);

// Replaces sentinel cells by the mean of their finite 8-neighbours,
// repeating until none are left.
LayeredGrid fill_holes(const LayeredGrid& grid, const std::string& name);

// Set of cells with distance <= radius from `set`.
std::vector<std::uint8_t> dilate(const GridSpec& spec, std::span<const std::uint8_t> set, double radius);

// 8-connected components; label -1 for cells outside the set.
std::vector<int> connected_components(const GridSpec& spec, std::span<const std::uint8_t> set, int* count);

std::vector<std::uint8_t> mask_equals(const LayeredGrid& grid, MaskValue v);

struct Site {
  LayeredGrid grid;
  std::vector<PolygonFeature> polygons;
};

// Directory layout: site.meta, one little-endian float64 row-major file
// per layer (<name>.f64), polygons.geojson.
void write_site(const std::filesystem::path& dir, const LayeredGrid& grid,
                std::span<const PolygonFeature> polygons = {});
Site read_site(const std::filesystem::path& dir);
// GeoJSON FeatureCollection of polygons with layer/value/relative properties.
std::vector<PolygonFeature> read_polygon_file(const std::filesystem::path& file);

// ---- implementation of templates ----

template <class F>
bool for_each_cell_under(const GridSpec& spec, const Footprint& fp, F&& f) {
  const auto cs = fp.corners();
  double xmin = cs[0].x, xmax = cs[0].x, ymin = cs[0].y, ymax = cs[0].y;
  for (const Vec2& c : cs) {
    xmin = std::min(xmin, c.x);
    xmax = std::max(xmax, c.x);
    ymin = std::min(ymin, c.y);
    ymax = std::max(ymax, c.y);
  }
  const double res = spec.resolution;
  const double half = 0.5 * res;
  bool inside = xmin >= spec.origin.x - half && ymin >= spec.origin.y - half &&
                xmax <= spec.origin.x + (spec.cols - 0.5) * res &&
                ymax <= spec.origin.y + (spec.rows - 0.5) * res;
  const int c0 = std::max(0, int(std::ceil((xmin - spec.origin.x) / res - 1e-9)));
  const int c1 = std::min(spec.cols - 1, int(std::floor((xmax - spec.origin.x) / res + 1e-9)));
  const int r0 = std::max(0, int(std::ceil((ymin - spec.origin.y) / res - 1e-9)));
  const int r1 = std::min(spec.rows - 1, int(std::floor((ymax - spec.origin.y) / res + 1e-9)));
  const double ch = std::cos(fp.pose.heading), sh = std::sin(fp.pose.heading);
  for (int r = r0; r <= r1; ++r) {
    const double dy = spec.origin.y + r * res - fp.pose.y;
    for (int c = c0; c <= c1; ++c) {
      const double dx = spec.origin.x + c * res - fp.pose.x;
      const double lx = ch * dx + sh * dy;
      const double ly = -sh * dx + ch * dy;
      if (std::abs(lx) <= fp.half_length && std::abs(ly) <= fp.half_width) f(spec.index(r, c));
    }
  }
  return inside;
}

}  // namespace earthworks::grid
