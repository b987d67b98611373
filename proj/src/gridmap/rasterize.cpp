#include "earthworks/gridmap.hpp"

namespace earthworks::grid {

namespace {

std::vector<Vec2> open_ring(std::span<const Vec2> ring) {
  std::vector<Vec2> r(ring.begin(), ring.end());
  if (r.size() > 1 && r.front() == r.back()) r.pop_back();
  return r;
}

int orient(Vec2 a, Vec2 b, Vec2 c) {
  const double v = (b - a).cross(c - a);
  return (v > 0) - (v < 0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

bool point_in_ring(std::span<const Vec2> ring_in, Vec2 p) {
  const auto ring = open_ring(ring_in);
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = ring[i], b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool ring_self_intersects(std::span<const Vec2> ring_in) {
  const auto ring = open_ring(ring_in);
  const std::size_t n = ring.size();
  if (n < 3) return true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Vec2 a = ring[i], b = ring[(i + 1) % n], c = ring[j], d = ring[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges may only share their common vertex.
        if (n == 3) continue;
        const Vec2 far = (j == i + 1) ? d : c;
        const Vec2 shared = (j == i + 1) ? b : a;
        const Vec2 other = (j == i + 1) ? a : b;
        if (orient(other, shared, far) == 0 && (far - shared).dot(other - shared) > 0) return true;
        continue;
      }
      if (segments_touch(a, b, c, d)) return true;
    }
  }
  return false;
}

LayeredGrid rasterize_polygons(std::span<const PolygonFeature> features, const GridSpec& spec) {
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (ring_self_intersects(features[k].ring))
      throw Error(ErrorCode::SelfIntersectingRing,
                  "ring " + std::to_string(k) + " is not a simple polygon");
    const std::string& l = features[k].layer;
    if (l == layer::kExcavationMask) {
      const double v = features[k].value;
      if (v != std::floor(v) || v < 0 || v > 4)
        throw Error(ErrorCode::InvalidArgument, "ring " + std::to_string(k) + " has invalid mask value");
    }
  }
  LayeredGrid g(spec);
  g.add_layer(layer::kElevation, 0.0);
  g.add_layer(layer::kTargetElevation, 0.0);
  g.add_layer(layer::kExcavationMask, double(MaskValue::Neutral));
  g.add_layer(layer::kOccupancy, 0.0);

  auto paint = [&](const PolygonFeature& f, std::span<double> dst, std::span<const double> base) {
    double xmin = f.ring[0].x, xmax = xmin, ymin = f.ring[0].y, ymax = ymin;
    for (const Vec2& p : f.ring) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const int c0 = std::max(0, int(std::ceil((xmin - spec.origin.x) / spec.resolution)) - 1);
    const int c1 = std::min(spec.cols - 1, int(std::floor((xmax - spec.origin.x) / spec.resolution)) + 1);
    const int r0 = std::max(0, int(std::ceil((ymin - spec.origin.y) / spec.resolution)) - 1);
    const int r1 = std::min(spec.rows - 1, int(std::floor((ymax - spec.origin.y) / spec.resolution)) + 1);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        if (point_in_ring(f.ring, spec.center(r, c))) {
          const std::size_t i = spec.index(r, c);
          dst[i] = f.relative ? base[i] + f.value : f.value;
        }
  };

  auto elevation = g.layer(layer::kElevation);
  for (const auto& f : features)
    if (f.layer == layer::kElevation) paint(f, elevation, elevation);
  auto target = g.layer(layer::kTargetElevation);
  std::copy(elevation.begin(), elevation.end(), target.begin());
  for (const auto& f : features) {
    if (f.layer == layer::kElevation) continue;
    if (f.layer == layer::kTargetElevation) {
      paint(f, target, elevation);
    } else {
      if (!g.has_layer(f.layer)) g.add_layer(f.layer, 0.0);
      auto dst = g.layer(f.layer);
      paint(f, dst, dst);
    }
  }
  return g;
}

}  // namespace earthworks::grid
