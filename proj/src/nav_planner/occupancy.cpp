#include <algorithm>
#include <cmath>

#include "earthworks/nav_planner.hpp"

namespace earthworks::nav {

std::size_t OccupancyGrid::blocked_count() const {
  return std::size_t(std::count_if(provenance.begin(), provenance.end(), [](std::uint8_t v) { return v != kFree; }));
}

OccupancyGrid fuse_occupancy(const grid::GridSpec& spec, std::span<const std::uint8_t> offline,
                             std::span<const grid::MaskValue> user_mask, std::span<const std::uint8_t> dug,
                             std::span<const std::uint8_t> pile) {
  const std::size_t n = spec.size();
  auto sized = [n](std::size_t s) { return s == 0 || s == n; };
  if (!sized(offline.size()) || !sized(user_mask.size()) || !sized(dug.size()) || !sized(pile.size()))
    throw Error(ErrorCode::InvalidArgument, "occupancy inputs must match the grid");
  OccupancyGrid occ;
  occ.spec = spec;
  occ.provenance.assign(n, kFree);
  std::vector<std::uint8_t> blocked(n, 0), dug_set(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t v = kFree;
    if (!offline.empty() && offline[i]) v |= kOfflineSlope;
    if (!user_mask.empty() && user_mask[i] == grid::MaskValue::NoGo) v |= kUserNoGo;
    if (!dug.empty() && dug[i]) v |= kDug;
    if (!pile.empty() && pile[i]) v |= kPile;
    occ.provenance[i] = v;
    blocked[i] = v != kFree;
    dug_set[i] = (v & kDug) != 0;
  }
  occ.sdf_dug = grid::distance_transform(spec, dug_set).values;
  occ.clearance = grid::distance_transform(spec, blocked).values;
  return occ;
}

OccupancyGrid fuse_occupancy(const grid::LayeredGrid& grid, std::span<const grid::MaskValue> user_mask,
                             const OccupancyParams& p) {
  const std::size_t n = grid.size();
  const auto elev = grid.layer(grid::layer::kElevation);
  const bool has_orig = grid.has_layer(grid::layer::kOriginalElevation);
  const auto orig = has_orig ? grid.layer(grid::layer::kOriginalElevation) : elev;
  std::vector<std::uint8_t> offline(n, 0), dug(n, 0), pile(n, 0);
  if (grid.has_layer(grid::layer::kOccupancy)) {
    const auto o = grid.layer(grid::layer::kOccupancy);
    for (std::size_t i = 0; i < n; ++i) offline[i] = o[i] > 0.5;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = !user_mask.empty() ? user_mask[i] : grid.mask(i);
    const bool user_dig = m == grid::MaskValue::Dig;
    dug[i] = user_dig && elev[i] < orig[i] - p.dug_depth;
    pile[i] = elev[i] - orig[i] > p.pile_height;
  }
  auto mask = user_mask.empty() ? grid.mask_values() : std::vector(user_mask.begin(), user_mask.end());
  return fuse_occupancy(grid.spec(), offline, mask, dug, pile);
}

bool footprint_free(const OccupancyGrid& occ, const Pose2& pose, double half_length, double half_width) {
  bool free = true;
  const bool inside = grid::for_each_cell_under(occ.spec, grid::Footprint{pose, half_length, half_width},
                                                [&](std::size_t i) {
                                                  if (occ.provenance[i] != kFree) free = false;
                                                });
  return inside && free;
}

namespace {

// Footprint inside the map, ignoring cells.
bool inside_map(const grid::GridSpec& spec, const Pose2& pose, double hl, double hw) {
  const grid::Footprint fp{pose, hl, hw};
  const double half = 0.5 * spec.resolution;
  const double x1 = spec.origin.x + (spec.cols - 0.5) * spec.resolution;
  const double y1 = spec.origin.y + (spec.rows - 0.5) * spec.resolution;
  for (const Vec2& c : fp.corners())
    if (c.x < spec.origin.x - half || c.y < spec.origin.y - half || c.x > x1 || c.y > y1) return false;
  return true;
}

// Lower bound on the distance from the pose to the nearest blocked cell
// centre or map edge; the footprint is free and on the map if this exceeds
// its circumradius. Negative when the pose is off the map.
double free_radius(const OccupancyGrid& occ, const Pose2& pose) {
  const auto& spec = occ.spec;
  const auto c = spec.locate(pose.position());
  if (!c) return -1.0;
  const std::size_t i = spec.index(c->row, c->col);
  const double half = 0.5 * spec.resolution;
  const double x0 = spec.origin.x - half, x1 = spec.origin.x + (spec.cols - 0.5) * spec.resolution;
  const double y0 = spec.origin.y - half, y1 = spec.origin.y + (spec.rows - 0.5) * spec.resolution;
  const double edge = std::min({pose.x - x0, x1 - pose.x, pose.y - y0, y1 - pose.y});
  return std::min(occ.clearance[i] - spec.resolution * std::sqrt(2.0), edge);
}

}  // namespace

bool state_valid(const OccupancyGrid& occ, const Pose2& pose, const NavParams& p) {
  const double hl = p.half_length + p.check_margin, hw = p.half_width + p.check_margin;
  if (!inside_map(occ.spec, pose, hl, hw)) return false;
  if (free_radius(occ, pose) > std::hypot(hl, hw)) return true;
  return footprint_free(occ, pose, hl, hw);
}

bool path_valid(const OccupancyGrid& occ, const Pose2& from, const RsPath& path, const NavParams& p) {
  const double len = path.length();
  if (!std::isfinite(len)) return false;
  const double hl = p.half_length + p.check_margin, hw = p.half_width + p.check_margin;
  const double circum = std::hypot(hl, hw);
  double s = 0.0;
  while (true) {
    const Pose2 q = rs_interpolate(from, path, std::min(s, len));
    if (!inside_map(occ.spec, q, hl, hw)) return false;
    const double slack = free_radius(occ, q) - circum;
    double advance = p.check_step;
    if (slack <= 0.0) {
      if (!footprint_free(occ, q, hl, hw)) return false;
    } else {
      // Turning moves the corners by up to circum / radius per metre on top
      // of the centre's own motion, so stay within the slack.
      advance = std::max(p.check_step, slack / (1.0 + circum / path.radius));
    }
    if (s >= len) break;
    s = std::min(s + advance, len);
  }
  return true;
}

double dug_penalty(const OccupancyGrid& occ, const Pose2& pose, const NavParams& p) {
  double sum = 0.0;
  std::size_t m = 0;
  grid::for_each_cell_under(occ.spec, grid::Footprint{pose, p.half_length, p.half_width}, [&](std::size_t i) {
    sum += p.beta * std::exp(-p.gamma * occ.sdf_dug[i]);
    ++m;
  });
  return m ? sum / double(m) : 0.0;
}

double edge_cost(const OccupancyGrid& occ, const Pose2& to, const RsPath& path, const NavParams& p) {
  return p.alpha * path.length() + dug_penalty(occ, to, p);
}

}  // namespace earthworks::nav
