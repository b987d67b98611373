#include <cmath>

#include "earthworks/dig_planner.hpp"

namespace earthworks::dig {

double dump_heading(const Pose2& base, Vec2 p) {
  const Vec2 d = p - base.position();
  return wrap_angle(std::atan2(d.y, d.x) + 0.5 * kPi);
}

double shovel_filter_sum(const grid::LayeredGrid& grid, const Pose2& base, Vec2 p, const TrajectoryParams& params) {
  const grid::GridSpec& spec = grid.spec();
  const auto elev = grid.layer(grid::layer::kElevation);
  const auto orig = grid.layer(grid::layer::kOriginalElevation);
  const grid::Footprint shovel{{p.x, p.y, dump_heading(base, p)}, 0.5 * params.shovel_length,
                               0.5 * params.shovel_width};
  const double reach = std::hypot(shovel.half_length, shovel.half_width);
  const double res = spec.resolution;
  const int c0 = std::max(0, int(std::floor((p.x - reach - spec.origin.x) / res)));
  const int c1 = std::min(spec.cols - 1, int(std::ceil((p.x + reach - spec.origin.x) / res)));
  const int r0 = std::max(0, int(std::floor((p.y - reach - spec.origin.y) / res)));
  const int r1 = std::min(spec.rows - 1, int(std::ceil((p.y + reach - spec.origin.y) / res)));
  double sum = 0.0;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (shovel.contains(spec.center(r, c))) {
        const std::size_t i = spec.index(r, c);
        sum += elev[i] - orig[i];
      }
  return sum;
}

DumpPoint select_dump_point(const grid::LayeredGrid& grid, std::span<const std::size_t> cells, const Pose2& base,
                            const TrajectoryParams& params, const DumpParams& dp) {
  if (cells.empty()) throw Error(ErrorCode::ZoneInactive, "dump zone has no receiving cells");
  const grid::GridSpec& spec = grid.spec();
  DumpPoint best;
  double best_dist = -1.0;
  bool have = false;
  for (std::size_t idx : cells) {
    const Vec2 p = spec.center(idx);
    const Vec2 l = to_local(base, p);
    const double cost = dp.alpha * shovel_filter_sum(grid, base, p, params) - dp.beta * l.x - dp.gamma * l.y;
    const double dist = l.norm();
    if (!have || cost < best.cost || (cost == best.cost && dist > best_dist)) {
      best = {idx, p, dump_heading(base, p), cost};
      best_dist = dist;
      have = true;
    }
  }
  return best;
}

}  // namespace earthworks::dig
