#include <algorithm>
#include <cmath>

#include "earthworks/dig_planner.hpp"

namespace earthworks::dig {

void TrajectoryParams::validate() const {
  const bool positive = gamma_min > 0 && gamma_max > 0 && gamma_max_dirt > 0 && d_max > 0 && h_max > 0 &&
                        v_bucket > 0 && v_max > 0 && h_close > 0 && v_dig > 0 && dt > 0 && shovel_width > 0 &&
                        shovel_length > 0 && collision_radius >= 0;
  if (!positive) throw Error(ErrorCode::InvalidArgument, "trajectory parameters must be positive");
  if (gamma_min >= gamma_max) throw Error(ErrorCode::InvalidArgument, "gamma_min must be below gamma_max");
  if (v_bucket > v_max) throw Error(ErrorCode::InvalidArgument, "bucket volume exceeds the maximum volume");
}

Sector zone_sector(const local::LocalGeometry& g, local::ZoneId z) {
  const double half = 0.5 * g.workspace_angle;
  const double q = 0.5 * kPi;
  switch (z) {
    case local::ZoneId::Front:
      return {g.r_in, g.r_out, -half, half};
    case local::ZoneId::FrontLeft:
      return {g.lateral_r_in, g.lateral_r_out, half, q};
    case local::ZoneId::FrontRight:
      return {g.lateral_r_in, g.lateral_r_out, -q, -half};
    case local::ZoneId::BackLeft:
      return {g.lateral_r_in, g.lateral_r_out, q, kPi - half};
    case local::ZoneId::BackRight:
      return {g.lateral_r_in, g.lateral_r_out, -(kPi - half), -q};
  }
  return {};
}

double attitude(const TrajectoryParams& p, const Sector& s, double r) {
  const double t = std::clamp((s.r_out - r) / (s.r_out - s.r_in), 0.0, 1.0);
  return p.gamma_min + (p.gamma_max - p.gamma_min) * t;
}

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::NothingToDig: return "nothing_to_dig";
    case StopReason::Full: return "full";
    case StopReason::SelfCollision: return "self_collision";
    case StopReason::LeftZone: return "left_zone";
    case StopReason::MaxDrag: return "max_drag";
  }
  return "?";
}

namespace {

struct StripCell {
  double s;  // distance from the base along the ray
  std::size_t idx;
};

// Cells whose centres lie in the band s in [s_lo, s_hi], |t| <= half_width
// around the ray from `origin` along `u`, outermost first.
std::vector<StripCell> strip_cells(const grid::GridSpec& spec, Vec2 origin, Vec2 u, double s_lo, double s_hi,
                                   double half_width) {
  const Vec2 n{-u.y, u.x};
  const std::array<Vec2, 4> cs{origin + u * s_lo + n * half_width, origin + u * s_lo - n * half_width,
                               origin + u * s_hi + n * half_width, origin + u * s_hi - n * half_width};
  double xmin = cs[0].x, xmax = cs[0].x, ymin = cs[0].y, ymax = cs[0].y;
  for (const Vec2& c : cs) {
    xmin = std::min(xmin, c.x);
    xmax = std::max(xmax, c.x);
    ymin = std::min(ymin, c.y);
    ymax = std::max(ymax, c.y);
  }
  const double res = spec.resolution;
  const int c0 = std::max(0, int(std::ceil((xmin - spec.origin.x) / res - 1e-9)));
  const int c1 = std::min(spec.cols - 1, int(std::floor((xmax - spec.origin.x) / res + 1e-9)));
  const int r0 = std::max(0, int(std::ceil((ymin - spec.origin.y) / res - 1e-9)));
  const int r1 = std::min(spec.rows - 1, int(std::floor((ymax - spec.origin.y) / res + 1e-9)));
  std::vector<StripCell> out;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      const Vec2 d = spec.center(r, c) - origin;
      const double s = d.dot(u);
      if (s < s_lo || s > s_hi || std::abs(d.dot(n)) > half_width) continue;
      out.push_back({s, spec.index(r, c)});
    }
  std::stable_sort(out.begin(), out.end(), [](const StripCell& a, const StripCell& b) { return a.s > b.s; });
  return out;
}

}  // namespace

ScoopResult simulate_dig(const DigScene& scene, double r, double theta, const TrajectoryParams& params, bool loose) {
  if (!scene.sector.contains(r, theta))
    throw Error(ErrorCode::AttackOutOfBounds,
                "attack point (" + std::to_string(r) + ", " + std::to_string(theta) + ") outside the sector");
  const grid::LayeredGrid& grid = *scene.grid;
  const grid::GridSpec& spec = grid.spec();
  if (scene.reference.size() != spec.size()) throw Error(ErrorCode::InvalidArgument, "reference size mismatch");
  const auto elev = grid.layer(grid::layer::kElevation);
  const double area = spec.cell_area();
  const double step = params.step();

  const Vec2 origin = scene.base.position();
  const double bearing = scene.base.heading + theta;
  const Vec2 u = unit(bearing);
  const double r_stop = std::max(params.collision_radius, r - params.d_max);
  const auto cells = strip_cells(spec, origin, u, r_stop - step, r, 0.5 * params.shovel_width);

  ScoopResult out;
  DigTrajectory& traj = out.trajectory;
  traj.r = r;
  traj.theta = theta;
  traj.loose = loose;
  const double gamma0 =
      loose ? std::min(attitude(params, scene.sector, r), params.gamma_max_dirt) : attitude(params, scene.sector, r);
  // Loose soil keeps the reduced attitude offset over the drag.
  const double gamma_offset = gamma0 - attitude(params, scene.sector, r);
  auto edge_at = [&](Phase ph, double radius, double z) {
    const Vec2 p = origin + u * radius;
    const double g = std::clamp(attitude(params, scene.sector, radius) + gamma_offset, params.gamma_min,
                                loose ? params.gamma_max_dirt : params.gamma_max);
    return EdgeState{ph, p.x, p.y, z, g};
  };

  const auto attack_cell = spec.locate(origin + u * r);
  double surface = 0.0, z_edge = 0.0;
  if (attack_cell) {
    const std::size_t a = spec.index(attack_cell->row, attack_cell->col);
    surface = elev[a];
    const double ref = scene.reference[a];
    z_edge = std::isnan(ref) ? surface : std::max(ref, surface - params.h_max);
    z_edge = std::min(z_edge, surface);
  }
  traj.steps.push_back(edge_at(Phase::Penetration, r, surface));

  const bool any_soil = std::any_of(cells.begin(), cells.end(), [&](const StripCell& c) {
    const double ref = scene.reference[c.idx];
    return !std::isnan(ref) && elev[c.idx] - ref > 1e-9;
  });
  if (!any_soil) {
    out.reason = StopReason::NothingToDig;
    return out;
  }

  for (double z = surface - step; z > z_edge; z -= step) traj.steps.push_back(edge_at(Phase::Penetration, r, z));
  traj.steps.push_back(edge_at(Phase::Penetration, r, z_edge));
  std::size_t pen_steps = traj.steps.size() - 1;

  std::size_t next = 0;
  int k = 0;
  double z = z_edge;
  while (true) {
    const double hi = r - k * step;
    const double lo = hi - step;
    if (k * step >= params.d_max - 1e-9) {
      out.reason = StopReason::MaxDrag;
      break;
    }
    if (lo < params.collision_radius - 1e-9) {
      out.reason = StopReason::SelfCollision;
      break;
    }
    bool any = false, diggable = false;
    for (; next < cells.size() && cells[next].s > lo; ++next) {
      const std::size_t idx = cells[next].idx;
      any = true;
      const double ref = scene.reference[idx];
      if (std::isnan(ref)) continue;
      diggable = true;
      const double depth = std::clamp(elev[idx] - ref, 0.0, params.h_max);
      z = elev[idx] - depth;
      if (depth <= 0.0) continue;
      out.removed.push_back({idx, depth});
      out.volume += depth * area;
    }
    ++k;
    traj.steps.push_back(edge_at(Phase::Drag, lo, z));
    if (any && !diggable) {
      out.reason = StopReason::LeftZone;
      break;
    }
    if (out.volume >= params.v_max) {
      out.reason = StopReason::Full;
      break;
    }
  }
  traj.drag_length = k * step;

  // Closing removes nothing. Loose soil lifts straight up.
  const int close_steps = std::max(1, int(std::ceil(params.h_close / step)));
  const double r_last = r - traj.drag_length;
  for (int i = 1; i <= close_steps; ++i) {
    const double f = double(i) / close_steps;
    const double radius = loose ? r_last : std::max(params.collision_radius, r_last - f * params.shovel_length);
    traj.steps.push_back(edge_at(Phase::Close, radius, z + f * params.h_close));
  }
  traj.duration = double(pen_steps + std::size_t(k) + std::size_t(close_steps)) * params.dt;
  return out;
}

double scoop_volume(const DigScene& scene, double r, double theta, const TrajectoryParams& params) {
  return simulate_dig(scene, r, theta, params).volume;
}

bool is_loose(const grid::LayeredGrid& grid, const Pose2& base, double r, double theta) {
  if (!grid.has_layer(grid::layer::kOriginalElevation)) return false;
  const auto c = grid.spec().locate(base.position() + unit(base.heading + theta) * r);
  if (!c) return false;
  const std::size_t i = grid.spec().index(c->row, c->col);
  return grid.layer(grid::layer::kElevation)[i] > grid.layer(grid::layer::kOriginalElevation)[i] + 0.05;
}

std::vector<Sweep> plan_refinement(const Sector& s, const TrajectoryParams& params, double expand) {
  const double dr = (s.r_out - s.r_in) * 0.5 * expand;
  const double dth = (s.theta_max - s.theta_min) * 0.5 * expand;
  const Sector e{s.r_in - dr, s.r_out + dr, s.theta_min - dth, s.theta_max + dth};
  const double width = params.shovel_width / e.r_out;
  const int count = std::max(1, int(std::ceil((e.theta_max - e.theta_min) / width - 1e-9)));
  std::vector<Sweep> out;
  for (int k = 0; k < count; ++k) {
    const double th = std::max(e.theta_max - 0.5 * width - k * width, e.theta_min + 0.5 * width);
    out.push_back({th, e.r_out, std::max(e.r_in, params.collision_radius), attitude(params, e, e.r_out)});
  }
  return out;
}

SweepResult simulate_sweep(const DigScene& scene, const Sweep& sweep, const TrajectoryParams& params) {
  const grid::LayeredGrid& grid = *scene.grid;
  const grid::GridSpec& spec = grid.spec();
  const auto elev = grid.layer(grid::layer::kElevation);
  const double area = spec.cell_area();
  const Vec2 u = unit(scene.base.heading + sweep.theta);
  const auto cells =
      strip_cells(spec, scene.base.position(), u, sweep.r_end, sweep.r_start, 0.5 * params.shovel_width);
  SweepResult out;
  for (const StripCell& c : cells) {
    const double ref = scene.reference[c.idx];
    if (std::isnan(ref)) continue;
    const double e = elev[c.idx];
    if (e > ref) {
      out.changes.push_back({c.idx, ref - e});
      out.carried += (e - ref) * area;
    } else if (e < ref && out.carried > 0.0) {
      const double fill = std::min(ref - e, out.carried / area);
      out.changes.push_back({c.idx, fill});
      out.carried -= fill * area;
    }
  }
  out.carried = std::max(out.carried, 0.0);
  return out;
}

}  // namespace earthworks::dig
