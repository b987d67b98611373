#include <algorithm>

#include "earthworks/local_planner.hpp"

namespace earthworks::local {

using grid::MaskValue;

std::string_view zone_name(ZoneId z) {
  switch (z) {
    case ZoneId::Front: return "front";
    case ZoneId::FrontLeft: return "front_left";
    case ZoneId::FrontRight: return "front_right";
    case ZoneId::BackLeft: return "back_left";
    case ZoneId::BackRight: return "back_right";
  }
  return "unknown";
}

std::optional<ZoneId> zone_of(const LocalGeometry& g, const Pose2& base, Vec2 p) {
  const Vec2 l = to_local(base, p);
  const double r = l.norm();
  const double a = std::atan2(l.y, l.x);
  const double half = 0.5 * g.workspace_angle;
  if (std::abs(a) <= half) {
    if (r >= g.r_in && r <= g.r_out) return ZoneId::Front;
    return std::nullopt;
  }
  if (r < g.lateral_r_in || r > g.lateral_r_out) return std::nullopt;
  if (std::abs(a) <= 0.5 * kPi) return a > 0 ? ZoneId::FrontLeft : ZoneId::FrontRight;
  if (std::abs(a) < kPi - half) return a > 0 ? ZoneId::BackLeft : ZoneId::BackRight;
  return std::nullopt;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

namespace {

bool in_convex(std::span<const Vec2> hull, Vec2 p) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 a = hull[i], b = hull[(i + 1) % hull.size()];
    if ((b - a).cross(p - a) < -1e-12) return false;
  }
  return true;
}

void mark_footprint(const grid::GridSpec& spec, const grid::Footprint& fp, std::vector<std::uint8_t>& out) {
  grid::for_each_cell_under(spec, fp, [&](std::size_t i) { out[i] = 1; });
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = d.dot(d);
  const double t = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + d * t);
}

void mark_segment(const grid::GridSpec& spec, Vec2 a, Vec2 b, double radius, std::vector<std::uint8_t>& out) {
  const Vec2 lo = spec.fractional({std::min(a.x, b.x) - radius, std::min(a.y, b.y) - radius});
  const Vec2 hi = spec.fractional({std::max(a.x, b.x) + radius, std::max(a.y, b.y) + radius});
  const int c0 = std::max(0, int(std::floor(lo.x))), c1 = std::min(spec.cols - 1, int(std::ceil(hi.x)));
  const int r0 = std::max(0, int(std::floor(lo.y))), r1 = std::min(spec.rows - 1, int(std::ceil(hi.y)));
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (segment_distance(spec.center(r, c), a, b) <= radius) out[spec.index(r, c)] = 1;
}

}  // namespace

RefreshedMask refresh_mask(const grid::LayeredGrid& grid, std::span<const MaskValue> user_mask,
                           std::span<const global::PlanPose> poses, std::size_t index, const LocalConfig& cfg) {
  const auto& spec = grid.spec();
  const auto& t = cfg.thresholds;
  const std::size_t n = spec.size();
  if (user_mask.size() != n) throw Error(ErrorCode::InvalidArgument, "mask size does not match the grid");
  if (index >= poses.size()) throw Error(ErrorCode::InvalidArgument, "pose index out of range");
  const auto elev = grid.layer(grid::layer::kElevation);
  const auto target = grid.layer(grid::layer::kTargetElevation);

  RefreshedMask out;
  out.protect.assign(n, 0);
  out.hull.assign(n, 0);
  std::vector<std::uint8_t> travel(n, 0);
  const double m = t.footprint_margin;
  std::vector<Vec2> corners;
  for (std::size_t j = index; j < poses.size(); ++j) {
    const Pose2& p = poses[j].pose;
    mark_footprint(spec, {p, cfg.half_length + m, cfg.half_width + m}, out.protect);
    for (const Vec2& c : grid::Footprint{p, cfg.half_length, cfg.half_width}.corners()) corners.push_back(c);
    // Approach corridor of a lane not started yet: the machine reaches its
    // first pose from the lane start, which lies ahead of it.
    if (j > index && poses[j].lane != poses[j - 1].lane) {
      const double ext = cfg.geometry.r_out + cfg.half_length;
      const Vec2 c = p.position() + unit(p.heading) * (0.5 * ext);
      mark_footprint(spec, {{c.x, c.y, p.heading}, 0.5 * ext + m, cfg.half_width + m}, out.protect);
    }
    if (j + 1 < poses.size()) {
      const Pose2& q = poses[j + 1].pose;
      const bool turn = poses[j + 1].lane != poses[j].lane || std::abs(wrap_angle(q.heading - p.heading)) > 0.1;
      const double radius = turn ? std::hypot(cfg.half_length, cfg.half_width) + t.travel_margin
                                 : cfg.half_width + m;
      mark_segment(spec, p.position(), q.position(), radius, travel);
    }
  }
  const auto hull = convex_hull(corners);
  if (!hull.empty()) {
    double xmin = hull[0].x, xmax = hull[0].x, ymin = hull[0].y, ymax = hull[0].y;
    for (const Vec2& v : hull) {
      xmin = std::min(xmin, v.x);
      xmax = std::max(xmax, v.x);
      ymin = std::min(ymin, v.y);
      ymax = std::max(ymax, v.y);
    }
    const Vec2 lo = spec.fractional({xmin, ymin}), hi = spec.fractional({xmax, ymax});
    for (int r = std::max(0, int(std::floor(lo.y))); r <= std::min(spec.rows - 1, int(std::ceil(hi.y))); ++r)
      for (int c = std::max(0, int(std::floor(lo.x))); c <= std::min(spec.cols - 1, int(std::ceil(hi.x))); ++c)
        if (in_convex(hull, spec.center(r, c))) out.hull[spec.index(r, c)] = 1;
  }

  std::vector<std::uint8_t> dig(n, 0);
  for (std::size_t i = 0; i < n; ++i) dig[i] = user_mask[i] == MaskValue::Dig;
  const auto ring = grid::dilate(spec, dig, t.boundary_width);
  const Pose2& base = poses[index].pose;

  out.mask.assign(user_mask.begin(), user_mask.end());
  out.dump_allowed.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const MaskValue u = user_mask[i];
    MaskValue& w = out.mask[i];
    if (u == MaskValue::NoGo) continue;
    if (u == MaskValue::Dig) {
      w = !out.protect[i] && elev[i] - target[i] > t.dig_margin ? MaskValue::Dig : MaskValue::Neutral;
      continue;
    }
    if (ring[i]) {
      w = MaskValue::Boundary;
      continue;
    }
    if (out.hull[i]) w = MaskValue::Neutral;
    if (w == MaskValue::PermanentDump && !zone_of(cfg.geometry, base, spec.center(i))) w = MaskValue::Neutral;
    const bool receives = w == MaskValue::PermanentDump || (u == MaskValue::Neutral && w == MaskValue::Neutral);
    out.dump_allowed[i] = receives && !out.hull[i] && !travel[i] && !out.protect[i];
  }
  return out;
}

double dump_cost(std::span<const double> sdf_dump, std::span<const std::size_t> dump_cells, Vec2 dump_point,
                 Vec2 dig_point, double alpha) {
  if (dump_cells.empty()) return grid::kInf;
  double s = 0.0;
  for (std::size_t i : dump_cells) s += sdf_dump[i];
  const Vec2 d = dig_point - dump_point;
  return s / double(dump_cells.size()) + alpha * d.dot(d);
}

bool zone_complete(const grid::LayeredGrid& grid, const ZoneState& zone, std::span<const double> reference,
                   const Thresholds& t) {
  if (zone.dig_cells.empty()) return true;
  const auto elev = grid.layer(grid::layer::kElevation);
  const double area = grid.spec().cell_area();
  std::size_t dev = 0;
  double remaining = 0.0;
  for (std::size_t i : zone.dig_cells) {
    const double d = elev[i] - reference[i];
    if (d > t.deviation) ++dev;
    remaining += std::max(0.0, d) * area;
  }
  const double frac = double(dev) / double(zone.dig_cells.size());
  return frac < t.deviation_fraction || remaining < t.remaining_fraction * zone.total_volume;
}

LocalWorkspace::LocalWorkspace(const grid::LayeredGrid& grid, std::span<const MaskValue> user_mask,
                               const RefreshedMask& mask, const Pose2& base, const LocalConfig& cfg)
    : base_(base), cfg_(cfg), spec_(grid.spec()) {
  const std::size_t n = spec_.size();
  user_dig_.assign(n, 0);
  std::vector<std::uint8_t> permanent(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    user_dig_[i] = user_mask[i] == MaskValue::Dig;
    permanent[i] = user_mask[i] == MaskValue::PermanentDump;
  }
  auto sdf = grid::distance_transform(spec_, permanent);
  // Without permanent dump areas the distance term cannot rank zones.
  if (sdf.empty_set) std::fill(sdf.values.begin(), sdf.values.end(), 0.0);
  sdf_dump_ = std::move(sdf.values);
  protect_ = mask.protect;

  for (std::size_t z = 0; z < zones_.size(); ++z) zones_[z].id = ZoneId(z);
  const double reach = std::max(cfg.geometry.r_out, cfg.geometry.lateral_r_out);
  const Vec2 lo = spec_.fractional(base.position() - Vec2{reach, reach});
  const Vec2 hi = spec_.fractional(base.position() + Vec2{reach, reach});
  for (int r = std::max(0, int(std::floor(lo.y))); r <= std::min(spec_.rows - 1, int(std::ceil(hi.y))); ++r)
    for (int c = std::max(0, int(std::floor(lo.x))); c <= std::min(spec_.cols - 1, int(std::ceil(hi.x))); ++c) {
      const std::size_t i = spec_.index(r, c);
      const auto z = zone_of(cfg.geometry, base, spec_.center(r, c));
      if (!z) continue;
      ZoneState& zs = zones_[std::size_t(*z)];
      zs.cells.push_back(i);
      // Laterals only restore user Dig cells to the original ground, so
      // soil parked on Neutral cells is never picked up again.
      if (user_dig_[i] && !mask.protect[i]) zs.dig_cells.push_back(i);
      if (mask.dump_allowed[i] && !user_dig_[i]) zs.dump_cells.push_back(i);
    }
  for (ZoneState& zs : zones_) {
    std::size_t d = 0;
    for (std::size_t i : zs.cells) d += user_dig_[i];
    zs.dig_share = zs.cells.empty() ? 0.0 : double(d) / double(zs.cells.size());
    const auto ref = dig_reference(grid, zs.id);
    const auto elev = grid.layer(grid::layer::kElevation);
    for (std::size_t i : zs.dig_cells) zs.total_volume += std::max(0.0, elev[i] - ref[i]) * spec_.cell_area();
  }
  update(grid);
}

std::vector<double> LocalWorkspace::dig_reference(const grid::LayeredGrid& grid, ZoneId z) const {
  std::vector<double> ref(spec_.size(), grid::kNoData);
  if (z == ZoneId::Front) {
    const auto target = grid.layer(grid::layer::kTargetElevation);
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (user_dig_[i] && !protect_[i]) ref[i] = target[i];
    return ref;
  }
  const auto orig = grid.has_layer(grid::layer::kOriginalElevation) ? grid.layer(grid::layer::kOriginalElevation)
                                                                     : grid.layer(grid::layer::kElevation);
  for (std::size_t i : zone(z).dig_cells) ref[i] = orig[i];
  return ref;
}

std::vector<std::uint8_t> LocalWorkspace::receiving_mask(ZoneId z) const {
  std::vector<std::uint8_t> m(spec_.size(), 0);
  for (std::size_t i : zone(z).dump_cells) m[i] = 1;
  return m;
}

Vec2 LocalWorkspace::dump_centroid(ZoneId z) const {
  const auto& cells = zone(z).dump_cells;
  Vec2 s{};
  for (std::size_t i : cells) s = s + spec_.center(i);
  return cells.empty() ? base_.position() : s * (1.0 / double(cells.size()));
}

void LocalWorkspace::update(const grid::LayeredGrid& grid) {
  const auto elev = grid.layer(grid::layer::kElevation);
  for (ZoneState& zs : zones_) {
    const auto ref = dig_reference(grid, zs.id);
    std::size_t dev = 0;
    double remaining = 0.0;
    for (std::size_t i : zs.dig_cells) {
      const double d = elev[i] - ref[i];
      if (d > cfg_.thresholds.deviation) ++dev;
      remaining += std::max(0.0, d) * spec_.cell_area();
    }
    zs.remaining_volume = remaining;
    zs.deviation_fraction = zs.dig_cells.empty() ? 0.0 : double(dev) / double(zs.dig_cells.size());
    zs.complete = exhausted_[std::size_t(zs.id)] || zone_complete(grid, zs, ref, cfg_.thresholds);
  }
}

void LocalWorkspace::mark_exhausted(ZoneId z) {
  exhausted_[std::size_t(z)] = true;
  zones_[std::size_t(z)].complete = true;
}

bool LocalWorkspace::dump_active(ZoneId z, ZoneId dig_zone) const {
  if (z == ZoneId::Front || z == dig_zone) return false;
  const ZoneState& zs = zone(z);
  if (zs.dig_share > cfg_.thresholds.inactive_dig_fraction) return false;
  return double(zs.dump_cells.size()) * spec_.cell_area() >= cfg_.thresholds.min_dump_area;
}

double LocalWorkspace::dump_cost(ZoneId z, Vec2 dig_point, ZoneId dig_zone) const {
  if (!dump_active(z, dig_zone)) return grid::kInf;
  return local::dump_cost(sdf_dump_, zone(z).dump_cells, dump_centroid(z), dig_point, cfg_.thresholds.alpha);
}

Selection LocalWorkspace::select(const grid::LayeredGrid& grid, std::optional<Vec2> last_dig) {
  update(grid);
  Selection s;
  const ZoneState& front = zone(ZoneId::Front);
  if (!front.complete) {
    s.action = Action::Dig;
    s.dig_zone = ZoneId::Front;
  } else if (!zone(ZoneId::FrontLeft).complete) {
    s.action = Action::Dig;
    s.dig_zone = ZoneId::FrontLeft;
  } else if (!zone(ZoneId::FrontRight).complete) {
    s.action = Action::Dig;
    s.dig_zone = ZoneId::FrontRight;
  } else if (!refined_ && !front.dig_cells.empty() &&
             front.deviation_fraction >= cfg_.thresholds.refine_fraction) {
    s.action = Action::Refine;
    s.dig_zone = ZoneId::Front;
  } else {
    s.action = Action::WorkspaceDone;
    return s;
  }
  Vec2 x_dig = base_.position();
  if (last_dig) {
    x_dig = *last_dig;
  } else {
    const auto& cells = zone(s.dig_zone).cells;
    Vec2 sum{};
    for (std::size_t i : cells) sum = sum + spec_.center(i);
    if (!cells.empty()) x_dig = sum * (1.0 / double(cells.size()));
  }
  double best = grid::kInf;
  s.dump_costs.fill(grid::kInf);
  for (ZoneId z : kDumpZones) {
    const double c = dump_cost(z, x_dig, s.dig_zone);
    s.dump_costs[std::size_t(z)] = c;
    if (c < best) {
      best = c;
      s.dump_zone = z;
    }
  }
  if (!(best < grid::kInf))
    throw Error(ErrorCode::DumpDeadlock, "no dump zone available at base (" + std::to_string(base_.x) + ", " +
                                             std::to_string(base_.y) + ")");
  return s;
}

}  // namespace earthworks::local
