#include "earthworks/harness.hpp"

namespace earthworks::bench {

namespace {

std::vector<Vec2> box(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

grid::GridSpec spec_for(double width, double height, double res) {
  grid::GridSpec s;
  s.resolution = res;
  s.origin = {0.5 * res, 0.5 * res};
  s.cols = int(std::lround(width / res));
  s.rows = int(std::lround(height / res));
  return s;
}

grid::Site build(const grid::GridSpec& spec, std::vector<grid::PolygonFeature> features) {
  grid::Site site;
  site.grid = grid::rasterize_polygons(features, spec);
  const auto e = site.grid.layer(grid::layer::kElevation);
  site.grid.set_layer(grid::layer::kOriginalElevation, std::vector<double>(e.begin(), e.end()));
  site.polygons = std::move(features);
  return site;
}

constexpr double kDig = double(grid::MaskValue::Dig);
constexpr double kNoGo = double(grid::MaskValue::NoGo);
constexpr double kDump = double(grid::MaskValue::PermanentDump);

}  // namespace

grid::Site pit_site(const PitOptions& o) {
  const double x0 = o.margin, x1 = o.margin + o.length;
  const double y0 = o.side_margin, y1 = o.side_margin + o.width;
  const auto spec = spec_for(x1 + o.margin, y1 + o.side_margin, o.resolution);
  std::vector<grid::PolygonFeature> f;
  f.push_back({box(x0, y0, x1, y1), grid::layer::kExcavationMask, kDig, false});
  f.push_back({box(x0, y0, x1, y1), grid::layer::kTargetElevation, -o.depth, true});
  if (o.dump_strips) {
    // Permanent dumps along both long sides, outside the boundary ring.
    f.push_back({box(x0 - 2.0, y1 + 1.0, x1 + 2.0, y1 + 6.0), grid::layer::kExcavationMask, kDump, false});
    f.push_back({box(x0 - 2.0, y0 - 6.0, x1 + 2.0, y0 - 1.0), grid::layer::kExcavationMask, kDump, false});
  }
  if (o.fence) {
    // Lanes along x exit beyond the far end of the pit. Starting at corner
    // 1 or 2 the low-y lane leaves over the low-x end and the high-y lane
    // over the high-x end; the fence takes away the other two exits.
    const double ym = 0.5 * (y0 + y1);
    f.push_back({box(x1 + 6.5, y0 - 1.0, x1 + 8.0, ym), grid::layer::kExcavationMask, kNoGo, false});
    f.push_back({box(x0 - 8.0, ym, x0 - 6.5, y1 + 1.0), grid::layer::kExcavationMask, kNoGo, false});
  }
  return build(spec, std::move(f));
}

DeadlockFixture dump_deadlock_fixture(const mission::MissionConfig& config) {
  mission::MissionConfig cfg = config;
  cfg.sync();
  const double length = 15.6, width = 11.5;
  const double x0 = 17.2, x1 = x0 + length, y0 = 13.25, y1 = y0 + width;
  const auto spec = spec_for(x1 + x0, y1 + y0, 0.1);
  std::vector<grid::PolygonFeature> f;
  f.push_back({box(x0, y0, x1, y1), grid::layer::kExcavationMask, kDig, false});
  f.push_back({box(x0, y0, x1, y1), grid::layer::kTargetElevation, -1.0, true});
  // No dumping along either long side; the ends stay open for driving.
  f.push_back({box(x0 - 2.0, 0.0, x1 + 2.0, y0 - 1.0), grid::layer::kExcavationMask, kNoGo, false});
  f.push_back({box(x0 - 2.0, y1 + 1.0, x1 + 2.0, spec.rows * spec.resolution), grid::layer::kExcavationMask, kNoGo,
               false});

  global::SitePlanOptions options;
  options.mode = global::OrientationMode::Fixed;
  options.fixed_theta = 0.0;
  auto probe = build(spec, f);
  const auto first = global::plan_site(probe.grid, cfg.planner, options);
  const auto poses = first.working_poses();
  if (poses.empty()) throw Error(ErrorCode::NoFeasiblePlan, "deadlock fixture has no poses");
  // Pocket on the outer side of the first lane, level with its start.
  const Pose2 p0 = poses.front();
  const double side = p0.y < 0.5 * (y0 + y1) ? -1.0 : 1.0;
  const double px0 = std::min(p0.x, p0.x + 6.0 * std::cos(p0.heading)) - 1.0;
  const double px1 = std::max(p0.x, p0.x + 6.0 * std::cos(p0.heading)) + 1.0;
  const double py_near = side < 0 ? y0 - 1.0 : y1 + 1.0;
  const double py_far = py_near + side * 3.0;
  f.push_back({box(px0, std::min(py_near, py_far), px1, std::max(py_near, py_far)), grid::layer::kExcavationMask, kDump,
               false});

  DeadlockFixture out;
  out.site = build(spec, std::move(f));
  out.plan = global::plan_site(out.site.grid, cfg.planner, options);
  // Dump zones only depend on the mask and the plan, so the first pose
  // without any active one is known before digging.
  std::vector<global::PlanPose> working;
  for (const auto& p : out.plan.poses)
    if (p.working) working.push_back(p);
  const auto user = out.site.grid.mask_values();
  for (std::size_t k = 0; k < working.size(); ++k) {
    const auto refreshed = local::refresh_mask(out.site.grid, user, working, k, cfg.local);
    const local::LocalWorkspace ws(out.site.grid, user, refreshed, working[k].pose, cfg.local);
    bool any = false;
    for (local::ZoneId z : local::kDumpZones) any = any || ws.dump_active(z, local::ZoneId::Front);
    if (!any) {
      out.failing_pose = int(k);
      break;
    }
  }
  return out;
}

namespace {

DecompositionFixture rectangle_fixture(bool concave) {
  DecompositionFixture fx;
  fx.spec = concave ? spec_for(30.0, 14.0, 0.2) : spec_for(20.0, 12.0, 0.2);
  fx.theta = kPi / 2;
  fx.dig.assign(fx.spec.size(), 0);
  auto in = [](Vec2 p, double x0, double y0, double x1, double y1) {
    return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
  };
  for (std::size_t i = 0; i < fx.dig.size(); ++i) {
    const Vec2 p = fx.spec.center(i);
    bool obstacle;
    if (concave) {
      // H on its side: two bars along x joined by a web.
      obstacle = in(p, 6, 3, 24, 4.5) || in(p, 6, 9.5, 24, 11) || in(p, 14, 3, 16, 11);
    } else {
      obstacle = in(p, 8, 4, 12, 8);
    }
    fx.dig[i] = !obstacle;
  }
  return fx;
}

}  // namespace

DecompositionFixture convex_obstacle_fixture() { return rectangle_fixture(false); }
DecompositionFixture concave_obstacle_fixture() { return rectangle_fixture(true); }

}  // namespace earthworks::bench
