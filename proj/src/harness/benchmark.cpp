#include <cstdio>
#include <map>
#include <sstream>

#include "earthworks/harness.hpp"

namespace earthworks::bench {

namespace {

constexpr std::array<std::string_view, 5> kFamilyNames{"Foundations", "ExteriorFoundations",
                                                       "ExteriorFoundationsTraversable", "Crops", "ExteriorCrops"};

constexpr double kDig = double(grid::MaskValue::Dig);
constexpr double kNeutral = double(grid::MaskValue::Neutral);
constexpr double kNoGo = double(grid::MaskValue::NoGo);

// Ground kept around the task so base poses fit outside the dig area.
constexpr double kMargin = 10.0;
// Exterior families dig a square this much wider than the silhouette.
constexpr double kExteriorScale = 1.5;
constexpr int kLattice = 24;
constexpr int kMaxAttempts = 64;

std::vector<Vec2> square(Vec2 c, double half) {
  return {{c.x - half, c.y - half}, {c.x + half, c.y - half}, {c.x + half, c.y + half}, {c.x - half, c.y + half}};
}

// Fills every region not 4-connected to the lattice border.
void fill_holes(std::vector<std::uint8_t>& cells, int n) {
  std::vector<std::uint8_t> outside(cells.size(), 0);
  std::vector<int> stack;
  auto push = [&](int r, int c) {
    if (r < 0 || c < 0 || r >= n || c >= n) return;
    const int i = r * n + c;
    if (cells[std::size_t(i)] || outside[std::size_t(i)]) return;
    outside[std::size_t(i)] = 1;
    stack.push_back(i);
  };
  for (int k = 0; k < n; ++k) {
    push(0, k);
    push(n - 1, k);
    push(k, 0);
    push(k, n - 1);
  }
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    push(i / n - 1, i % n);
    push(i / n + 1, i % n);
    push(i / n, i % n - 1);
    push(i / n, i % n + 1);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = !outside[i];
}

// Counter-clockwise boundary of a 4-connected hole-free lattice set, in
// lattice vertex coordinates, collinear vertices removed.
std::vector<std::pair<int, int>> trace(const std::vector<std::uint8_t>& cells, int n) {
  auto in = [&](int x, int y) { return x >= 0 && y >= 0 && x < n && y < n && cells[std::size_t(y * n + x)]; };
  // Directed unit edges with the inside on the left, keyed by start vertex.
  std::map<std::pair<int, int>, std::pair<int, int>> next;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (!in(x, y)) continue;
      if (!in(x, y - 1)) next[{x, y}] = {x + 1, y};
      if (!in(x + 1, y)) next[{x + 1, y}] = {x + 1, y + 1};
      if (!in(x, y + 1)) next[{x + 1, y + 1}] = {x, y + 1};
      if (!in(x - 1, y)) next[{x, y + 1}] = {x, y};
    }
  std::vector<std::pair<int, int>> ring;
  if (next.empty()) return ring;
  const auto start = next.begin()->first;
  auto v = start;
  std::size_t guard = 0;
  do {
    ring.push_back(v);
    v = next.at(v);
    if (++guard > next.size()) throw Error(ErrorCode::InvalidArgument, "silhouette boundary is not one ring");
  } while (v != start);
  if (guard != next.size()) throw Error(ErrorCode::InvalidArgument, "silhouette boundary is not one ring");
  std::vector<std::pair<int, int>> corners;
  const std::size_t m = ring.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = ring[(i + m - 1) % m];
    const auto& b = ring[i];
    const auto& c = ring[(i + 1) % m];
    const bool straight = (b.first - a.first) * (c.second - b.second) == (b.second - a.second) * (c.first - b.first);
    if (!straight) corners.push_back(b);
  }
  return corners;
}

double polygon_area(std::span<const Vec2> ring) {
  double a = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) a += ring[i].cross(ring[(i + 1) % ring.size()]);
  return 0.5 * a;
}

struct TaskLayout {
  double map_side = 0.0;
  Vec2 center{};
};

TaskLayout layout(Family f, double side) {
  TaskLayout l;
  const double extent = is_crops(f) ? side : kExteriorScale * side;
  l.map_side = extent + 2.0 * kMargin;
  l.center = {0.5 * l.map_side, 0.5 * l.map_side};
  return l;
}

grid::GridSpec task_spec(Family f, double side) {
  const TaskLayout l = layout(f, side);
  grid::GridSpec s;
  s.resolution = task_resolution(f, side);
  s.cols = s.rows = int(std::ceil(l.map_side / s.resolution));
  s.origin = {0.5 * s.resolution, 0.5 * s.resolution};
  return s;
}

// Silhouettes for a crops map: non-overlapping squares of random size,
// each holding one building.
std::vector<std::vector<Vec2>> crop_silhouettes(Rng& rng, double side, Vec2 center) {
  const int count = 5 + int(rng.index(16));
  const double lo = 0.5 * side;
  std::vector<std::vector<Vec2>> out;
  std::vector<std::pair<Vec2, double>> placed;
  const double gap = 8.0;
  for (int tries = 0; int(out.size()) < count && tries < 400; ++tries) {
    const double extent = rng.uniform(20.0, std::min(100.0, side / 3.0));
    const Vec2 c{center.x + rng.uniform(-lo + 0.5 * extent, lo - 0.5 * extent),
                 center.y + rng.uniform(-lo + 0.5 * extent, lo - 0.5 * extent)};
    bool free = true;
    for (const auto& [pc, pe] : placed)
      if (std::abs(pc.x - c.x) < 0.5 * (pe + extent) + gap && std::abs(pc.y - c.y) < 0.5 * (pe + extent) + gap)
        free = false;
    if (!free) continue;
    placed.push_back({c, extent});
    out.push_back(building_silhouette(rng, c, extent));
  }
  if (out.size() < 5) throw Error(ErrorCode::InvalidArgument, "crops map too crowded");
  return out;
}

BenchmarkTask try_generate(Family family, std::uint64_t seed, double side, int attempt) {
  Rng rng(mix_seed(seed, std::uint64_t(attempt)));
  const TaskLayout l = layout(family, side);
  const auto spec = task_spec(family, side);
  std::vector<grid::PolygonFeature> f;
  auto add = [&](std::vector<Vec2> ring, double mask) {
    f.push_back({ring, grid::layer::kExcavationMask, mask, false});
    if (mask == kDig) f.push_back({std::move(ring), grid::layer::kTargetElevation, -1.0, true});
  };
  if (!is_crops(family)) {
    // The three foundation families share the silhouette under a seed.
    const auto building = building_silhouette(rng, l.center, side);
    if (family == Family::Foundations) {
      add(building, kDig);
    } else {
      add(square(l.center, 0.5 * kExteriorScale * side), kDig);
      f.push_back({building, grid::layer::kTargetElevation, 0.0, true});
      add(building, family == Family::ExteriorFoundations ? kNoGo : kNeutral);
    }
  } else {
    const auto buildings = crop_silhouettes(rng, side, l.center);
    if (family == Family::Crops) {
      for (const auto& b : buildings) add(b, kDig);
    } else {
      add(square(l.center, 0.5 * side), kDig);
      for (const auto& b : buildings) {
        f.push_back({b, grid::layer::kTargetElevation, 0.0, true});
        add(b, kNoGo);
      }
    }
  }
  BenchmarkTask t;
  t.family = family;
  t.seed = seed;
  t.side = side;
  t.attempts = attempt + 1;
  t.site = grid::rasterize_polygons(f, spec);
  const auto e = t.site.layer(grid::layer::kElevation);
  t.site.set_layer(grid::layer::kOriginalElevation, std::vector<double>(e.begin(), e.end()));
  const auto dig = grid::mask_equals(t.site, grid::MaskValue::Dig);
  if (std::count(dig.begin(), dig.end(), 1) == 0) throw Error(ErrorCode::EmptyDigMask, "task has no dig cells");
  return t;
}

// Polar test per cell against the poses whose base lies within r_out,
// found through a bucket grid over base positions.
bool covered_polar(Vec2 p, std::span<const Pose2> poses, const std::vector<std::vector<int>>& buckets, Vec2 lo,
                   double bucket, int nx, int ny, const global::PlannerParams& params) {
  const int bx = int(std::floor((p.x - lo.x) / bucket)), by = int(std::floor((p.y - lo.y) / bucket));
  for (int y = std::max(0, by - 1); y <= std::min(ny - 1, by + 1); ++y)
    for (int x = std::max(0, bx - 1); x <= std::min(nx - 1, bx + 1); ++x)
      for (int k : buckets[std::size_t(y * nx + x)]) {
        const Pose2& b = poses[std::size_t(k)];
        const Vec2 l = to_local(b, p);
        const double r = l.norm();
        if (r < params.r_in - 1e-9 || r > params.r_out + 1e-9) continue;
        if (std::abs(std::atan2(l.y, l.x)) <= 0.5 * params.workspace_angle + 1e-9) return true;
      }
  return false;
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string_view family_name(Family f) { return kFamilyNames[std::size_t(f)]; }

Family parse_family(std::string_view s) {
  for (Family f : kFamilies)
    if (family_name(f) == s) return f;
  throw Error(ErrorCode::Parse, "unknown family '" + std::string(s) + "'");
}

std::pair<double, double> side_range(Family f) {
  return is_crops(f) ? std::pair{100.0, 1000.0} : std::pair{20.0, 100.0};
}

bool is_crops(Family f) { return f == Family::Crops || f == Family::ExteriorCrops; }

double task_resolution(Family f, double side) {
  return std::max(0.1, layout(f, side).map_side / 400.0);
}

std::vector<Vec2> building_silhouette(Rng& rng, Vec2 center, double extent) {
  const int n = kLattice;
  std::vector<std::uint8_t> cells(std::size_t(n * n), 0);
  const int rects = 2 + int(rng.index(5));
  std::vector<int> members;
  for (int k = 0; k < rects; ++k) {
    const int w = 6 + int(rng.index(11)), h = 6 + int(rng.index(11));
    int ax, ay;  // a cell the rectangle must contain
    if (members.empty()) {
      ax = ay = n / 2;
    } else {
      const int m = members[rng.index(members.size())];
      ax = m % n;
      ay = m / n;
    }
    const int x0 = std::clamp(ax - int(rng.index(std::size_t(w))), 0, n - w);
    const int y0 = std::clamp(ay - int(rng.index(std::size_t(h))), 0, n - h);
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) cells[std::size_t(y * n + x)] = 1;
    members.clear();
    for (int i = 0; i < n * n; ++i)
      if (cells[std::size_t(i)]) members.push_back(i);
  }
  fill_holes(cells, n);
  const auto corners = trace(cells, n);
  const double unit = extent / n;
  auto world = [&](double x, double y) {
    return Vec2{center.x + (x - 0.5 * n) * unit, center.y + (y - 0.5 * n) * unit};
  };
  std::vector<Vec2> ring;
  const std::size_t m = corners.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = corners[(i + m - 1) % m];
    const auto& b = corners[i];
    const auto& c = corners[(i + 1) % m];
    const int ux = b.first - a.first, uy = b.second - a.second;
    const int vx = c.first - b.first, vy = c.second - b.second;
    const bool convex = ux * vy - uy * vx > 0;
    const double in_len = std::abs(ux) + std::abs(uy), out_len = std::abs(vx) + std::abs(vy);
    if (convex && rng.uniform() < 0.3) {
      const double cut = rng.uniform(0.2, 0.45) * std::min(in_len, out_len);
      const double sx = ux / in_len, sy = uy / in_len, tx = vx / out_len, ty = vy / out_len;
      ring.push_back(world(b.first - sx * cut, b.second - sy * cut));
      ring.push_back(world(b.first + tx * cut, b.second + ty * cut));
    } else {
      ring.push_back(world(b.first, b.second));
    }
  }
  if (ring.size() < 4 || grid::ring_self_intersects(ring) || !(polygon_area(ring) > 0.0))
    throw Error(ErrorCode::InvalidArgument, "degenerate silhouette");
  return ring;
}

BenchmarkTask generate_task(Family family, std::uint64_t seed, double side) {
  const auto [lo, hi] = side_range(family);
  if (!(side >= lo && side <= hi))
    throw Error(ErrorCode::InvalidArgument,
                "side " + format(side) + " outside [" + format(lo) + ", " + format(hi) + "]");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    try {
      return try_generate(family, seed, side, attempt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument && e.code() != ErrorCode::EmptyDigMask) throw;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "no valid task after " + std::to_string(kMaxAttempts) + " sub-seeds");
}

BenchmarkTask generate_task(Family family, std::uint64_t seed) {
  const auto [lo, hi] = side_range(family);
  Rng rng(mix_seed(seed, 0x51de));
  return generate_task(family, seed, rng.uniform(lo, hi));
}

Score failed_score() { return Score{}; }

double coverage_by_membership(const grid::LayeredGrid& site, std::span<const Pose2> poses,
                              const global::PlannerParams& p) {
  const auto dig = grid::mask_equals(site, grid::MaskValue::Dig);
  return global::coverage_fraction(site.spec(), dig, poses, p);
}

double coverage_by_distance(const grid::LayeredGrid& site, std::span<const Pose2> poses,
                            const global::PlannerParams& p) {
  const auto& spec = site.spec();
  const auto dig = grid::mask_equals(site, grid::MaskValue::Dig);
  std::size_t n = 0, c = 0;
  if (poses.empty()) {
    for (auto d : dig) n += d;
    return n ? 0.0 : 1.0;
  }
  Vec2 lo = poses[0].position(), hi = lo;
  for (const Pose2& b : poses) {
    lo = {std::min(lo.x, b.x), std::min(lo.y, b.y)};
    hi = {std::max(hi.x, b.x), std::max(hi.y, b.y)};
  }
  // Buckets at least r_out wide, so the 3x3 neighbourhood holds every base
  // within r_out of a point.
  const double bucket = p.r_out + 1e-6;
  const int nx = int(std::floor((hi.x - lo.x) / bucket)) + 1, ny = int(std::floor((hi.y - lo.y) / bucket)) + 1;
  std::vector<std::vector<int>> buckets(std::size_t(nx) * std::size_t(ny));
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const int bx = int(std::floor((poses[k].x - lo.x) / bucket)), by = int(std::floor((poses[k].y - lo.y) / bucket));
    buckets[std::size_t(by * nx + bx)].push_back(int(k));
  }
  for (std::size_t i = 0; i < dig.size(); ++i) {
    if (!dig[i]) continue;
    ++n;
    c += covered_polar(spec.center(i), poses, buckets, lo, bucket, nx, ny, p);
  }
  return n ? double(c) / double(n) : 1.0;
}

Score score_plan(const BenchmarkTask& task, const global::CoveragePlan& plan, const global::PlannerParams& planner,
                 const ScoreParams& sp) {
  const auto dig = grid::mask_equals(task.site, grid::MaskValue::Dig);
  const double a_d = double(std::count(dig.begin(), dig.end(), 1)) * task.site.spec().cell_area();
  const auto poses = plan.working_poses();
  Score s;
  s.success = true;
  if (a_d <= 0.0) return s;
  double length = 0.0;
  for (std::size_t k = 1; k < poses.size(); ++k) length += distance(poses[k - 1].position(), poses[k].position());
  s.s_p = length / std::sqrt(a_d);
  const double a_w = 0.5 * kPi * sp.r_max * sp.r_max;
  s.s_w = double(poses.size()) * a_w / a_d;
  s.coverage = coverage_by_membership(task.site, poses, planner);
  return s;
}

std::vector<BenchRow> run_benchmark(Family family, int count, std::uint64_t seed, const BenchOptions& o) {
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "negative task count");
  std::vector<BenchRow> rows(static_cast<std::size_t>(count));
  global::PlannerParams planner = o.planner;
  planner.threads = 1;  // parallelism is across tasks
  parallel_for(rows.size(), o.threads, [&](std::size_t i) {
    BenchRow& row = rows[i];
    row.seed = seed + i;
    row.family = family;
    const BenchmarkTask task = generate_task(family, row.seed);
    row.side = task.side;
    try {
      const auto plan = global::plan_site(task.site, planner, o.plan_options);
      row.score = score_plan(task, plan, planner, o.score);
    } catch (const Error& e) {
      // Planner failures are a result, anything else is a bug.
      if (e.code() != ErrorCode::NoFeasiblePlan && e.code() != ErrorCode::NoFeasibleCornerSequence &&
          e.code() != ErrorCode::UnreachableNode && e.code() != ErrorCode::EmptyDigMask)
        throw;
      row.score = failed_score();
    }
  });
  return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::ostringstream out;
  out << "seed,family,side,success,S_p,S_w,coverage\n";
  for (const auto& r : rows)
    out << r.seed << ',' << family_name(r.family) << ',' << format(r.side) << ',' << (r.score.success ? 1 : 0) << ','
        << format(r.score.s_p) << ',' << format(r.score.s_w) << ',' << format(r.score.coverage) << '\n';
  return out.str();
}

}  // namespace earthworks::bench
