#include <algorithm>
#include <memory>
#include <numeric>

#include "earthworks/global_planner.hpp"
#include "lane_cache.hpp"

namespace earthworks::global {

std::vector<Pose2> CoveragePlan::working_poses() const {
  std::vector<Pose2> out;
  for (const auto& p : poses)
    if (p.working) out.push_back(p.pose);
  return out;
}

double principal_axis(const grid::GridSpec& spec, std::span<const std::uint8_t> set) {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set[i]) {
      const Vec2 p = spec.center(i);
      sx += p.x;
      sy += p.y;
      ++n;
    }
  if (n == 0) throw Error(ErrorCode::EmptyDigMask, "principal axis of an empty set");
  const double mx = sx / n, my = sy / n;
  double m20 = 0, m02 = 0, m11 = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set[i]) {
      const Vec2 p = spec.center(i);
      m20 += (p.x - mx) * (p.x - mx);
      m02 += (p.y - my) * (p.y - my);
      m11 += (p.x - mx) * (p.y - my);
    }
  double phi = 0.5 * std::atan2(2.0 * m11, m20 - m02);
  if (phi < 0) phi += kPi;
  if (phi >= kPi) phi -= kPi;
  return phi;
}

namespace {

double axial_difference(double a, double b) {
  double d = std::fmod(a - b, kPi);
  if (d > 0.5 * kPi) d -= kPi;
  if (d < -0.5 * kPi) d += kPi;
  return d;
}

}  // namespace

CoveragePlan plan_at(const PlanInputs& in, double theta, const PlannerParams& params) {
  Decomposition d;
  QuotientGraph g;
  SpanningTree tree;
  try {
    d = decompose(in.spec, in.dig, theta);
    g = quotient_graph(d);
    std::vector<Vec2> centroids;
    for (const Cell& c : d.cells) centroids.push_back(c.centroid);
    tree = best_rooted_tree(g, centroids, params.exact_tree_limit);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyDigMask) throw;
    throw Error(ErrorCode::NoFeasiblePlan, std::string("no cell ordering: ") + e.what());
  }
  const auto walk = visit_order(tree, d);
  const auto seq = excavation_sequence(walk);
  FootprintChecker checker(in.spec, in.blocked, params.half_length, params.half_width);

  CornerDpProblem prob;
  std::vector<std::unique_ptr<LaneCache>> caches;
  std::vector<char> relaxed(seq.size(), 0);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Cell& cell = d.cells[seq[k]];
    caches.push_back(std::make_unique<LaneCache>(cell, d.frame, params, checker));
    std::vector<CellOption> opts;
    for (int relax = 0; relax < 2 && opts.empty(); ++relax) {
      for (int entry = 0; entry < 4; ++entry)
        for (Subroutine s : kSubroutines)
          for (int flip = 0; flip < 2; ++flip) {
            const LaneSet ls = caches.back()->assemble(cell, entry, s, flip, relax);
            if (ls.cost < grid::kInf)
              opts.push_back({entry, exit_corner(entry, s, flip, ls.lane_count), s, bool(flip), ls.cost});
          }
      relaxed[k] = char(relax);
    }
    prob.options.push_back(std::move(opts));
  }
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    std::array<std::array<double, 4>, 4> t{};
    const Cell& a = d.cells[seq[k]];
    const Cell& b = d.cells[seq[k + 1]];
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 4; ++y)
        t[x][y] = checker.sweep_collides(a.corners[x], b.corners[y]) ? grid::kInf
                                                                     : distance(a.corners[x], b.corners[y]);
    prob.transfer.push_back(t);
  }
  CornerDpResult dp;
  try {
    dp = corner_dp(prob);
  } catch (const Error& e) {
    std::string msg = e.what();
    const auto pos = msg.rfind(' ');
    const std::size_t stage = std::stoul(msg.substr(pos + 1));
    throw Error(ErrorCode::NoFeasiblePlan,
                "no feasible corner sequence: blocked at cell " + std::to_string(seq[stage]));
  }

  CoveragePlan plan;
  plan.theta = theta;
  plan.component_theta = {theta};
  int lane_base = 0;
  std::size_t walk_pos = 0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Cell& cell = d.cells[seq[k]];
    const CellOption& o = prob.options[k][dp.choice[k]];
    const LaneSet ls = caches[k]->assemble(cell, o.entry, o.subroutine, o.flip, relaxed[k]);
    CellVisitRecord rec;
    rec.cell = cell.id;
    rec.entry = o.entry;
    rec.exit = o.exit;
    rec.subroutine = o.subroutine;
    rec.flip = o.flip;
    rec.lane_count = ls.lane_count;
    rec.relaxed = relaxed[k];
    rec.corners = cell.corners;
    while (walk_pos < walk.size() && !walk[walk_pos].excavate) rec.traverse_before.push_back(walk[walk_pos++].cell);
    ++walk_pos;
    plan.visits.push_back(rec);
    plan.poses.push_back({{cell.corners[o.entry].x, cell.corners[o.entry].y, 0.0}, 0, cell.id, -1, false});
    int idx = -1;
    for (std::size_t j = 0; j < ls.poses.size(); ++j) {
      if (j == 0 || ls.lane_of_pose[j] != ls.lane_of_pose[j - 1]) ++idx;
      plan.poses.push_back({ls.poses[j], 0, cell.id, lane_base + idx, true});
    }
    lane_base += idx + 1;
    plan.poses.push_back({{cell.corners[o.exit].x, cell.corners[o.exit].y, 0.0}, 0, cell.id, -1, false});
  }
  const auto working = plan.working_poses();
  for (std::size_t j = 1; j < plan.poses.size(); ++j)
    plan.metrics.path_length += distance(plan.poses[j - 1].pose.position(), plan.poses[j].pose.position());
  plan.metrics.workspaces = int(working.size());
  plan.metrics.covered_fraction = coverage_fraction(in.spec, in.dig, working, params);
  plan.metrics.objective = objective(plan, principal_axis(in.spec, in.dig), params);
  return plan;
}

double objective(const CoveragePlan& plan, double main_axis, const PlannerParams& params) {
  return params.c_ax * std::abs(axial_difference(plan.theta, main_axis)) + params.c_p * plan.metrics.path_length +
         params.c_n * plan.metrics.workspaces + params.c_a * (1.0 - plan.metrics.covered_fraction);
}

OrientationResult optimize_orientation(const PlanInputs& in, const PlannerParams& params) {
  OrientationResult res;
  res.main_axis = principal_axis(in.spec, in.dig);
  auto eval_many = [&](const std::vector<double>& thetas) {
    std::vector<double> js(thetas.size(), grid::kInf);
    parallel_for(thetas.size(), params.threads, [&](std::size_t i) {
      try {
        const CoveragePlan p = plan_at(in, thetas[i], params);
        js[i] = objective(p, res.main_axis, params);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoFeasiblePlan) throw;
      }
    });
    for (std::size_t i = 0; i < thetas.size(); ++i) res.samples.push_back({thetas[i], js[i]});
    return js;
  };
  const int n = std::max(1, params.grid_samples);
  std::vector<double> thetas;
  for (int k = 0; k < n; ++k) thetas.push_back(kPi * k / n);
  thetas.push_back(res.main_axis);
  thetas.push_back(std::fmod(res.main_axis + 0.5 * kPi, kPi));
  eval_many(thetas);

  auto best_sample = [&]() {
    std::size_t b = 0;
    for (std::size_t i = 1; i < res.samples.size(); ++i) {
      const auto& [t, j] = res.samples[i];
      if (j < res.samples[b].second || (j == res.samples[b].second && t < res.samples[b].first)) b = i;
    }
    return res.samples[b];
  };
  auto [t0, j0] = best_sample();
  if (!(j0 < grid::kInf))
    throw Error(ErrorCode::NoFeasiblePlan, "no feasible plan at any sampled orientation");

  // Golden-section refinement around the best sample, bracket one grid step.
  const double step = kPi / n;
  double a = t0 - step, b = t0 + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  auto wrapped = [](double t) {
    t = std::fmod(t, kPi);
    return t < 0 ? t + kPi : t;
  };
  double c = b - gr * (b - a), d = a + gr * (b - a);
  auto one = [&](double t) { return eval_many({wrapped(t)})[0]; };
  double fc = one(c), fd = one(d);
  while (b - a > params.refine_tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = one(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = one(d);
    }
  }
  std::tie(res.theta, res.objective) = best_sample();
  return res;
}

PlanInputs site_inputs(const grid::LayeredGrid& site) {
  PlanInputs in;
  in.spec = site.spec();
  in.dig = grid::mask_equals(site, grid::MaskValue::Dig);
  in.blocked = grid::mask_equals(site, grid::MaskValue::NoGo);
  if (site.has_layer(grid::layer::kOccupancy)) {
    auto occ = site.layer(grid::layer::kOccupancy);
    for (std::size_t i = 0; i < occ.size(); ++i)
      if (occ[i] > 0.5) in.blocked[i] = 1;
  }
  return in;
}

double open_path_cost(const std::vector<std::vector<double>>& cost, std::span<const int> order) {
  double s = 0.0;
  for (std::size_t k = 1; k < order.size(); ++k) s += cost[order[k - 1]][order[k]];
  return s;
}

std::vector<int> order_components(const std::vector<std::vector<double>>& cost) {
  const int n = int(cost.size());
  if (n <= 1) return n == 1 ? std::vector<int>{0} : std::vector<int>{};
  if (n <= 12) {
    const std::size_t full = std::size_t(1) << n;
    std::vector<double> dp(full * n, grid::kInf);
    std::vector<int> prev(full * n, -1);
    for (int i = 0; i < n; ++i) dp[(std::size_t(1) << i) * n + i] = 0.0;
    for (std::size_t s = 1; s < full; ++s)
      for (int last = 0; last < n; ++last) {
        const double v = dp[s * n + last];
        if (!(s >> last & 1) || !(v < grid::kInf)) continue;
        for (int nx = 0; nx < n; ++nx) {
          if (s >> nx & 1) continue;
          const std::size_t t = s | (std::size_t(1) << nx);
          const double w = v + cost[last][nx];
          if (w < dp[t * n + nx]) {
            dp[t * n + nx] = w;
            prev[t * n + nx] = last;
          }
        }
      }
    int last = 0;
    for (int i = 1; i < n; ++i)
      if (dp[(full - 1) * n + i] < dp[(full - 1) * n + last]) last = i;
    std::vector<int> order;
    std::size_t s = full - 1;
    while (last >= 0) {
      order.push_back(last);
      const int p = prev[s * n + last];
      s &= ~(std::size_t(1) << last);
      last = p;
    }
    std::reverse(order.begin(), order.end());
    return order;
  }
  std::vector<int> best;
  double best_cost = grid::kInf;
  for (int start = 0; start < n; ++start) {
    std::vector<int> order{start};
    std::vector<char> used(n, 0);
    used[start] = 1;
    for (int k = 1; k < n; ++k) {
      int nx = -1;
      for (int j = 0; j < n; ++j)
        if (!used[j] && (nx < 0 || cost[order.back()][j] < cost[order.back()][nx])) nx = j;
      used[nx] = 1;
      order.push_back(nx);
    }
    // 2-opt on segment reversals; costs are asymmetric so recompute.
    bool improved = true;
    double cur = open_path_cost(cost, order);
    while (improved) {
      improved = false;
      for (int i = 0; i < n - 1 && !improved; ++i)
        for (int j = i + 1; j < n && !improved; ++j) {
          std::reverse(order.begin() + i, order.begin() + j + 1);
          const double c = open_path_cost(cost, order);
          if (c < cur - 1e-12) {
            cur = c;
            improved = true;
          } else {
            std::reverse(order.begin() + i, order.begin() + j + 1);
          }
        }
    }
    if (cur < best_cost) {
      best_cost = cur;
      best = order;
    }
  }
  return best;
}

CoveragePlan plan_site(const grid::LayeredGrid& site, const PlannerParams& params, const SitePlanOptions& options) {
  const PlanInputs all = site_inputs(site);
  int count = 0;
  const auto labels = grid::connected_components(all.spec, all.dig, &count);
  if (count == 0) throw Error(ErrorCode::EmptyDigMask, "site has no Dig cells");
  std::vector<CoveragePlan> plans(count);
  for (int c = 0; c < count; ++c) {
    PlanInputs in = all;
    for (std::size_t i = 0; i < in.dig.size(); ++i) in.dig[i] = labels[i] == c;
    try {
      double theta = options.fixed_theta;
      if (options.mode == OrientationMode::Optimize) theta = optimize_orientation(in, params).theta;
      if (options.mode == OrientationMode::MainAxis) theta = principal_axis(in.spec, in.dig);
      plans[c] = plan_at(in, theta, params);
    } catch (const Error& e) {
      throw Error(ErrorCode::NoFeasiblePlan, "component " + std::to_string(c) + ": " + e.what());
    }
  }
  std::vector<std::vector<double>> cost(count, std::vector<double>(count, 0.0));
  for (int a = 0; a < count; ++a)
    for (int b = 0; b < count; ++b) {
      if (a == b) continue;
      cost[a][b] = distance(plans[a].poses.back().pose.position(), plans[b].poses.front().pose.position());
    }
  const auto order = order_components(cost);
  CoveragePlan out;
  out.theta = plans[order[0]].theta;
  int lane_base = 0;
  for (int c : order) {
    out.component_theta.push_back(plans[c].theta);
    int lanes = 0;
    for (auto v : plans[c].visits) {
      v.component = int(out.component_theta.size()) - 1;
      out.visits.push_back(v);
    }
    for (auto p : plans[c].poses) {
      p.component = int(out.component_theta.size()) - 1;
      if (p.lane >= 0) {
        lanes = std::max(lanes, p.lane + 1);
        p.lane += lane_base;
      }
      out.poses.push_back(p);
    }
    lane_base += lanes;
  }
  const auto working = out.working_poses();
  for (std::size_t j = 1; j < out.poses.size(); ++j)
    out.metrics.path_length += distance(out.poses[j - 1].pose.position(), out.poses[j].pose.position());
  out.metrics.workspaces = int(working.size());
  out.metrics.covered_fraction = coverage_fraction(all.spec, all.dig, working, params);
  out.metrics.objective = params.c_p * out.metrics.path_length + params.c_n * out.metrics.workspaces +
                          params.c_a * (1.0 - out.metrics.covered_fraction);
  return out;
}

}  // namespace earthworks::global
