#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "earthworks/nav_planner.hpp"

namespace earthworks::nav {

namespace {

struct Node {
  Pose2 pose;
  int parent = -1;
  RsPath from_parent;
  double cost = 0.0;
  double penalty = 0.0;
  std::vector<int> children;
};

struct GoalLink {
  int node;
  RsPath path;
  double edge;
};

double metric(const Pose2& a, const Pose2& b, double radius) {
  return std::hypot(a.x - b.x, a.y - b.y) + 0.5 * radius * std::abs(wrap_angle(a.heading - b.heading));
}

bool within_tolerance(const Pose2& a, const Pose2& b, const NavParams& p) {
  return std::hypot(a.x - b.x, a.y - b.y) <= p.goal_tolerance &&
         std::abs(wrap_angle(a.heading - b.heading)) <= p.heading_tolerance;
}

void shift_subtree(std::vector<Node>& tree, int root, double delta) {
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    tree[v].cost += delta;
    for (int c : tree[v].children) stack.push_back(c);
  }
}

}  // namespace

std::vector<PathSample> PathPlan::sample(double step) const {
  std::vector<PathSample> out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto part = rs_sample(waypoints[i], segments[i], step);
    out.insert(out.end(), part.begin() + (out.empty() ? 0 : 1), part.end());
  }
  if (out.empty() && !waypoints.empty()) out.push_back({waypoints.front(), true});
  return out;
}

double plan_cost(const OccupancyGrid& occ, const PathPlan& plan, const NavParams& p) {
  double c = 0.0;
  for (std::size_t i = 0; i < plan.segments.size(); ++i)
    c += edge_cost(occ, plan.waypoints[i + 1], plan.segments[i], p);
  return c;
}

bool plan_trial(const OccupancyGrid& occ, const Pose2& start, const Pose2& goal, const NavParams& p,
                std::uint64_t seed, PathPlan& out) {
  out = {};
  if (within_tolerance(start, goal, p)) {
    out.waypoints = {start};
    return true;
  }
  if (!state_valid(occ, start, p) || !state_valid(occ, goal, p)) return false;
  const double rho = p.turning_radius;
  const grid::GridSpec& spec = occ.spec;
  const double half = 0.5 * spec.resolution;
  const double x0 = spec.origin.x - half + p.half_width;
  const double x1 = spec.origin.x + (spec.cols - 0.5) * spec.resolution - p.half_width;
  const double y0 = spec.origin.y - half + p.half_width;
  const double y1 = spec.origin.y + (spec.rows - 0.5) * spec.resolution - p.half_width;
  const double goal_penalty = dug_penalty(occ, goal, p);

  std::vector<Node> tree;
  tree.push_back({start, -1, {}, 0.0, dug_penalty(occ, start, p), {}});
  std::vector<GoalLink> links;
  auto try_goal = [&](int v) {
    if (std::hypot(tree[v].pose.x - goal.x, tree[v].pose.y - goal.y) > p.connect_radius) return;
    const RsPath path = reeds_shepp(tree[v].pose, goal, rho);
    if (path_valid(occ, tree[v].pose, path, p)) links.push_back({v, path, p.alpha * path.length() + goal_penalty});
  };
  try_goal(0);

  Rng rng(seed);
  int first_found = links.empty() ? -1 : 0;
  int it = 0;
  std::vector<std::pair<double, int>> near;
  for (; it < p.max_iterations; ++it) {
    if (first_found >= 0 && it - first_found >= p.improve_iterations) break;
    Pose2 q;
    if (rng.uniform() < p.goal_bias) {
      q = goal;
    } else {
      q.x = rng.uniform(x0, x1);
      q.y = rng.uniform(y0, y1);
      q.heading = rng.uniform(-kPi, kPi);
    }
    near.clear();
    for (int v = 0; v < int(tree.size()); ++v) near.push_back({metric(tree[v].pose, q, rho), v});
    const auto nearest = *std::min_element(near.begin(), near.end());
    const Pose2& np = tree[nearest.second].pose;
    const double d = std::hypot(q.x - np.x, q.y - np.y);
    if (d > p.extend) {
      q.x = np.x + (q.x - np.x) * p.extend / d;
      q.y = np.y + (q.y - np.y) * p.extend / d;
    }
    if (!state_valid(occ, q, p)) continue;

    for (auto& [m, v] : near) m = metric(tree[v].pose, q, rho);
    const double k_rrt = 2.0 * std::exp(1.0) * std::log(double(tree.size()) + 1.0);
    const std::size_t k = std::min(near.size(), std::size_t(std::ceil(k_rrt)));
    std::partial_sort(near.begin(), near.begin() + std::ptrdiff_t(k), near.end());

    const double pen = dug_penalty(occ, q, p);
    struct Option {
      double cost;
      int v;
      RsPath path;
    };
    std::vector<Option> options;
    for (std::size_t i = 0; i < k; ++i) {
      const int v = near[i].second;
      const RsPath path = reeds_shepp(tree[v].pose, q, rho);
      options.push_back({tree[v].cost + p.alpha * path.length() + pen, v, path});
    }
    std::stable_sort(options.begin(), options.end(), [](const Option& a, const Option& b) { return a.cost < b.cost; });
    std::optional<Option> chosen;
    for (const Option& o : options)
      if (path_valid(occ, tree[o.v].pose, o.path, p)) {
        chosen = o;
        break;
      }
    if (!chosen) continue;
    const int id = int(tree.size());
    tree.push_back({q, chosen->v, chosen->path, chosen->cost, pen, {}});
    tree[chosen->v].children.push_back(id);

    for (std::size_t i = 0; i < k; ++i) {
      const int v = near[i].second;
      if (v == chosen->v || v == 0) continue;
      const RsPath path = reeds_shepp(q, tree[v].pose, rho);
      const double c = tree[id].cost + p.alpha * path.length() + tree[v].penalty;
      if (c >= tree[v].cost - 1e-9) continue;
      // Never hang a node below its own descendant.
      bool cycle = false;
      for (int x = id; x >= 0; x = tree[x].parent)
        if (x == v) cycle = true;
      if (cycle || !path_valid(occ, q, path, p)) continue;
      auto& siblings = tree[tree[v].parent].children;
      siblings.erase(std::find(siblings.begin(), siblings.end(), v));
      tree[v].parent = id;
      tree[v].from_parent = path;
      tree[id].children.push_back(v);
      shift_subtree(tree, v, c - tree[v].cost);
    }
    const std::size_t before = links.size();
    try_goal(id);
    if (first_found < 0 && links.size() > before) first_found = it;
  }

  if (links.empty()) {
    out.iterations = it;
    return false;
  }
  const GoalLink* best = nullptr;
  for (const GoalLink& l : links)
    if (!best || tree[l.node].cost + l.edge < tree[best->node].cost + best->edge) best = &l;
  std::vector<int> chain;
  for (int v = best->node; v >= 0; v = tree[v].parent) chain.push_back(v);
  std::reverse(chain.begin(), chain.end());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out.waypoints.push_back(tree[chain[i]].pose);
    if (i > 0) out.segments.push_back(tree[chain[i]].from_parent);
  }
  out.waypoints.push_back(goal);
  out.segments.push_back(best->path);
  out.cost = tree[best->node].cost + best->edge;
  for (const RsPath& s : out.segments) out.length += s.length();
  out.iterations = it;
  return true;
}

PathPlan plan_path(const OccupancyGrid& occ, const Pose2& start, const Pose2& goal, const NavParams& p,
                   std::uint64_t seed) {
  const int batch = std::max(1, p.threads);
  for (int first = 0; first < p.trials; first += batch) {
    const int n = std::min(batch, p.trials - first);
    std::vector<PathPlan> plans(static_cast<std::size_t>(n));
    std::vector<char> ok(std::size_t(n), 0);
    parallel_for(std::size_t(n), p.threads, [&](std::size_t i) {
      const int trial = first + int(i);
      ok[i] = plan_trial(occ, start, goal, p, mix_seed(seed, std::uint64_t(trial)), plans[i]);
    });
    for (int i = 0; i < n; ++i)
      if (ok[std::size_t(i)]) {
        PathPlan& plan = plans[std::size_t(i)];
        plan.trial = plan.segments.empty() ? -1 : first + i;
        return plan;
      }
  }
  throw Error(ErrorCode::PathNotFound, "no path from (" + std::to_string(start.x) + ", " + std::to_string(start.y) +
                                           ") to (" + std::to_string(goal.x) + ", " + std::to_string(goal.y) +
                                           ") after " + std::to_string(p.trials) + " trials");
}

FollowResult follow_path(const PathPlan& plan, const OccupancyGrid& occ, const NavParams& p) {
  for (std::size_t i = 0; i < plan.segments.size(); ++i)
    if (!path_valid(occ, plan.waypoints[i], plan.segments[i], p))
      throw Error(ErrorCode::ReplanRequired, "segment " + std::to_string(i) + " is blocked by the current terrain");
  FollowResult r;
  r.trajectory = plan.sample(p.check_step);
  r.length = plan.length;
  r.duration = r.length / p.speed;
  return r;
}

}  // namespace earthworks::nav
