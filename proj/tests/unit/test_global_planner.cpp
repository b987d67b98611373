#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "earthworks/global_planner.hpp"

using namespace earthworks;
using namespace earthworks::global;
using grid::GridSpec;

namespace {

GridSpec make_spec(int rows, int cols, double res, Vec2 origin = {0, 0}) {
  GridSpec s;
  s.rows = rows;
  s.cols = cols;
  s.resolution = res;
  s.origin = origin;
  return s;
}

std::vector<std::uint8_t> mask_where(const GridSpec& s, const std::function<bool(Vec2)>& f) {
  std::vector<std::uint8_t> m(s.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = f(s.center(i));
  return m;
}

bool in_box(Vec2 p, double x0, double y0, double x1, double y1) {
  return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
}

void check_partition(const GridSpec& s, const std::vector<std::uint8_t>& dig, const Decomposition& d) {
  std::size_t n_dig = 0, n_cells = 0;
  for (std::size_t i = 0; i < dig.size(); ++i) {
    n_dig += dig[i];
    CHECK((d.grid_label[i] >= 0) == bool(dig[i]));
  }
  std::vector<std::size_t> per(d.cells.size(), 0);
  for (int l : d.grid_label)
    if (l >= 0) ++per[l];
  for (const Cell& c : d.cells) {
    CHECK(c.cell_count == per[c.id]);
    CHECK(c.area > 0);
    n_cells += c.cell_count;
    for (const auto& e : c.extents) CHECK(e.first <= e.second);
  }
  CHECK(n_cells == n_dig);
  (void)s;
}

// Rectangle 20 x 12 m with a 4 x 4 m obstacle in the middle.
std::vector<std::uint8_t> convex_fixture(const GridSpec& s) {
  return mask_where(s, [](Vec2 p) { return in_box(p, 0, 0, 20, 12) && !in_box(p, 8, 4, 12, 8); });
}

// Rectangle with an H-shaped obstacle lying on its side: two horizontal
// bars joined by a vertical bar, leaving one pocket open to each side.
std::vector<std::uint8_t> pocket_fixture(const GridSpec& s) {
  return mask_where(s, [](Vec2 p) {
    if (!in_box(p, 0, 0, 30, 14)) return false;
    const bool bars = in_box(p, 6, 3, 24, 4.5) || in_box(p, 6, 9.5, 24, 11);
    const bool web = in_box(p, 14, 3, 16, 11);
    return !(bars || web);
  });
}

std::set<int> in_edges(const QuotientGraph& g, int v) {
  std::set<int> s;
  for (int i = 0; i < g.n; ++i)
    if (g.has_edge(i, v)) s.insert(i);
  return s;
}

QuotientGraph graph_from(int n, const std::vector<std::pair<int, int>>& edges) {
  QuotientGraph g;
  g.n = n;
  g.out.resize(n);
  for (auto [a, b] : edges) g.out[a].push_back(b);
  for (auto& o : g.out) {
    std::sort(o.begin(), o.end());
    o.erase(std::unique(o.begin(), o.end()), o.end());
  }
  return g;
}

// Exhaustive minimum branch-vertex count over all in-arborescences.
int exhaustive_min_branches(const QuotientGraph& g, int root) {
  std::vector<int> parent(g.n, -1);
  int best = g.n + 1;
  std::function<void(int)> rec = [&](int v) {
    if (v == g.n) {
      for (int x = 0; x < g.n; ++x) {
        int steps = 0;
        for (int y = x; y != root; y = parent[y])
          if (++steps > g.n) return;
      }
      best = std::min(best, count_branch_vertices(parent));
      return;
    }
    if (v == root) return rec(v + 1);
    for (int p : g.out[v]) {
      parent[v] = p;
      rec(v + 1);
    }
    parent[v] = -1;
  };
  rec(0);
  return best;
}

bool reaches_all(const QuotientGraph& g, int root, const std::vector<char>& alive) {
  std::vector<char> seen(g.n, 0);
  std::vector<int> stack{root};
  seen[root] = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int v = 0; v < g.n; ++v)
      if (alive[v] && !seen[v] && g.has_edge(v, x)) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  for (int v = 0; v < g.n; ++v)
    if (alive[v] && !seen[v]) return false;
  return true;
}

double brute_force_dp(const CornerDpProblem& p, std::optional<int> start) {
  double best = grid::kInf;
  std::vector<int> pick(p.options.size(), 0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t k, double acc) {
    if (k == p.options.size()) {
      best = std::min(best, acc);
      return;
    }
    for (std::size_t o = 0; o < p.options[k].size(); ++o) {
      const CellOption& c = p.options[k][o];
      if (k == 0 && start && c.entry != *start) continue;
      double v = acc;
      if (k > 0) v += p.transfer[k - 1][p.options[k - 1][pick[k - 1]].exit][c.entry];
      v += c.cost;
      pick[k] = int(o);
      rec(k + 1, v);
    }
  };
  rec(0, 0.0);
  return best;
}

CornerDpProblem random_dp(Rng& rng, int n, double p_block) {
  CornerDpProblem p;
  for (int k = 0; k < n; ++k) {
    std::vector<CellOption> opts;
    for (int entry = 0; entry < 4; ++entry)
      for (Subroutine s : kSubroutines)
        for (int flip = 0; flip < 2; ++flip) {
          if (rng.uniform() < 0.15) continue;
          opts.push_back({entry, int(rng.index(4)), s, bool(flip), std::round(rng.uniform(5, 50) * 8) / 8});
        }
    p.options.push_back(opts);
  }
  for (int k = 0; k + 1 < n; ++k) {
    std::array<std::array<double, 4>, 4> t{};
    for (auto& row : t)
      for (double& x : row) x = rng.uniform() < p_block ? grid::kInf : std::round(rng.uniform(0, 30) * 8) / 8;
    p.transfer.push_back(t);
  }
  return p;
}

}  // namespace

TEST_CASE("obstacle-free rectangle aligned with the sweep is one cell") {
  const auto s = make_spec(60, 100, 0.2);
  const auto dig = mask_where(s, [](Vec2 p) { return in_box(p, 2, 2, 18, 10); });
  for (double theta : {0.0, kPi / 2}) {
    const auto d = decompose(s, dig, theta);
    CHECK(d.cells.size() == 1);
    check_partition(s, dig, d);
    const auto g = quotient_graph(d);
    CHECK(g.n == 1);
    CHECK(g.out[0].empty());
  }
}

TEST_CASE("empty dig mask is rejected") {
  const auto s = make_spec(10, 10, 0.5);
  std::vector<std::uint8_t> dig(s.size(), 0);
  CHECK_THROWS_AS(decompose(s, dig, 0.0), Error);
}

TEST_CASE("convex obstacle splits the rectangle into four cells with an undirected graph") {
  const auto s = make_spec(60, 100, 0.2, {0.1, 0.1});
  const auto dig = convex_fixture(s);
  const auto d = decompose(s, dig, kPi / 2);
  REQUIRE(d.cells.size() == 4);
  check_partition(s, dig, d);
  const auto g = quotient_graph(d);
  CHECK(g.undirected());
  // The two cells flanking the obstacle are not adjacent to each other.
  int edges = 0;
  for (const auto& o : g.out) edges += int(o.size());
  CHECK(edges == 8);
}

TEST_CASE("concave pockets only have outgoing edges and are excavated first") {
  const auto s = make_spec(70, 150, 0.2, {0.1, 0.1});
  const auto dig = pocket_fixture(s);
  // theta = pi/2: lanes along y, sweep towards -x, so cell 0 is the right end.
  const auto d = decompose(s, dig, kPi / 2);
  REQUIRE(d.cells.size() == 6);
  check_partition(s, dig, d);
  const auto g = quotient_graph(d);
  CHECK_FALSE(g.undirected());
  CHECK(in_edges(g, 2).empty());
  CHECK(in_edges(g, 4).empty());
  CHECK(g.out[2] == std::vector<int>{0});
  CHECK(g.out[4] == std::vector<int>{5});
  // Pocket 2 sits right of the web, pocket 4 left of it.
  CHECK(d.cells[2].centroid.x > 16);
  CHECK(d.cells[4].centroid.x < 14);

  std::vector<Vec2> cents;
  for (const auto& c : d.cells) cents.push_back(c.centroid);
  const auto tree = best_rooted_tree(g, cents);
  CHECK_FALSE(tree.undirected_fallback);
  const auto seq = excavation_sequence(visit_order(tree, d));
  REQUIRE(seq.size() == 6);
  auto pos = [&](int c) { return std::find(seq.begin(), seq.end(), c) - seq.begin(); };
  CHECK(pos(2) < pos(0));
  CHECK(pos(4) < pos(5));
}

TEST_CASE("decomposition partitions random masks at random orientations") {
  Rng rng(11);
  const auto s = make_spec(50, 50, 0.4);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::uint8_t> dig(s.size(), 0);
    const int blobs = 1 + int(rng.index(3));
    std::vector<std::array<double, 4>> boxes, holes;
    for (int b = 0; b < blobs; ++b) {
      const double x = rng.uniform(1, 12), y = rng.uniform(1, 12);
      boxes.push_back({x, y, x + rng.uniform(3, 8), y + rng.uniform(3, 8)});
    }
    if (rng.uniform() < 0.6) {
      const double x = rng.uniform(3, 12), y = rng.uniform(3, 12);
      holes.push_back({x, y, x + rng.uniform(1, 3), y + rng.uniform(1, 3)});
    }
    for (std::size_t i = 0; i < dig.size(); ++i) {
      const Vec2 p = s.center(i);
      bool in = false;
      for (auto& b : boxes) in = in || in_box(p, b[0], b[1], b[2], b[3]);
      for (auto& h : holes) in = in && !in_box(p, h[0], h[1], h[2], h[3]);
      dig[i] = in;
    }
    if (std::count(dig.begin(), dig.end(), 1) == 0) continue;
    const double theta = rng.uniform(0, kPi);
    const auto d = decompose(s, dig, theta);
    check_partition(s, dig, d);
    const auto g = quotient_graph(d);
    for (int i = 0; i < g.n; ++i)
      for (int j : g.out[i]) CHECK(i != j);
  }
}

TEST_CASE("spanning tree of a path graph is the path itself") {
  const auto g = graph_from(4, {{1, 0}, {0, 1}, {2, 1}, {1, 2}, {3, 2}, {2, 3}});
  std::vector<Vec2> c{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const auto t = min_branching_tree(g, c, 0);
  CHECK(t.branch_vertices == 0);
  CHECK(t.parent == std::vector<int>{-1, 0, 1, 2});
}

TEST_CASE("star graph has exactly one branch vertex") {
  const auto g = graph_from(4, {{1, 0}, {2, 0}, {3, 0}, {0, 1}, {0, 2}, {0, 3}});
  std::vector<Vec2> c{{0, 0}, {1, 0}, {0, 1}, {-1, 0}};
  CHECK(min_branching_tree(g, c, 0).branch_vertices == 1);
  CHECK(best_rooted_tree(g, c).branch_vertices == 1);
}

TEST_CASE("unreachable node is named") {
  const auto g = graph_from(3, {{1, 0}});
  std::vector<Vec2> c{{0, 0}, {1, 0}, {2, 0}};
  try {
    min_branching_tree(g, c, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnreachableNode);
    CHECK(std::string(e.what()).find("cell 2") != std::string::npos);
  }
}

TEST_CASE("branch-vertex count matches exhaustive enumeration on random graphs") {
  Rng rng(5);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 150; ++trial) {
    const int n = 2 + int(rng.index(7));
    const double p = n == 8 ? 0.3 : 0.45;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && rng.uniform() < p) edges.push_back({i, j});
    const auto g = graph_from(n, edges);
    std::vector<Vec2> c;
    for (int i = 0; i < n; ++i) c.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    const int root = int(rng.index(n));
    if (!reaches_all(g, root, std::vector<char>(n, 1))) continue;
    const auto t = min_branching_tree(g, c, root);
    CHECK(t.exact);
    CHECK(t.branch_vertices == exhaustive_min_branches(g, root));
    CHECK(count_branch_vertices(t.parent) == t.branch_vertices);
    for (int v = 0; v < n; ++v)
      if (v != root) CHECK(g.has_edge(v, t.parent[v]));
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("visit order of a chain is post-order") {
  Decomposition d;
  d.cells.resize(3);
  for (int i = 0; i < 3; ++i) {
    d.cells[i].id = i;
    d.cells[i].centroid = {double(i) * 10, 0};
    d.cells[i].corners = {Vec2{i * 10.0, 0}, Vec2{i * 10.0, 0}, Vec2{i * 10.0, 0}, Vec2{i * 10.0, 0}};
  }
  SpanningTree t;
  t.root = 0;
  t.parent = {-1, 0, 1};
  t.children = {{1}, {2}, {}};
  const auto walk = visit_order(t, d);
  CHECK(excavation_sequence(walk) == std::vector<int>{2, 1, 0});

  SpanningTree single;
  single.root = 0;
  single.parent = {-1};
  single.children = {{}};
  Decomposition d1;
  d1.cells.resize(1);
  CHECK(excavation_sequence(visit_order(single, d1)) == std::vector<int>{0});
}

TEST_CASE("excavating in visit order never strands a remaining cell") {
  for (double theta : {kPi / 2, 0.0, 0.4}) {
    const auto s = make_spec(70, 150, 0.2, {0.1, 0.1});
    const auto dig = pocket_fixture(s);
    const auto d = decompose(s, dig, theta);
    const auto g = quotient_graph(d);
    std::vector<Vec2> cents;
    for (const auto& c : d.cells) cents.push_back(c.centroid);
    const auto tree = best_rooted_tree(g, cents);
    if (tree.undirected_fallback) continue;
    const auto seq = excavation_sequence(visit_order(tree, d));
    std::vector<char> alive(g.n, 1);
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      alive[seq[k]] = 0;
      CHECK(reaches_all(g, tree.root, alive));
    }
  }
}

TEST_CASE("single-stage corner DP is the minimum over options") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_dp(rng, 1, 0.0);
    if (p.options[0].empty()) continue;
    const int start = int(rng.index(4));
    const double bf = brute_force_dp(p, start);
    if (!(bf < grid::kInf)) {
      CHECK_THROWS_AS(corner_dp(p, start), Error);
      continue;
    }
    CHECK(corner_dp(p, start).cost == bf);
  }
}

TEST_CASE("corner DP equals exhaustive enumeration, including blocked transfers") {
  Rng rng(17);
  int compared = 0;
  for (int trial = 0; trial < 260; ++trial) {
    const int n = 2 + int(rng.index(3));  // exhaustive enumeration grows as 24^n
    const auto p = random_dp(rng, n, trial % 2 ? 0.4 : 0.0);
    const double bf = brute_force_dp(p, std::nullopt);
    if (!(bf < grid::kInf)) {
      CHECK_THROWS_AS(corner_dp(p), Error);
      continue;
    }
    const auto r = corner_dp(p);
    CHECK(r.cost == bf);
    // The reported choice reproduces the cost.
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k > 0) acc += p.transfer[k - 1][p.options[k - 1][r.choice[k - 1]].exit][p.options[k][r.choice[k]].entry];
      acc += p.options[k][r.choice[k]].cost;
    }
    CHECK(acc == r.cost);
    ++compared;
  }
  CHECK(compared >= 200);
}

TEST_CASE("blocked transfer is routed through another corner") {
  CornerDpProblem p;
  p.options = {{{0, 1, Subroutine::AlternatingLanes, false, 10.0}, {0, 3, Subroutine::SameDirectionLanes, false, 12.0}},
               {{0, 2, Subroutine::AlternatingLanes, false, 5.0}, {2, 3, Subroutine::AlternatingLanes, false, 5.0}}};
  std::array<std::array<double, 4>, 4> t{};
  for (auto& row : t) row.fill(1.0);
  p.transfer = {t};
  CHECK(corner_dp(p).cost == 16.0);
  p.transfer[0][1].fill(grid::kInf);
  const auto r = corner_dp(p);
  CHECK(r.cost == 18.0);
  CHECK(r.choice[0] == 1);
  p.transfer[0][3].fill(grid::kInf);
  try {
    corner_dp(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoFeasibleCornerSequence);
    CHECK(std::string(e.what()).find("stage 1") != std::string::npos);
  }
}

TEST_CASE("exit corner follows the lane pattern") {
  // Two alternating lanes from corner 0 end on the far sweep side at low v.
  CHECK(exit_corner(0, Subroutine::AlternatingLanes, false, 2) == corner_index(1, 0));
  CHECK(exit_corner(0, Subroutine::AlternatingLanes, false, 3) == corner_index(1, 1));
  CHECK(exit_corner(0, Subroutine::SameDirectionLanes, false, 2) == corner_index(1, 1));
  CHECK(exit_corner(0, Subroutine::AlternatingLanes, true, 2) == corner_index(1, 1));
  // Center-out with 4 lanes ends on the far side.
  CHECK(corner_u_side(exit_corner(0, Subroutine::ObstaclesBothSides, false, 4)) == 1);
  CHECK(corner_u_side(exit_corner(1, Subroutine::ObstaclesBothSides, false, 4)) == 0);
  // A single lane crosses to the other sweep side.
  CHECK(exit_corner(0, Subroutine::AlternatingLanes, false, 1) == corner_index(1, 1));
}

TEST_CASE("lane arithmetic") {
  PlannerParams params;
  const double w = params.lane_spacing(0.1);
  CHECK(w == doctest::Approx(2 * 4.5 * std::sin(0.95) - 0.1 * std::sqrt(2.0)));
  CHECK(params.pose_spacing() == doctest::Approx(2.5));

  const auto s = make_spec(200, 400, 0.1, {0.05, 0.05});
  const std::vector<std::uint8_t> none(s.size(), 0);
  FootprintChecker checker(s, none, params.half_length, params.half_width);

  SUBCASE("cell one lane wide has collinear poses") {
    // 5 m wide strip, lanes along x.
    const auto dig = mask_where(s, [](Vec2 p) { return in_box(p, 10, 5, 30, 10); });
    const auto d = decompose(s, dig, 0.0);
    REQUIRE(d.cells.size() == 1);
    for (int entry = 0; entry < 4; ++entry) {
      const auto ls = lanes(d.cells[0], d.frame, entry, Subroutine::AlternatingLanes, false, params, checker);
      CHECK(ls.lane_count == 1);
      REQUIRE(ls.poses.size() >= 2);
      for (const auto& p : ls.poses) CHECK(p.y == doctest::Approx(ls.poses[0].y));
    }
  }

  SUBCASE("pit 15.6 x 11.5 m is covered by two lanes along its long side") {
    const auto dig = mask_where(s, [](Vec2 p) { return in_box(p, 10, 4, 25.6, 15.5); });
    const auto d = decompose(s, dig, 0.0);
    REQUIRE(d.cells.size() == 1);
    const auto ls = lanes(d.cells[0], d.frame, 0, Subroutine::AlternatingLanes, false, params, checker);
    CHECK(ls.lane_count == 2);
    CHECK(ls.turns == 1);
    CHECK(ls.cost < grid::kInf);
  }

  SUBCASE("pose count times spacing reaches the lane length") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
      const double x0 = rng.uniform(9, 12), y0 = rng.uniform(4, 6);
      const double lx = rng.uniform(3, 20), ly = rng.uniform(3, 10);
      const auto dig = mask_where(s, [&](Vec2 p) { return in_box(p, x0, y0, x0 + lx, y0 + ly); });
      const auto d = decompose(s, dig, 0.0);
      REQUIRE(d.cells.size() == 1);
      const auto ls = lanes(d.cells[0], d.frame, 0, Subroutine::SameDirectionLanes, false, params, checker);
      std::map<int, int> count;
      for (int l : ls.lane_of_pose) ++count[l];
      for (auto [lane, c] : count) CHECK(c * params.pose_spacing() >= lx - 1e-9);
    }
  }
}

TEST_CASE("plan poses stay clear of obstacles and transfers avoid them") {
  PlannerParams params;
  GridSpec s = make_spec(60, 90, 0.5, {0.25, 0.25});
  PlanInputs in;
  in.spec = s;
  in.dig = mask_where(s, [](Vec2 p) { return in_box(p, 10, 8, 30, 20); });
  in.blocked = mask_where(s, [](Vec2 p) { return in_box(p, 36, 10, 38, 18); });
  const auto plan = plan_at(in, 0.0, params);
  FootprintChecker checker(s, in.blocked, params.half_length, params.half_width);
  for (const auto& p : plan.poses)
    if (p.working) CHECK_FALSE(checker.collides(p.pose));
  CHECK(plan.metrics.workspaces == int(plan.working_poses().size()));
  CHECK(plan.metrics.covered_fraction > 0.9);
  // Lane indices are non-decreasing along the plan.
  int last = -1;
  for (const auto& p : plan.poses)
    if (p.lane >= 0) {
      CHECK(p.lane >= last);
      last = p.lane;
    }
}

TEST_CASE("orientation follows the main axis of a trench") {
  PlannerParams params;
  params.c_ax = 1;
  params.c_p = params.c_n = params.c_a = 0;
  params.grid_samples = 12;
  const auto s = make_spec(60, 60, 0.5);
  PlanInputs in;
  in.spec = s;
  // Trench along the direction 0.6 rad.
  const Vec2 a{5, 5}, dir = unit(0.6);
  in.dig = mask_where(s, [&](Vec2 p) {
    const Vec2 q = p - a;
    const double along = q.dot(dir), across = q.cross(dir);
    return along > 0 && along < 28 && std::abs(across) < 1.5;
  });
  in.blocked.assign(s.size(), 0);
  const auto r = optimize_orientation(in, params);
  CHECK(r.main_axis == doctest::Approx(0.6).epsilon(0.02));
  CHECK(std::abs(r.theta - r.main_axis) < 1e-12);
  CHECK(r.objective == doctest::Approx(0.0));
}

TEST_CASE("square site gives the same objective a quarter turn apart") {
  PlannerParams params;
  const auto s = make_spec(40, 40, 0.5, {0.25, 0.25});
  PlanInputs in;
  in.spec = s;
  in.dig = mask_where(s, [](Vec2 p) { return in_box(p, 5, 5, 15, 15); });
  in.blocked.assign(s.size(), 0);
  const double phi = principal_axis(s, in.dig);
  for (double theta : {0.0, 0.3}) {
    const double j0 = objective(plan_at(in, theta, params), phi, params);
    const double j1 = objective(plan_at(in, theta + kPi / 2, params), phi, params);
    CHECK(j0 == doctest::Approx(j1).epsilon(1e-6));
  }
}

TEST_CASE("component order matches brute-force permutations") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) cost[a][b] = rng.uniform(1, 20);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = grid::kInf;
    do best = std::min(best, open_path_cost(cost, perm));
    while (std::next_permutation(perm.begin(), perm.end()));
    const auto order = order_components(cost);
    CHECK(order.size() == std::size_t(n));
    CHECK(open_path_cost(cost, order) == doctest::Approx(best).epsilon(1e-12));
  }
  // Collinear components: spatial order.
  std::vector<double> xs{0, 30, 10, 20};
  std::vector<std::vector<double>> cost(4, std::vector<double>(4, 0.0));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) cost[a][b] = std::abs(xs[a] - xs[b]);
  const auto order = order_components(cost);
  const bool forward = order == std::vector<int>{0, 2, 3, 1};
  const bool backward = order == std::vector<int>{1, 3, 2, 0};
  CHECK((forward || backward));
}

TEST_CASE("multi-component site plans are deterministic and round-trip through JSON") {
  const auto s = make_spec(40, 80, 0.5, {0.25, 0.25});
  grid::LayeredGrid site(s);
  site.add_layer(grid::layer::kElevation, 0.0);
  site.add_layer(grid::layer::kTargetElevation, -1.0);
  site.add_layer(grid::layer::kExcavationMask, double(grid::MaskValue::Neutral));
  auto m = site.layer(grid::layer::kExcavationMask);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec2 p = s.center(i);
    if (in_box(p, 3, 3, 12, 14) || in_box(p, 22, 4, 30, 12) || in_box(p, 28, 14, 36, 19)) m[i] = 0;
  }
  PlannerParams params;
  params.grid_samples = 6;
  params.refine_tolerance = 0.1;
  const auto a = plan_site(site, params);
  params.threads = 3;
  const auto b = plan_site(site, params);
  CHECK(plan_to_json(a) == plan_to_json(b));
  CHECK(a.component_theta.size() == 3);
  const auto c = plan_from_json(plan_to_json(a));
  CHECK(plan_to_json(c) == plan_to_json(a));
  CHECK(c.poses.size() == a.poses.size());
  CHECK_THROWS_AS(plan_from_json("{\"format\": 1}"), Error);
}
