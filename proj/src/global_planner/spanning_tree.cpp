#include <algorithm>
#include <deque>
#include <functional>

#include "earthworks/global_planner.hpp"

namespace earthworks::global {

int count_branch_vertices(std::span<const int> parent) {
  std::vector<int> kids(parent.size(), 0);
  for (int p : parent)
    if (p >= 0) ++kids[p];
  return int(std::count_if(kids.begin(), kids.end(), [](int k) { return k > 1; }));
}

namespace {

double tree_length(std::span<const int> parent, std::span<const Vec2> centroids) {
  double s = 0.0;
  for (std::size_t v = 0; v < parent.size(); ++v)
    if (parent[v] >= 0) s += distance(centroids[v], centroids[parent[v]]);
  return s;
}

// Nodes that can reach root, in BFS order from it over reversed edges.
std::vector<int> reaching_order(const QuotientGraph& g, int root) {
  std::vector<std::vector<int>> in(g.n);
  for (int v = 0; v < g.n; ++v)
    for (int p : g.out[v]) in[p].push_back(v);
  std::vector<int> order{root};
  std::vector<char> seen(g.n, 0);
  seen[root] = 1;
  for (std::size_t k = 0; k < order.size(); ++k)
    for (int v : in[order[k]])
      if (!seen[v]) {
        seen[v] = 1;
        order.push_back(v);
      }
  return order;
}

struct Candidate {
  std::vector<int> parent;
  int branches = 0;
  double length = grid::kInf;
  bool valid = false;
};

bool better(int b1, double l1, const std::vector<int>& p1, const Candidate& c) {
  if (!c.valid) return true;
  if (b1 != c.branches) return b1 < c.branches;
  if (l1 != c.length) return l1 < c.length;
  return p1 < c.parent;
}

class BranchAndBound {
 public:
  BranchAndBound(const QuotientGraph& g, std::span<const Vec2> centroids, int root, std::vector<int> order,
                 std::size_t budget)
      : g_(g), centroids_(centroids), root_(root), order_(std::move(order)), budget_(budget) {
    parent_.assign(g.n, -1);
    kids_.assign(g.n, 0);
    min_edge_suffix_.assign(order_.size() + 1, 0.0);
    for (int k = int(order_.size()) - 1; k >= 1; --k) {
      const int v = order_[k];
      double m = grid::kInf;
      for (int p : g.out[v]) m = std::min(m, edge(v, p));
      min_edge_suffix_[k] = min_edge_suffix_[k + 1] + m;
    }
  }

  void seed(const Candidate& c) { best_ = c; }

  Candidate run() {
    search(1, 0, 0.0);
    return best_;
  }
  bool exhausted() const { return expansions_ >= budget_; }

 private:
  double edge(int v, int p) const { return distance(centroids_[v], centroids_[p]); }

  bool creates_cycle(int v, int p) const {
    for (int x = p; x >= 0; x = parent_[x])
      if (x == v) return true;
    return false;
  }

  void search(std::size_t k, int branches, double length) {
    if (expansions_++ >= budget_) return;
    if (best_.valid) {
      if (branches > best_.branches) return;
      if (branches == best_.branches && length + min_edge_suffix_[k] > best_.length * (1 + 1e-12) + 1e-12) return;
    }
    if (k == order_.size()) {
      const double len = tree_length(parent_, centroids_);
      if (better(branches, len, parent_, best_)) {
        best_.parent = parent_;
        best_.branches = branches;
        best_.length = len;
        best_.valid = true;
      }
      return;
    }
    const int v = order_[k];
    std::vector<int> cand(g_.out[v].begin(), g_.out[v].end());
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
      const int ka = kids_[a] > 0, kb = kids_[b] > 0;
      if (ka != kb) return ka < kb;
      return edge(v, a) < edge(v, b);
    });
    for (int p : cand) {
      if (creates_cycle(v, p)) continue;
      parent_[v] = p;
      const int add = kids_[p] == 1 ? 1 : 0;
      ++kids_[p];
      search(k + 1, branches + add, length + edge(v, p));
      --kids_[p];
      parent_[v] = -1;
    }
  }

  const QuotientGraph& g_;
  std::span<const Vec2> centroids_;
  int root_;
  std::vector<int> order_;
  std::size_t budget_;
  std::size_t expansions_ = 0;
  std::vector<int> parent_;
  std::vector<int> kids_;
  std::vector<double> min_edge_suffix_;
  Candidate best_;
};

Candidate greedy_tree(const QuotientGraph& g, std::span<const Vec2> centroids, int root) {
  Candidate c;
  c.parent.assign(g.n, -1);
  std::vector<char> in_tree(g.n, 0);
  std::vector<int> kids(g.n, 0);
  in_tree[root] = 1;
  for (int added = 1; added < g.n; ++added) {
    int bv = -1, bp = -1;
    int bk = 0;
    double bd = grid::kInf;
    for (int v = 0; v < g.n; ++v) {
      if (in_tree[v]) continue;
      for (int p : g.out[v]) {
        if (!in_tree[p]) continue;
        const int k = kids[p] > 0;
        const double dd = distance(centroids[v], centroids[p]);
        if (bv < 0 || k < bk || (k == bk && dd < bd)) {
          bv = v;
          bp = p;
          bk = k;
          bd = dd;
        }
      }
    }
    if (bv < 0) return c;
    c.parent[bv] = bp;
    in_tree[bv] = 1;
    ++kids[bp];
  }
  c.branches = count_branch_vertices(c.parent);
  c.length = tree_length(c.parent, centroids);
  c.valid = true;
  return c;
}

SpanningTree finish(const QuotientGraph& g, const Candidate& c, int root, bool exact) {
  SpanningTree t;
  t.root = root;
  t.parent = c.parent;
  t.children.assign(g.n, {});
  for (int v = 0; v < g.n; ++v)
    if (t.parent[v] >= 0) t.children[t.parent[v]].push_back(v);
  t.branch_vertices = c.branches;
  t.length = c.length;
  t.exact = exact;
  return t;
}

}  // namespace

SpanningTree min_branching_tree(const QuotientGraph& g, std::span<const Vec2> centroids, int root,
                                int exact_limit) {
  if (root < 0 || root >= g.n) throw Error(ErrorCode::InvalidArgument, "root out of range");
  auto order = reaching_order(g, root);
  if (int(order.size()) != g.n) {
    std::vector<char> seen(g.n, 0);
    for (int v : order) seen[v] = 1;
    int missing = 0;
    while (seen[missing]) ++missing;
    throw Error(ErrorCode::UnreachableNode,
                "cell " + std::to_string(missing) + " cannot reach root " + std::to_string(root));
  }
  Candidate incumbent = greedy_tree(g, centroids, root);
  const std::size_t budget = g.n <= exact_limit ? 2'000'000 : 200'000;
  BranchAndBound bb(g, centroids, root, std::move(order), budget);
  if (incumbent.valid) bb.seed(incumbent);
  Candidate best = bb.run();
  return finish(g, best, root, g.n <= exact_limit && !bb.exhausted());
}

SpanningTree best_rooted_tree(const QuotientGraph& g, std::span<const Vec2> centroids, int exact_limit) {
  auto best_over = [&](const QuotientGraph& graph) {
    std::optional<SpanningTree> best;
    for (int r = 0; r < graph.n; ++r) {
      if (int(reaching_order(graph, r).size()) != graph.n) continue;
      SpanningTree t = min_branching_tree(graph, centroids, r, exact_limit);
      if (!best || t.branch_vertices < best->branch_vertices ||
          (t.branch_vertices == best->branch_vertices && t.length < best->length))
        best = std::move(t);
    }
    return best;
  };
  if (auto t = best_over(g)) return *t;
  QuotientGraph sym = g;
  for (int i = 0; i < g.n; ++i)
    for (int j : g.out[i]) sym.out[j].push_back(i);
  for (auto& o : sym.out) {
    std::sort(o.begin(), o.end());
    o.erase(std::unique(o.begin(), o.end()), o.end());
  }
  if (auto t = best_over(sym)) {
    t->undirected_fallback = true;
    return *t;
  }
  // Disconnected even ignoring directions: report from root 0.
  return min_branching_tree(sym, centroids, 0, exact_limit);
}

std::vector<Visit> visit_order(const SpanningTree& tree, const Decomposition& d) {
  const int n = int(tree.parent.size());
  std::vector<std::vector<int>> kids = tree.children;
  for (int p = 0; p < n; ++p) {
    auto key = [&](int c) {
      double best = grid::kInf;
      for (const Vec2& corner : d.cells[p].corners) best = std::min(best, distance(d.cells[c].centroid, corner));
      return best;
    };
    std::stable_sort(kids[p].begin(), kids[p].end(), [&](int a, int b) {
      const double ka = key(a), kb = key(b);
      if (ka != kb) return ka > kb;
      return a < b;
    });
  }
  std::vector<int> post;
  std::function<void(int)> dfs = [&](int v) {
    for (int c : kids[v]) dfs(c);
    post.push_back(v);
  };
  dfs(tree.root);

  std::vector<int> depth(n, 0);
  for (int v : post) {
    int dd = 0;
    for (int x = v; tree.parent[x] >= 0; x = tree.parent[x]) ++dd;
    depth[v] = dd;
  }
  std::vector<Visit> walk;
  walk.push_back({post[0], true});
  for (std::size_t k = 1; k < post.size(); ++k) {
    int a = post[k - 1], b = post[k];
    std::vector<int> up, down;
    while (depth[a] > depth[b]) {
      a = tree.parent[a];
      up.push_back(a);
    }
    while (depth[b] > depth[a]) {
      down.push_back(b);
      b = tree.parent[b];
    }
    while (a != b) {
      a = tree.parent[a];
      up.push_back(a);
      down.push_back(b);
      b = tree.parent[b];
    }
    // up ends at the common ancestor; down starts at post[k].
    if (!up.empty() && !down.empty() && up.back() == down.back()) down.pop_back();
    for (int x : up)
      if (x != post[k]) walk.push_back({x, false});
    for (auto it = down.rbegin(); it != down.rend(); ++it)
      if (*it != post[k]) walk.push_back({*it, false});
    walk.push_back({post[k], true});
  }
  return walk;
}

std::vector<int> excavation_sequence(std::span<const Visit> walk) {
  std::vector<int> seq;
  for (const Visit& v : walk)
    if (v.excavate) seq.push_back(v.cell);
  return seq;
}

}  // namespace earthworks::global
