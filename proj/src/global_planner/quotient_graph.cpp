#include <algorithm>

#include "earthworks/global_planner.hpp"

namespace earthworks::global {

bool QuotientGraph::has_edge(int i, int j) const {
  return std::binary_search(out[i].begin(), out[i].end(), j);
}

bool QuotientGraph::undirected() const {
  for (int i = 0; i < n; ++i)
    for (int j : out[i])
      if (!has_edge(j, i)) return false;
  return true;
}

QuotientGraph quotient_graph(const Decomposition& d) {
  QuotientGraph g;
  g.n = int(d.cells.size());
  g.out.resize(g.n);
  for (const Cell& c : d.cells) {
    const int s0 = c.first_slice, s1 = c.last_slice();
    const std::array<std::pair<int, int>, 4> corner_bins{
        std::pair{s0, c.extents.front().first}, std::pair{s1, c.extents.back().first},
        std::pair{s0, c.extents.front().second}, std::pair{s1, c.extents.back().second}};
    auto& out = g.out[c.id];
    for (const auto& [iu, iv] : corner_bins)
      for (int du = -1; du <= 1; ++du)
        for (int dv = -1; dv <= 1; ++dv) {
          const int lab = d.label_at_bin(iu + du, iv + dv);
          if (lab >= 0 && lab != c.id) out.push_back(lab);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return g;
}

}  // namespace earthworks::global
