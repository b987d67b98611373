#include "earthworks/global_planner.hpp"

namespace earthworks::global {

CornerDpResult corner_dp(const CornerDpProblem& p, std::optional<int> start_corner) {
  const std::size_t n = p.options.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "corner_dp needs at least one cell");
  if (p.transfer.size() + 1 < n) throw Error(ErrorCode::InvalidArgument, "corner_dp transfer table too short");
  // value[k][o]: cheapest cost finishing stage k with option o, summed
  // as ((d_0 + t_0) + d_1) + t_1 ... like a left-to-right enumeration.
  std::vector<std::vector<double>> value(n);
  std::vector<std::vector<int>> from(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& opts = p.options[k];
    value[k].assign(opts.size(), grid::kInf);
    from[k].assign(opts.size(), -1);
    for (std::size_t o = 0; o < opts.size(); ++o) {
      if (k == 0) {
        if (start_corner && opts[o].entry != *start_corner) continue;
        value[k][o] = opts[o].cost;
        continue;
      }
      double best = grid::kInf;
      int arg = -1;
      const auto& prev = p.options[k - 1];
      for (std::size_t q = 0; q < prev.size(); ++q) {
        const double v = value[k - 1][q] + p.transfer[k - 1][prev[q].exit][opts[o].entry];
        if (v < best) {
          best = v;
          arg = int(q);
        }
      }
      value[k][o] = best + opts[o].cost;
      from[k][o] = arg;
    }
    if (std::none_of(value[k].begin(), value[k].end(), [](double v) { return v < grid::kInf; }))
      throw Error(ErrorCode::NoFeasibleCornerSequence,
                  "no feasible corner sequence: blocked at stage " + std::to_string(k));
  }
  CornerDpResult r;
  int arg = -1;
  for (std::size_t o = 0; o < value[n - 1].size(); ++o)
    if (value[n - 1][o] < r.cost) {
      r.cost = value[n - 1][o];
      arg = int(o);
    }
  r.choice.assign(n, -1);
  for (std::size_t k = n; k-- > 0;) {
    r.choice[k] = arg;
    arg = from[k][arg];
  }
  return r;
}

}  // namespace earthworks::global
