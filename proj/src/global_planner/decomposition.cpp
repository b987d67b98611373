#include <deque>

#include "earthworks/global_planner.hpp"

namespace earthworks::global {

std::string_view subroutine_name(Subroutine s) {
  switch (s) {
    case Subroutine::AlternatingLanes: return "alternating";
    case Subroutine::SameDirectionLanes: return "same_direction";
    case Subroutine::ObstaclesBothSides: return "obstacles_both_sides";
  }
  return "unknown";
}

Subroutine parse_subroutine(std::string_view s) {
  for (Subroutine v : kSubroutines)
    if (subroutine_name(v) == s) return v;
  throw Error(ErrorCode::Parse, "unknown subroutine '" + std::string(s) + "'");
}

RotatedFrame RotatedFrame::make(double theta, double resolution) {
  RotatedFrame f;
  f.theta = theta;
  f.resolution = resolution;
  f.e_v = {std::cos(theta), std::sin(theta)};
  f.e_u = {-std::sin(theta), std::cos(theta)};
  return f;
}

namespace {

struct Interval {
  int lo, hi;
};

std::vector<Interval> slice_intervals(const std::vector<std::uint8_t>& bins, int iu, int nv) {
  std::vector<Interval> runs;
  const std::uint8_t* row = bins.data() + std::size_t(iu) * nv;
  for (int iv = 0; iv < nv;) {
    if (!row[iv]) {
      ++iv;
      continue;
    }
    int end = iv;
    while (end + 1 < nv && row[end + 1]) ++end;
    runs.push_back({iv, end});
    iv = end + 1;
  }
  // Aliasing from the rotated resampling: close pinholes, drop slivers.
  std::vector<Interval> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.lo - merged.back().hi - 1 <= 2)
      merged.back().hi = r.hi;
    else
      merged.push_back(r);
  }
  if (merged.size() > 1) {
    std::vector<Interval> kept;
    for (const auto& r : merged)
      if (r.hi > r.lo) kept.push_back(r);
    if (!kept.empty()) merged = std::move(kept);
  }
  return merged;
}

}  // namespace

Decomposition decompose(const grid::GridSpec& spec, std::span<const std::uint8_t> dig, double theta) {
  if (dig.size() != spec.size()) throw Error(ErrorCode::InvalidArgument, "dig mask size mismatch");
  Decomposition d;
  RotatedFrame& f = d.frame;
  f = RotatedFrame::make(theta, spec.resolution);
  double umin = grid::kInf, umax = -grid::kInf, vmin = grid::kInf, vmax = -grid::kInf;
  std::size_t count = 0;
  for (std::size_t i = 0; i < dig.size(); ++i) {
    if (!dig[i]) continue;
    const Vec2 p = spec.center(i);
    umin = std::min(umin, f.u(p));
    umax = std::max(umax, f.u(p));
    vmin = std::min(vmin, f.v(p));
    vmax = std::max(vmax, f.v(p));
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyDigMask, "dig mask is empty");
  const double res = spec.resolution;
  f.u0 = umin - res;
  f.v0 = vmin - res;
  f.nu = int(std::ceil((umax - umin) / res)) + 3;
  f.nv = int(std::ceil((vmax - vmin) / res)) + 3;

  std::vector<std::uint8_t> bins(std::size_t(f.nu) * f.nv, 0);
  for (int iu = 0; iu < f.nu; ++iu)
    for (int iv = 0; iv < f.nv; ++iv) {
      const auto c = spec.locate(f.world(f.bin_u(iu), f.bin_v(iv)));
      if (c && dig[spec.index(c->row, c->col)]) bins[std::size_t(iu) * f.nv + iv] = 1;
    }

  struct Open {
    int cell;
    Interval iv;
  };
  std::vector<Cell> cells;
  std::vector<Open> open;
  for (int iu = 0; iu < f.nu; ++iu) {
    const auto ivs = slice_intervals(bins, iu, f.nv);
    std::vector<std::vector<int>> hits_of_interval(ivs.size()), hits_of_open(open.size());
    for (std::size_t a = 0; a < ivs.size(); ++a)
      for (std::size_t b = 0; b < open.size(); ++b)
        if (ivs[a].lo <= open[b].iv.hi && ivs[a].hi >= open[b].iv.lo) {
          hits_of_interval[a].push_back(int(b));
          hits_of_open[b].push_back(int(a));
        }
    std::vector<Open> next;
    for (std::size_t a = 0; a < ivs.size(); ++a) {
      const auto& h = hits_of_interval[a];
      if (h.size() == 1 && hits_of_open[h[0]].size() == 1) {
        const int id = open[h[0]].cell;
        cells[id].extents.push_back({ivs[a].lo, ivs[a].hi});
        next.push_back({id, ivs[a]});
      } else {
        Cell c;
        c.id = int(cells.size());
        c.first_slice = iu;
        c.extents.push_back({ivs[a].lo, ivs[a].hi});
        next.push_back({c.id, ivs[a]});
        cells.push_back(std::move(c));
      }
    }
    open = std::move(next);
  }

  d.bin_label.assign(bins.size(), -1);
  for (const Cell& c : cells)
    for (std::size_t k = 0; k < c.extents.size(); ++k)
      for (int iv = c.extents[k].first; iv <= c.extents[k].second; ++iv)
        d.bin_label[std::size_t(c.first_slice + int(k)) * f.nv + iv] = c.id;

  // Push labels back to grid cells: own bin first, then flood from
  // labelled neighbours so the grid partition is exact.
  d.grid_label.assign(spec.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < dig.size(); ++i) {
    if (!dig[i]) continue;
    const Vec2 p = spec.center(i);
    const int iu = int(std::lround((f.u(p) - f.u0) / res));
    const int iv = int(std::lround((f.v(p) - f.v0) / res));
    const int lab = d.label_at_bin(iu, iv);
    if (lab >= 0) {
      d.grid_label[i] = lab;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const auto ci = spec.cell(i);
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int r = ci.row + dr, c = ci.col + dc;
        if (!spec.in_bounds(r, c)) continue;
        const std::size_t j = spec.index(r, c);
        if (dig[j] && d.grid_label[j] < 0) {
          d.grid_label[j] = d.grid_label[i];
          queue.push_back(j);
        }
      }
  }
  // Dig cells in components without any labelled bin (far below the
  // bin resolution) go to the nearest cell by centroid later.
  std::vector<double> sx(cells.size(), 0.0), sy(cells.size(), 0.0);
  std::vector<std::size_t> n(cells.size(), 0);
  for (std::size_t i = 0; i < dig.size(); ++i) {
    const int lab = d.grid_label[i];
    if (lab < 0) continue;
    const Vec2 p = spec.center(i);
    sx[lab] += p.x;
    sy[lab] += p.y;
    ++n[lab];
  }

  // Drop cells that received no grid cells and renumber.
  std::vector<int> remap(cells.size(), -1);
  std::vector<Cell> kept;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (n[k] == 0) continue;
    remap[k] = int(kept.size());
    Cell c = std::move(cells[k]);
    c.id = remap[k];
    c.cell_count = n[k];
    c.area = double(n[k]) * spec.cell_area();
    c.centroid = {sx[k] / double(n[k]), sy[k] / double(n[k])};
    const int s0 = c.first_slice, s1 = c.last_slice();
    const auto& e0 = c.extents.front();
    const auto& e1 = c.extents.back();
    c.corners[corner_index(0, 0)] = f.world(f.bin_u(s0), f.bin_v(e0.first));
    c.corners[corner_index(0, 1)] = f.world(f.bin_u(s0), f.bin_v(e0.second));
    c.corners[corner_index(1, 0)] = f.world(f.bin_u(s1), f.bin_v(e1.first));
    c.corners[corner_index(1, 1)] = f.world(f.bin_u(s1), f.bin_v(e1.second));
    kept.push_back(std::move(c));
  }
  for (int& l : d.bin_label)
    if (l >= 0) l = remap[l];
  for (std::size_t i = 0; i < dig.size(); ++i) {
    if (!dig[i]) continue;
    int& l = d.grid_label[i];
    if (l >= 0) {
      l = remap[l];
      continue;
    }
    const Vec2 p = spec.center(i);
    double best = grid::kInf;
    for (const Cell& c : kept) {
      const double dd = (c.centroid - p).squared_norm();
      if (dd < best) {
        best = dd;
        l = c.id;
      }
    }
    if (l >= 0) {
      ++kept[l].cell_count;
      kept[l].area = double(kept[l].cell_count) * spec.cell_area();
    }
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyDigMask, "dig mask vanished under resampling");
  d.cells = std::move(kept);
  return d;
}

}  // namespace earthworks::global
