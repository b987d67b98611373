#include <limits>

#include "earthworks/gridmap.hpp"

namespace earthworks::grid {

namespace {

// 1D squared distance transform of a sampled function (Felzenszwalb and
// Huttenlocher). Inputs are integers or +inf so the output is exact.
void dt1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

std::vector<double> squared_edt(const GridSpec& spec, std::span<const std::uint8_t> set) {
  const int rows = spec.rows, cols = spec.cols;
  std::vector<double> g(spec.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = set[i] ? 0.0 : kInf;
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> in(std::max(rows, cols)), out(std::max(rows, cols));
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) in[r] = g[spec.index(r, c)];
    dt1d(in.data(), out.data(), rows, v, z);
    for (int r = 0; r < rows; ++r) g[spec.index(r, c)] = out[r];
  }
  for (int r = 0; r < rows; ++r) {
    double* row = g.data() + spec.index(r, 0);
    std::copy(row, row + cols, in.begin());
    dt1d(in.data(), row, cols, v, z);
  }
  return g;
}

}  // namespace

DistanceField distance_transform(const GridSpec& spec, std::span<const std::uint8_t> set) {
  if (set.size() != spec.size()) throw Error(ErrorCode::InvalidArgument, "set size mismatch");
  DistanceField out;
  out.empty_set = std::none_of(set.begin(), set.end(), [](std::uint8_t b) { return b != 0; });
  if (out.empty_set) {
    out.values.assign(spec.size(), kInf);
    return out;
  }
  out.values = squared_edt(spec, set);
  for (double& d : out.values) d = std::sqrt(d) * spec.resolution;
  return out;
}

DistanceField signed_distance(const LayeredGrid& grid, std::span<const MaskValue> values) {
  auto m = grid.layer(layer::kExcavationMask);
  std::vector<std::uint8_t> set(grid.size(), 0);
  for (std::size_t i = 0; i < set.size(); ++i)
    for (MaskValue v : values)
      if (int(m[i]) == int(v)) set[i] = 1;
  return distance_transform(grid.spec(), set);
}

std::vector<double> signed_distance_field(const GridSpec& spec, std::span<const std::uint8_t> set) {
  DistanceField outside = distance_transform(spec, set);
  std::vector<std::uint8_t> comp(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) comp[i] = !set[i];
  DistanceField inside = distance_transform(spec, comp);
  std::vector<double> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) out[i] = set[i] ? -inside.values[i] : outside.values[i];
  return out;
}

std::vector<std::uint8_t> dilate(const GridSpec& spec, std::span<const std::uint8_t> set, double radius) {
  const DistanceField d = distance_transform(spec, set);
  std::vector<std::uint8_t> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) out[i] = d.values[i] <= radius + 1e-12;
  return out;
}

}  // namespace earthworks::grid
