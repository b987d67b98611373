#include <algorithm>

#include "earthworks/gridmap.hpp"

namespace earthworks::grid {

std::string_view mask_value_name(MaskValue v) {
  switch (v) {
    case MaskValue::Dig: return "dig";
    case MaskValue::PermanentDump: return "permanent_dump";
    case MaskValue::Neutral: return "neutral";
    case MaskValue::NoGo: return "nogo";
    case MaskValue::Boundary: return "boundary";
  }
  return "unknown";
}

std::optional<CellIndex> GridSpec::locate(Vec2 p) const {
  const Vec2 f = fractional(p);
  const int c = int(std::floor(f.x + 0.5));
  const int r = int(std::floor(f.y + 0.5));
  if (!in_bounds(r, c)) return std::nullopt;
  return CellIndex{r, c};
}

LayeredGrid::LayeredGrid(GridSpec spec) : spec_(std::move(spec)) {
  if (!(spec_.resolution > 0.0) || spec_.rows <= 0 || spec_.cols <= 0)
    throw Error(ErrorCode::InvalidArgument, "grid spec needs resolution > 0 and positive dims");
}

std::size_t LayeredGrid::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return names_.size();
}

void LayeredGrid::add_layer(const std::string& name, double fill) {
  set_layer(name, std::vector<double>(size(), fill));
}

void LayeredGrid::set_layer(const std::string& name, std::vector<double> values) {
  if (values.size() != size())
    throw Error(ErrorCode::InvalidArgument, "layer '" + name + "' has wrong size");
  const std::size_t i = find(name);
  if (i == names_.size()) {
    names_.push_back(name);
    data_.push_back(std::move(values));
  } else {
    data_[i] = std::move(values);
  }
}

bool LayeredGrid::has_layer(const std::string& name) const { return find(name) != names_.size(); }

std::span<double> LayeredGrid::layer(const std::string& name) {
  const std::size_t i = find(name);
  if (i == names_.size()) throw Error(ErrorCode::InvalidArgument, "no layer '" + name + "'");
  return data_[i];
}

std::span<const double> LayeredGrid::layer(const std::string& name) const {
  const std::size_t i = find(name);
  if (i == names_.size()) throw Error(ErrorCode::InvalidArgument, "no layer '" + name + "'");
  return data_[i];
}

std::vector<MaskValue> LayeredGrid::mask_values() const {
  auto m = layer(layer::kExcavationMask);
  std::vector<MaskValue> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = static_cast<MaskValue>(int(m[i]));
  return out;
}

std::array<Vec2, 4> Footprint::corners() const {
  return {to_world(pose, {half_length, half_width}), to_world(pose, {-half_length, half_width}),
          to_world(pose, {-half_length, -half_width}), to_world(pose, {half_length, -half_width})};
}

std::vector<std::uint8_t> mask_equals(const LayeredGrid& grid, MaskValue v) {
  auto m = grid.layer(layer::kExcavationMask);
  std::vector<std::uint8_t> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = int(m[i]) == int(v);
  return out;
}

double volume_between(const LayeredGrid& grid, const std::string& a, const std::string& b,
                      std::span<const std::uint8_t> region) {
  auto la = grid.layer(a);
  auto lb = grid.layer(b);
  if (region.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "region size mismatch");
  std::vector<std::size_t> bad;
  double sum = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (!region[i]) continue;
    if (!std::isfinite(la[i]) || !std::isfinite(lb[i])) {
      bad.push_back(i);
      continue;
    }
    sum += la[i] - lb[i];
  }
  if (!bad.empty()) {
    std::string msg = "sentinel values in region at cells";
    for (std::size_t k = 0; k < bad.size() && k < 20; ++k) {
      const CellIndex c = grid.spec().cell(bad[k]);
      msg += " (" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
    }
    if (bad.size() > 20) msg += " and " + std::to_string(bad.size() - 20) + " more";
    throw Error(ErrorCode::InsufficientData, msg);
  }
  return sum * grid.spec().cell_area();
}

LayeredGrid fill_holes(const LayeredGrid& grid, const std::string& name) {
  LayeredGrid out = grid;
  auto v = out.layer(name);
  const int rows = grid.rows(), cols = grid.cols();
  if (std::none_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }))
    throw Error(ErrorCode::AllSentinel, "layer '" + name + "' has no finite values");
  std::vector<std::uint8_t> hole(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) hole[i] = !std::isfinite(v[i]);
  std::vector<double> next(v.begin(), v.end());
  // Fills from the hole boundary inward, then relaxes the filled cells
  // towards the discrete harmonic interpolant.
  auto pass = [&](bool fill) {
    double change = 0.0;
    bool any = false;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const std::size_t i = grid.spec().index(r, c);
        if (!hole[i] || (fill && std::isfinite(v[i]))) continue;
        double sum = 0.0;
        int n = 0;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if ((dr || dc) && grid.spec().in_bounds(r + dr, c + dc)) {
              const double x = v[grid.spec().index(r + dr, c + dc)];
              if (std::isfinite(x)) {
                sum += x;
                ++n;
              }
            }
          }
        if (n > 0) {
          next[i] = sum / n;
          if (std::isfinite(v[i])) change = std::max(change, std::abs(next[i] - v[i]));
          any = true;
        }
      }
    }
    std::copy(next.begin(), next.end(), v.begin());
    return fill ? double(any) : change;
  };
  while (pass(true) > 0.0) {
  }
  for (int it = 0; it < 100000 && pass(false) > 1e-12; ++it) {
  }
  return out;
}

std::vector<int> connected_components(const GridSpec& spec, std::span<const std::uint8_t> set, int* count) {
  std::vector<int> label(spec.size(), -1);
  int n = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < spec.size(); ++s) {
    if (!set[s] || label[s] >= 0) continue;
    label[s] = n;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const CellIndex ci = spec.cell(i);
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = ci.row + dr, c = ci.col + dc;
          if (!spec.in_bounds(r, c)) continue;
          const std::size_t j = spec.index(r, c);
          if (set[j] && label[j] < 0) {
            label[j] = n;
            stack.push_back(j);
          }
        }
    }
    ++n;
  }
  if (count) *count = n;
  return label;
}

}  // namespace earthworks::grid
