#include "earthworks/soil_sim.hpp"

namespace earthworks::soil {

double apply_scoop(grid::LayeredGrid& g, std::span<const CellChange> removed) {
  auto elev = g.layer(grid::layer::kElevation);
  double sum = 0.0;
  for (const auto& c : removed) {
    if (c.index >= elev.size()) throw Error(ErrorCode::InvalidArgument, "scoop cell outside grid");
    elev[c.index] -= c.delta;
    sum += c.delta;
  }
  return sum * g.spec().cell_area();
}

double apply_changes(grid::LayeredGrid& g, std::span<const CellChange> changes) {
  auto elev = g.layer(grid::layer::kElevation);
  double sum = 0.0;
  for (const auto& c : changes) {
    if (c.index >= elev.size()) throw Error(ErrorCode::InvalidArgument, "change outside grid");
    elev[c.index] += c.delta;
    sum += c.delta;
  }
  return sum * g.spec().cell_area();
}

std::vector<CellChange> deposit_field(const grid::GridSpec& spec, const DepositSpec& d,
                                      std::span<const std::uint8_t> receiving) {
  if (!(d.volume >= 0.0)) throw Error(ErrorCode::InvalidArgument, "deposit volume must be >= 0");
  if (!(d.sigma_x > 0.0 && d.sigma_y > 0.0) || d.slices < 1)
    throw Error(ErrorCode::InvalidArgument, "deposit needs sigma > 0 and at least one slice");
  const double c = std::cos(d.heading), s = std::sin(d.heading);
  // Sigma = R diag(sx^2, sy^2) R^T; its inverse in body coordinates is
  // diagonal, so evaluate the quadratic form after rotating into the body.
  const double norm = d.volume / d.slices / (2.0 * kPi * d.sigma_x * d.sigma_y);
  std::vector<Vec2> mu(d.slices);
  for (int i = 0; i < d.slices; ++i) {
    const double off = -0.5 * d.span + (i + 0.5) * d.span / d.slices;
    mu[i] = d.center + Vec2{-s * off, c * off};
  }
  // Mass beyond 7 sigma is below 1e-11 of the peak; renormalization folds it back.
  const double reach = 7.0 * std::max(d.sigma_x, d.sigma_y) + 0.5 * d.span;
  const Vec2 lo = spec.fractional(d.center - Vec2{reach, reach});
  const Vec2 hi = spec.fractional(d.center + Vec2{reach, reach});
  const int c0 = std::max(0, int(std::ceil(lo.x))), c1 = std::min(spec.cols - 1, int(std::floor(hi.x)));
  const int r0 = std::max(0, int(std::ceil(lo.y))), r1 = std::min(spec.rows - 1, int(std::floor(hi.y)));
  std::vector<CellChange> out;
  for (int r = r0; r <= r1; ++r) {
    for (int col = c0; col <= c1; ++col) {
      const std::size_t idx = spec.index(r, col);
      if (!receiving.empty() && !receiving[idx]) continue;
      const Vec2 p = spec.center(r, col);
      double h = 0.0;
      for (const Vec2& m : mu) {
        const Vec2 q = p - m;
        const double bx = c * q.x + s * q.y;
        const double by = -s * q.x + c * q.y;
        h += std::exp(-0.5 * (bx * bx / (d.sigma_x * d.sigma_x) + by * by / (d.sigma_y * d.sigma_y)));
      }
      h *= norm;
      if (h > 0.0) out.push_back({idx, h});
    }
  }
  return out;
}

DepositResult deposit(grid::LayeredGrid& g, const DepositSpec& d, std::span<const std::uint8_t> receiving) {
  DepositResult res;
  if (d.volume < kMinDepositVolume) {
    if (!(d.volume >= 0.0)) throw Error(ErrorCode::InvalidArgument, "deposit volume must be >= 0");
    res.skipped = true;
    return res;
  }
  res.added = deposit_field(g.spec(), d, receiving);
  const double area = g.spec().cell_area();
  double raw = 0.0;
  for (const auto& c : res.added) raw += c.delta;
  res.raw_volume = raw * area;
  if (!(raw > 0.0)) throw Error(ErrorCode::InvalidArgument, "deposit has no receiving cells near its center");
  const double scale = d.volume / res.raw_volume;
  double sum = 0.0;
  for (auto& c : res.added) {
    c.delta *= scale;
    sum += c.delta;
  }
  res.volume = sum * area;
  apply_changes(g, res.added);
  return res;
}

}  // namespace earthworks::soil
