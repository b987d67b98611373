#include <algorithm>
#include <cmath>

#include "earthworks/dig_planner.hpp"

namespace earthworks::dig {

namespace {

Vec2 cartesian(double r, double theta) { return unit(theta) * r; }

Sample clamp_polar(const Sector& s, Vec2 p) {
  const double er = 1e-6 * (s.r_out - s.r_in), et = 1e-6 * (s.theta_max - s.theta_min);
  return {std::clamp(p.norm(), s.r_in + er, s.r_out - er),
          std::clamp(std::atan2(p.y, p.x), s.theta_min + et, s.theta_max - et), 0.0};
}

bool in_sector(const Sector& s, Vec2 p) {
  const double r = p.norm();
  return r >= s.r_in && r <= s.r_out && std::atan2(p.y, p.x) >= s.theta_min && std::atan2(p.y, p.x) <= s.theta_max;
}

void bounding_box(const Sector& s, Vec2& lo, Vec2& hi) {
  lo = {grid::kInf, grid::kInf};
  hi = {-grid::kInf, -grid::kInf};
  constexpr int kSteps = 64;
  for (int i = 0; i <= kSteps; ++i) {
    const double th = s.theta_min + (s.theta_max - s.theta_min) * i / kSteps;
    for (double r : {s.r_in, s.r_out}) {
      const Vec2 p = cartesian(r, th);
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  }
}

std::size_t argmax_volume(const std::vector<Sample>& samples) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].volume > samples[best].volume) best = i;
  return best;
}

AttackResult finish(std::vector<Sample> samples) {
  AttackResult out;
  const std::size_t b = argmax_volume(samples);
  out.r = samples[b].r;
  out.theta = samples[b].theta;
  out.volume = samples[b].volume;
  out.nothing_to_dig = out.volume <= 0.0;
  out.samples = std::move(samples);
  return out;
}

}  // namespace

std::vector<Sample> initial_design(const Sector& s, int count, std::uint64_t seed) {
  if (count <= 0) return {};
  Vec2 lo, hi;
  bounding_box(s, lo, hi);
  double spacing = std::sqrt(s.area() / count);
  std::vector<Vec2> lattice;
  for (int attempt = 0; attempt < 200; ++attempt) {
    lattice.clear();
    for (double y = lo.y + 0.5 * spacing; y <= hi.y; y += spacing)
      for (double x = lo.x + 0.5 * spacing; x <= hi.x; x += spacing)
        if (in_sector(s, {x, y})) lattice.push_back({x, y});
    if (int(lattice.size()) >= count) break;
    spacing *= 0.95;
  }
  Rng rng(seed);
  for (std::size_t i = lattice.size(); i > 1; --i) std::swap(lattice[i - 1], lattice[rng.index(i)]);
  if (int(lattice.size()) > count) lattice.resize(std::size_t(count));
  std::vector<Sample> out;
  for (const Vec2& p : lattice) {
    const double jx = rng.normal(), jy = rng.normal();
    out.push_back(clamp_polar(s, p + Vec2{jx, jy} * (0.25 * spacing)));
  }
  return out;
}

AttackResult optimize_attack(const DigScene& scene, const TrajectoryParams& params, const BoParams& bo,
                             std::uint64_t seed) {
  params.validate();
  const Sector& s = scene.sector;
  std::vector<Sample> samples = initial_design(s, bo.initial, seed);
  parallel_for(samples.size(), bo.threads,
               [&](std::size_t i) { samples[i].volume = scoop_volume(scene, samples[i].r, samples[i].theta, params); });

  std::vector<Vec2> lattice;
  for (int i = 0; i < bo.candidates_r; ++i)
    for (int j = 0; j < bo.candidates_theta; ++j)
      lattice.push_back(cartesian(s.r_in + (s.r_out - s.r_in) * (i + 0.5) / bo.candidates_r,
                                  s.theta_min + (s.theta_max - s.theta_min) * (j + 0.5) / bo.candidates_theta));

  Rng rng(mix_seed(seed, 0x5eed));
  GaussianProcess gp(bo.gp);
  for (int it = 0; it < bo.iterations; ++it) {
    std::vector<Vec2> xs;
    std::vector<double> ys;
    for (const Sample& smp : samples) {
      xs.push_back(cartesian(smp.r, smp.theta));
      ys.push_back(smp.volume);
    }
    gp.fit(xs, ys);
    const Sample& inc = samples[argmax_volume(samples)];
    const double best = inc.volume;

    std::vector<Vec2> cand = lattice;
    const Vec2 c0 = cartesian(inc.r, inc.theta);
    for (int k = 0; k < 32; ++k) {
      const double jx = rng.normal(), jy = rng.normal();
      const Sample p = clamp_polar(s, c0 + Vec2{jx, jy} * 0.3);
      cand.push_back(cartesian(p.r, p.theta));
    }
    double best_ei = -1.0;
    Vec2 pick = cand.front();
    for (const Vec2& c : cand) {
      bool seen = false;
      for (const Vec2& x : xs)
        if (distance(c, x) < 1e-6) seen = true;
      if (seen) continue;
      const auto [m, sd] = gp.predict(c);
      const double ei = expected_improvement(m, sd, best, bo.xi);
      if (ei > best_ei) {
        best_ei = ei;
        pick = c;
      }
    }
    Sample next = clamp_polar(s, pick);
    next.volume = scoop_volume(scene, next.r, next.theta, params);
    samples.push_back(next);
  }
  return finish(std::move(samples));
}

AttackResult grid_search_attack(const DigScene& scene, const TrajectoryParams& params, int samples) {
  const Sector& s = scene.sector;
  const double arc = 0.5 * (s.r_in + s.r_out) * (s.theta_max - s.theta_min);
  const int nr = std::max(2, int(std::lround(std::sqrt(samples * (s.r_out - s.r_in) / arc))));
  const int nt = std::max(2, int(std::ceil(double(samples) / nr)));
  std::vector<Sample> out;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      Sample p{s.r_in + (s.r_out - s.r_in) * (i + 0.5) / nr, s.theta_min + (s.theta_max - s.theta_min) * (j + 0.5) / nt,
               0.0};
      p.volume = scoop_volume(scene, p.r, p.theta, params);
      out.push_back(p);
    }
  return finish(std::move(out));
}

}  // namespace earthworks::dig
