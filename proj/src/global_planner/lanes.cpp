#include "earthworks/global_planner.hpp"
#include "lane_cache.hpp"

namespace earthworks::global {

double PlannerParams::lane_spacing(double resolution) const {
  // Narrowest chord of the front zone is at the inner radius.
  return 2.0 * r_in * std::sin(0.5 * workspace_angle) - resolution * std::sqrt(2.0);
}

namespace {

std::vector<int> lane_order(int m, int u_side, Subroutine s) {
  std::vector<int> order;
  if (s == Subroutine::ObstaclesBothSides) {
    const int c = (m - 1) / 2;
    for (int i = c; i >= 0; --i) order.push_back(i);
    for (int i = c + 1; i < m; ++i) order.push_back(i);
  } else {
    for (int i = 0; i < m; ++i) order.push_back(i);
  }
  if (u_side == 1)
    for (int& i : order) i = m - 1 - i;
  return order;
}

// +1: lane runs from low v to high v.
std::vector<int> lane_dirs(int m, int v_end, Subroutine s, bool flip) {
  std::vector<int> dirs(m);
  int d = v_end == 0 ? 1 : -1;
  for (int k = 0; k < m; ++k) {
    dirs[k] = d;
    if (s != Subroutine::SameDirectionLanes) d = -d;
  }
  if (flip) dirs[m - 1] = -dirs[m - 1];
  return dirs;
}

}  // namespace

int exit_corner(int entry, Subroutine s, bool flip, int m) {
  const int su = corner_u_side(entry), ev = corner_v_end(entry);
  if (m <= 0) return entry;
  const auto order = lane_order(m, su, s);
  const auto dirs = lane_dirs(m, ev, s, flip);
  const int last = order.back();
  const int u_side = m == 1 ? 1 - su : (last == m - 1 ? 1 : 0);
  const int v_end = dirs.back() > 0 ? 1 : 0;
  return corner_index(u_side, v_end);
}

FootprintChecker::FootprintChecker(const grid::GridSpec& spec, std::vector<std::uint8_t> blocked,
                                   double half_length, double half_width)
    : spec_(spec), blocked_(std::move(blocked)), half_length_(half_length), half_width_(half_width) {
  clearance_ = grid::distance_transform(spec_, blocked_).values;
  circumradius_ = std::hypot(half_length, half_width);
}

bool FootprintChecker::collides(const Pose2& pose) const {
  const grid::Footprint fp{pose, half_length_, half_width_};
  const auto cs = fp.corners();
  const double half = 0.5 * spec_.resolution;
  for (const Vec2& c : cs) {
    if (c.x < spec_.origin.x - half || c.y < spec_.origin.y - half ||
        c.x > spec_.origin.x + (spec_.cols - 0.5) * spec_.resolution ||
        c.y > spec_.origin.y + (spec_.rows - 0.5) * spec_.resolution)
      return true;
  }
  if (const auto ci = spec_.locate(pose.position())) {
    if (clearance_[spec_.index(ci->row, ci->col)] > circumradius_ + spec_.resolution) return false;
  }
  bool hit = false;
  grid::for_each_cell_under(spec_, fp, [&](std::size_t i) { hit = hit || blocked_[i]; });
  return hit;
}

bool FootprintChecker::sweep_collides(Vec2 a, Vec2 b) const {
  const Vec2 d = b - a;
  const double len = d.norm();
  const double heading = len > 0 ? std::atan2(d.y, d.x) : 0.0;
  const int steps = std::max(1, int(std::ceil(len / spec_.resolution)));
  for (int k = 0; k <= steps; ++k) {
    const Vec2 p = a + d * (double(k) / steps);
    if (collides({p.x, p.y, heading})) return true;
  }
  return false;
}

LaneCache::LaneCache(const Cell& cell, const RotatedFrame& frame, const PlannerParams& params,
                     const FootprintChecker& checker)
    : frame_(frame), params_(params), checker_(checker) {
  const double res = frame.resolution;
  const double ua = frame.bin_u(cell.first_slice) - 0.5 * res;
  const double ub = frame.bin_u(cell.last_slice()) + 0.5 * res;
  const double lu = ub - ua;
  const double w = params.lane_spacing(res);
  const int m = lu <= w ? 1 : int(std::ceil(lu / w - 1e-9));
  const double h = 0.5 * std::min(w, lu) + 0.5 * res * std::sqrt(2.0);
  const double x0 = std::sqrt(std::max(0.0, params.r_out * params.r_out - h * h));
  const double step = params.pose_spacing();
  lanes_.resize(m);
  for (int i = 0; i < m; ++i) {
    Lane& L = lanes_[i];
    L.u = m == 1 ? 0.5 * (ua + ub) : ua + 0.5 * w + i * (lu - w) / (m - 1);
    double lo = grid::kInf, hi = -grid::kInf;
    int nearest = cell.first_slice;
    for (int s = cell.first_slice; s <= cell.last_slice(); ++s) {
      const double su = frame.bin_u(s);
      if (std::abs(su - L.u) < std::abs(frame.bin_u(nearest) - L.u)) nearest = s;
      if (std::abs(su - L.u) > 0.5 * w + 0.5 * res) continue;
      const auto& e = cell.extents[s - cell.first_slice];
      lo = std::min(lo, frame.bin_v(e.first));
      hi = std::max(hi, frame.bin_v(e.second));
    }
    if (lo > hi) {
      const auto& e = cell.extents[nearest - cell.first_slice];
      lo = frame.bin_v(e.first);
      hi = frame.bin_v(e.second);
    }
    L.v_lo = lo - 0.5 * res;
    L.v_hi = hi + 0.5 * res;
    for (int dir = 0; dir < 2; ++dir) {
      const double sign = dir == 0 ? 1.0 : -1.0;
      const double start = dir == 0 ? L.v_lo : L.v_hi;
      const double end = dir == 0 ? L.v_hi : L.v_lo;
      const double heading = frame.theta + (dir == 0 ? kPi : 0.0);
      auto& poses = L.poses[dir];
      for (int k = 0;; ++k) {
        const double bv = start + sign * (x0 + k * step);
        const Vec2 p = frame.world(L.u, bv);
        poses.push_back({p.x, p.y, wrap_angle(heading)});
        if (sign * (bv - end) >= params.r_in - 1e-9) break;
      }
      auto& free = L.free[dir];
      free.resize(poses.size());
      for (std::size_t k = 0; k < poses.size(); ++k) free[k] = !checker.collides(poses[k]);
    }
  }
}

std::vector<Pose2> LaneCache::relaxed_poses(int lane, int dir) const {
  const Lane& L = lanes_[lane];
  const auto& poses = L.poses[dir];
  std::vector<Pose2> out;
  const Vec2 back = frame_.e_v * (dir == 0 ? -1.0 : 1.0);  // towards the lane start
  const double res = frame_.resolution;
  const int max_steps = int(std::floor(params_.pose_spacing() / res));
  for (std::size_t k = 0; k < poses.size(); ++k) {
    if (L.free[dir][k]) {
      out.push_back(poses[k]);
      continue;
    }
    for (int s = 1; s <= max_steps; ++s) {
      const Vec2 p = poses[k].position() + back * (s * res);
      const Pose2 q{p.x, p.y, poses[k].heading};
      if (!checker_.collides(q)) {
        out.push_back(q);
        break;
      }
    }
  }
  return out;
}

LaneSet LaneCache::assemble(const Cell& cell, int entry, Subroutine s, bool flip, bool relaxed) const {
  LaneSet out;
  const int m = lane_count();
  out.lane_count = m;
  out.relaxed = relaxed;
  const auto order = lane_order(m, corner_u_side(entry), s);
  const auto dirs = lane_dirs(m, corner_v_end(entry), s, flip);
  bool feasible = true;
  for (int k = 0; k < m; ++k) {
    const int lane = order[k];
    const int dir = dirs[k] > 0 ? 0 : 1;
    if (k > 0 && dirs[k] != dirs[k - 1]) ++out.turns;
    if (relaxed) {
      for (const Pose2& p : relaxed_poses(lane, dir)) {
        out.poses.push_back(p);
        out.lane_of_pose.push_back(lane);
      }
      continue;
    }
    const auto& poses = lanes_[lane].poses[dir];
    const auto& free = lanes_[lane].free[dir];
    for (std::size_t j = 0; j < poses.size(); ++j) {
      if (!free[j]) feasible = false;
      out.poses.push_back(poses[j]);
      out.lane_of_pose.push_back(lane);
    }
    if (!feasible) break;
    if (k > 0) {
      const Pose2& a = lanes_[order[k - 1]].poses[dirs[k - 1] > 0 ? 0 : 1].back();
      if (checker_.sweep_collides(a.position(), poses.front().position())) {
        feasible = false;
        break;
      }
    }
  }
  if (!feasible) {
    out.cost = grid::kInf;
    return out;
  }
  const int exit = exit_corner(entry, s, flip, m);
  double cost = 0.0;
  if (out.poses.empty()) {
    cost = distance(cell.corners[entry], cell.corners[exit]);
  } else {
    cost = distance(cell.corners[entry], out.poses.front().position());
    for (std::size_t j = 1; j < out.poses.size(); ++j)
      cost += distance(out.poses[j - 1].position(), out.poses[j].position());
    cost += distance(out.poses.back().position(), cell.corners[exit]);
  }
  cost += params_.turn_surcharge * out.turns;
  out.cost = cost;
  return out;
}

LaneSet lanes(const Cell& cell, const RotatedFrame& frame, int entry, Subroutine s, bool flip,
              const PlannerParams& params, const FootprintChecker& checker, bool relaxed) {
  LaneCache cache(cell, frame, params, checker);
  return cache.assemble(cell, entry, s, flip, relaxed);
}

bool in_front_sector(const Pose2& base, Vec2 p, const PlannerParams& params) {
  const Vec2 l = to_local(base, p);
  const double r = l.norm();
  if (r < params.r_in - 1e-9 || r > params.r_out + 1e-9) return false;
  return std::abs(std::atan2(l.y, l.x)) <= 0.5 * params.workspace_angle + 1e-9;
}

std::vector<std::uint8_t> covered_cells(const grid::GridSpec& spec, std::span<const std::uint8_t> dig,
                                        std::span<const Pose2> poses, const PlannerParams& params) {
  std::vector<std::uint8_t> cov(spec.size(), 0);
  for (const Pose2& b : poses) {
    const Vec2 lo = spec.fractional(b.position() - Vec2{params.r_out, params.r_out});
    const Vec2 hi = spec.fractional(b.position() + Vec2{params.r_out, params.r_out});
    const int c0 = std::max(0, int(std::floor(lo.x))), c1 = std::min(spec.cols - 1, int(std::ceil(hi.x)));
    const int r0 = std::max(0, int(std::floor(lo.y))), r1 = std::min(spec.rows - 1, int(std::ceil(hi.y)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const std::size_t i = spec.index(r, c);
        if (!dig[i] || cov[i]) continue;
        if (in_front_sector(b, spec.center(r, c), params)) cov[i] = 1;
      }
  }
  return cov;
}

double coverage_fraction(const grid::GridSpec& spec, std::span<const std::uint8_t> dig,
                         std::span<const Pose2> poses, const PlannerParams& params) {
  const auto cov = covered_cells(spec, dig, poses, params);
  std::size_t n = 0, c = 0;
  for (std::size_t i = 0; i < dig.size(); ++i)
    if (dig[i]) {
      ++n;
      c += cov[i];
    }
  return n ? double(c) / double(n) : 1.0;
}

}  // namespace earthworks::global
