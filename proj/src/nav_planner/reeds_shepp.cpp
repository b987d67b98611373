// Reeds-Shepp shortest paths for a unit turning radius, following the
// formula families of Reeds and Shepp (1990) with the time-flip and
// reflection symmetries.
#include <cmath>

#include "earthworks/nav_planner.hpp"

namespace earthworks::nav {

namespace {

constexpr double kZero = 1e-9;
constexpr Steer L = Steer::Left, R = Steer::Right, S = Steer::Straight, N = Steer::None;

constexpr std::array<std::array<Steer, 5>, 18> kTypes{{
    {L, R, L, N, N}, {R, L, R, N, N}, {L, R, L, R, N}, {R, L, R, L, N}, {L, R, S, L, N}, {R, L, S, R, N},
    {L, S, R, L, N}, {R, S, L, R, N}, {L, R, S, R, N}, {R, L, S, L, N}, {R, S, R, L, N}, {L, S, L, R, N},
    {L, S, R, N, N}, {R, S, L, N, N}, {L, S, L, N, N}, {R, S, R, N, N}, {L, R, S, L, R}, {R, L, S, R, L},
}};

double mod2pi(double x) {
  double v = std::fmod(x, 2 * kPi);
  if (v < -kPi)
    v += 2 * kPi;
  else if (v > kPi)
    v -= 2 * kPi;
  return v;
}

void polar(double x, double y, double& r, double& theta) {
  r = std::sqrt(x * x + y * y);
  theta = std::atan2(y, x);
}

void tau_omega(double u, double v, double xi, double eta, double phi, double& tau, double& omega) {
  const double delta = mod2pi(u - v);
  const double a = std::sin(u) - std::sin(delta), b = std::cos(u) - std::cos(delta) - 1.0;
  const double t1 = std::atan2(eta * a - xi * b, xi * a + eta * b);
  const double t2 = 2.0 * (std::cos(delta) - std::cos(v) - std::cos(u)) + 3.0;
  tau = t2 < 0 ? mod2pi(t1 + kPi) : mod2pi(t1);
  omega = mod2pi(tau - u + v - phi);
}

struct Best {
  RsPath path;
  double length = grid::kInf;
  void offer(int type, std::array<double, 5> l) {
    double total = 0.0;
    for (double v : l) total += std::abs(v);
    if (total < length) {
      length = total;
      path.types = kTypes[std::size_t(type)];
      path.lengths = l;
    }
  }
};

bool lp_sp_lp(double x, double y, double phi, double& t, double& u, double& v) {
  polar(x - std::sin(phi), y - 1.0 + std::cos(phi), u, t);
  if (t >= -kZero) {
    v = mod2pi(phi - t);
    if (v >= -kZero) return true;
  }
  return false;
}

bool lp_sp_rp(double x, double y, double phi, double& t, double& u, double& v) {
  double t1, u1;
  polar(x + std::sin(phi), y - 1.0 - std::cos(phi), u1, t1);
  u1 = u1 * u1;
  if (u1 >= 4.0) {
    u = std::sqrt(u1 - 4.0);
    const double theta = std::atan2(2.0, u);
    t = mod2pi(t1 + theta);
    v = mod2pi(t - phi);
    return t >= -kZero && v >= -kZero;
  }
  return false;
}

void csc(double x, double y, double phi, Best& b) {
  double t, u, v;
  if (lp_sp_lp(x, y, phi, t, u, v)) b.offer(14, {t, u, v, 0, 0});
  if (lp_sp_lp(-x, y, -phi, t, u, v)) b.offer(14, {-t, -u, -v, 0, 0});
  if (lp_sp_lp(x, -y, -phi, t, u, v)) b.offer(15, {t, u, v, 0, 0});
  if (lp_sp_lp(-x, -y, phi, t, u, v)) b.offer(15, {-t, -u, -v, 0, 0});
  if (lp_sp_rp(x, y, phi, t, u, v)) b.offer(12, {t, u, v, 0, 0});
  if (lp_sp_rp(-x, y, -phi, t, u, v)) b.offer(12, {-t, -u, -v, 0, 0});
  if (lp_sp_rp(x, -y, -phi, t, u, v)) b.offer(13, {t, u, v, 0, 0});
  if (lp_sp_rp(-x, -y, phi, t, u, v)) b.offer(13, {-t, -u, -v, 0, 0});
}

bool lp_rm_l(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi), eta = y - 1.0 + std::cos(phi);
  double u1, theta;
  polar(xi, eta, u1, theta);
  if (u1 <= 4.0) {
    u = -2.0 * std::asin(0.25 * u1);
    t = mod2pi(theta + 0.5 * u + kPi);
    v = mod2pi(phi - t + u);
    return t >= -kZero && u <= kZero;
  }
  return false;
}

void ccc(double x, double y, double phi, Best& b) {
  double t, u, v;
  if (lp_rm_l(x, y, phi, t, u, v)) b.offer(0, {t, u, v, 0, 0});
  if (lp_rm_l(-x, y, -phi, t, u, v)) b.offer(0, {-t, -u, -v, 0, 0});
  if (lp_rm_l(x, -y, -phi, t, u, v)) b.offer(1, {t, u, v, 0, 0});
  if (lp_rm_l(-x, -y, phi, t, u, v)) b.offer(1, {-t, -u, -v, 0, 0});
  // Backwards.
  const double xb = x * std::cos(phi) + y * std::sin(phi), yb = x * std::sin(phi) - y * std::cos(phi);
  if (lp_rm_l(xb, yb, phi, t, u, v)) b.offer(0, {v, u, t, 0, 0});
  if (lp_rm_l(-xb, yb, -phi, t, u, v)) b.offer(0, {-v, -u, -t, 0, 0});
  if (lp_rm_l(xb, -yb, -phi, t, u, v)) b.offer(1, {v, u, t, 0, 0});
  if (lp_rm_l(-xb, -yb, phi, t, u, v)) b.offer(1, {-v, -u, -t, 0, 0});
}

bool lp_rup_lum_rm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  const double rho = 0.25 * (2.0 + std::sqrt(xi * xi + eta * eta));
  if (rho <= 1.0) {
    u = std::acos(rho);
    tau_omega(u, -u, xi, eta, phi, t, v);
    return t >= -kZero && v <= kZero;
  }
  return false;
}

bool lp_rum_lum_rp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  const double rho = (20.0 - xi * xi - eta * eta) / 16.0;
  if (rho >= 0 && rho <= 1) {
    u = -std::acos(rho);
    if (u >= -0.5 * kPi) {
      tau_omega(u, u, xi, eta, phi, t, v);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

void cccc(double x, double y, double phi, Best& b) {
  double t, u, v;
  if (lp_rup_lum_rm(x, y, phi, t, u, v)) b.offer(2, {t, u, -u, v, 0});
  if (lp_rup_lum_rm(-x, y, -phi, t, u, v)) b.offer(2, {-t, -u, u, -v, 0});
  if (lp_rup_lum_rm(x, -y, -phi, t, u, v)) b.offer(3, {t, u, -u, v, 0});
  if (lp_rup_lum_rm(-x, -y, phi, t, u, v)) b.offer(3, {-t, -u, u, -v, 0});
  if (lp_rum_lum_rp(x, y, phi, t, u, v)) b.offer(2, {t, u, u, v, 0});
  if (lp_rum_lum_rp(-x, y, -phi, t, u, v)) b.offer(2, {-t, -u, -u, -v, 0});
  if (lp_rum_lum_rp(x, -y, -phi, t, u, v)) b.offer(3, {t, u, u, v, 0});
  if (lp_rum_lum_rp(-x, -y, phi, t, u, v)) b.offer(3, {-t, -u, -u, -v, 0});
}

bool lp_rm_sm_lm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi), eta = y - 1.0 + std::cos(phi);
  double rho, theta;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    const double r = std::sqrt(rho * rho - 4.0);
    u = 2.0 - r;
    t = mod2pi(theta + std::atan2(r, -2.0));
    v = mod2pi(phi - 0.5 * kPi - t);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

bool lp_rm_sm_rm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  double rho, theta;
  polar(-eta, xi, rho, theta);
  if (rho >= 2.0) {
    t = theta;
    u = 2.0 - rho;
    v = mod2pi(t + 0.5 * kPi - phi);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

void ccsc(double x, double y, double phi, Best& b) {
  const double h = 0.5 * kPi;
  double t, u, v;
  if (lp_rm_sm_lm(x, y, phi, t, u, v)) b.offer(4, {t, -h, u, v, 0});
  if (lp_rm_sm_lm(-x, y, -phi, t, u, v)) b.offer(4, {-t, h, -u, -v, 0});
  if (lp_rm_sm_lm(x, -y, -phi, t, u, v)) b.offer(5, {t, -h, u, v, 0});
  if (lp_rm_sm_lm(-x, -y, phi, t, u, v)) b.offer(5, {-t, h, -u, -v, 0});
  if (lp_rm_sm_rm(x, y, phi, t, u, v)) b.offer(8, {t, -h, u, v, 0});
  if (lp_rm_sm_rm(-x, y, -phi, t, u, v)) b.offer(8, {-t, h, -u, -v, 0});
  if (lp_rm_sm_rm(x, -y, -phi, t, u, v)) b.offer(9, {t, -h, u, v, 0});
  if (lp_rm_sm_rm(-x, -y, phi, t, u, v)) b.offer(9, {-t, h, -u, -v, 0});
  // Backwards.
  const double xb = x * std::cos(phi) + y * std::sin(phi), yb = x * std::sin(phi) - y * std::cos(phi);
  if (lp_rm_sm_lm(xb, yb, phi, t, u, v)) b.offer(6, {v, u, -h, t, 0});
  if (lp_rm_sm_lm(-xb, yb, -phi, t, u, v)) b.offer(6, {-v, -u, h, -t, 0});
  if (lp_rm_sm_lm(xb, -yb, -phi, t, u, v)) b.offer(7, {v, u, -h, t, 0});
  if (lp_rm_sm_lm(-xb, -yb, phi, t, u, v)) b.offer(7, {-v, -u, h, -t, 0});
  if (lp_rm_sm_rm(xb, yb, phi, t, u, v)) b.offer(10, {v, u, -h, t, 0});
  if (lp_rm_sm_rm(-xb, yb, -phi, t, u, v)) b.offer(10, {-v, -u, h, -t, 0});
  if (lp_rm_sm_rm(xb, -yb, -phi, t, u, v)) b.offer(11, {v, u, -h, t, 0});
  if (lp_rm_sm_rm(-xb, -yb, phi, t, u, v)) b.offer(11, {-v, -u, h, -t, 0});
}

bool lp_rm_slm_rp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  double rho, theta;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    u = 4.0 - std::sqrt(rho * rho - 4.0);
    if (u <= kZero) {
      t = mod2pi(std::atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta));
      v = mod2pi(t - phi);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

void ccscc(double x, double y, double phi, Best& b) {
  const double h = 0.5 * kPi;
  double t, u, v;
  if (lp_rm_slm_rp(x, y, phi, t, u, v)) b.offer(16, {t, -h, u, -h, v});
  if (lp_rm_slm_rp(-x, y, -phi, t, u, v)) b.offer(16, {-t, h, -u, h, -v});
  if (lp_rm_slm_rp(x, -y, -phi, t, u, v)) b.offer(17, {t, -h, u, -h, v});
  if (lp_rm_slm_rp(-x, -y, phi, t, u, v)) b.offer(17, {-t, h, -u, h, -v});
}

}  // namespace

double RsPath::length() const {
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    if (types[i] != Steer::None) s += std::abs(lengths[i]);
  return s * radius;
}

RsPath reeds_shepp(const Pose2& from, const Pose2& to, double radius) {
  if (!(radius > 0)) throw Error(ErrorCode::InvalidArgument, "turning radius must be positive");
  const double dx = to.x - from.x, dy = to.y - from.y;
  const double c = std::cos(from.heading), s = std::sin(from.heading);
  const double x = (c * dx + s * dy) / radius, y = (-s * dx + c * dy) / radius;
  const double phi = to.heading - from.heading;
  Best b;
  b.path.radius = radius;
  if (x == 0 && y == 0 && mod2pi(phi) == 0) {
    b.path.types = {Steer::Straight, N, N, N, N};
    b.path.lengths = {0, 0, 0, 0, 0};
    return b.path;
  }
  csc(x, y, phi, b);
  ccc(x, y, phi, b);
  cccc(x, y, phi, b);
  ccsc(x, y, phi, b);
  ccscc(x, y, phi, b);
  if (!std::isfinite(b.length)) {
    b.path.types = {S, N, N, N, N};
    b.path.lengths = {grid::kInf, 0, 0, 0, 0};
  }
  return b.path;
}

Pose2 rs_interpolate(const Pose2& from, const RsPath& path, double s) {
  if (s <= 0.0) return from;
  double rem = std::max(s, 0.0) / path.radius;
  double x = 0.0, y = 0.0, phi = from.heading;
  for (std::size_t i = 0; i < 5 && rem > 0.0; ++i) {
    const Steer t = path.types[i];
    if (t == Steer::None) break;
    double v = path.lengths[i];
    if (std::abs(v) > rem) v = v < 0 ? -rem : rem;
    rem -= std::abs(v);
    switch (t) {
      case Steer::Left:
        x += std::sin(phi + v) - std::sin(phi);
        y += -std::cos(phi + v) + std::cos(phi);
        phi += v;
        break;
      case Steer::Right:
        x += -std::sin(phi - v) + std::sin(phi);
        y += std::cos(phi - v) - std::cos(phi);
        phi -= v;
        break;
      case Steer::Straight:
        x += v * std::cos(phi);
        y += v * std::sin(phi);
        break;
      case Steer::None:
        break;
    }
  }
  return {from.x + x * path.radius, from.y + y * path.radius, wrap_angle(phi)};
}

std::vector<PathSample> rs_sample(const Pose2& from, const RsPath& path, double step) {
  std::vector<PathSample> out;
  const double len = path.length();
  if (!std::isfinite(len)) return out;
  // Segment boundaries, so direction flags follow the segment driven.
  std::vector<std::pair<double, bool>> segs;
  for (std::size_t i = 0; i < 5; ++i)
    if (path.types[i] != Steer::None && path.lengths[i] != 0.0)
      segs.push_back({std::abs(path.lengths[i]) * path.radius, path.lengths[i] > 0});
  auto forward_at = [&](double s) {
    double acc = 0.0;
    for (const auto& [l, f] : segs) {
      acc += l;
      if (s < acc) return f;
    }
    return segs.empty() ? true : segs.back().second;
  };
  const int n = std::max(1, int(std::ceil(len / step - 1e-9)));
  for (int k = 0; k <= n; ++k) {
    const double s = std::min(len, k * step);
    out.push_back({rs_interpolate(from, path, s), forward_at(s)});
  }
  return out;
}

}  // namespace earthworks::nav
