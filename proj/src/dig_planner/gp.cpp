#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "earthworks/dig_planner.hpp"

namespace earthworks::dig {

double GaussianProcess::kernel(Vec2 a, Vec2 b) const {
  const double d = std::sqrt(5.0) * distance(a, b) / p_.length_scale;
  return var_ * (1.0 + d + d * d / 3.0) * std::exp(-d);
}

void GaussianProcess::fit(std::span<const Vec2> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw Error(ErrorCode::InvalidArgument, "GP needs matching inputs");
  const std::size_t n = x.size();
  x_.assign(x.begin(), x.end());
  mean_ = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double v = 0.0;
  for (double yi : y) v += (yi - mean_) * (yi - mean_);
  var_ = std::max(v / double(n), 1e-6);

  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(x_[i], x_[j]);
  k.diagonal().array() += p_.noise;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "GP covariance is not positive definite");
  Eigen::VectorXd yc(n);
  for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - mean_;
  const Eigen::VectorXd a = llt.solve(yc);
  alpha_.assign(a.data(), a.data() + n);
  const Eigen::MatrixXd l = llt.matrixL();
  chol_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) chol_[i * n + j] = l(i, j);
}

std::pair<double, double> GaussianProcess::predict(Vec2 x) const {
  const std::size_t n = x_.size();
  std::vector<double> ks(n);
  double mean = mean_;
  for (std::size_t i = 0; i < n; ++i) {
    ks[i] = kernel(x, x_[i]);
    mean += ks[i] * alpha_[i];
  }
  // Forward substitution L v = k*.
  double vv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = ks[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol_[i * n + j] * ks[j];
    ks[i] = s / chol_[i * n + i];
    vv += ks[i] * ks[i];
  }
  return {mean, std::sqrt(std::max(var_ - vv, 0.0))};
}

double expected_improvement(double mean, double sd, double best, double xi) {
  const double gain = mean - best - xi;
  if (sd <= 1e-12) return std::max(gain, 0.0);
  const double z = gain / sd;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
  return gain * cdf + sd * pdf;
}

}  // namespace earthworks::dig
