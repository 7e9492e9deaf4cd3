#include "membrane/spline.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <utility>

#include "membrane/errors.hpp"

namespace membrane {

CubicSpline::CubicSpline(std::vector<double> t, std::vector<double> v)
    : t_(std::move(t)), v_(std::move(v)) {
  const std::size_t n = t_.size();
  if (n < 2 || v_.size() != n) fail(ErrorCode::InvalidArgument, "spline needs matching knots and values");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t_[i] > t_[i - 1])) fail(ErrorCode::InvalidArgument, "spline knots must increase");
  m_.assign(n, 0.0);
  if (n == 2) return;

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = t_[i + 1] - t_[i];

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const auto idx = [](std::size_t i) { return static_cast<int>(i); };

  if (n == 3) {
    entries.emplace_back(0, 0, 1.0);
    entries.emplace_back(2, 2, 1.0);
  } else {
    entries.emplace_back(0, 0, h[1]);
    entries.emplace_back(0, 1, -(h[0] + h[1]));
    entries.emplace_back(0, 2, h[0]);
    const std::size_t a = n - 3, b = n - 2;
    entries.emplace_back(idx(n - 1), idx(n - 3), h[b]);
    entries.emplace_back(idx(n - 1), idx(n - 2), -(h[a] + h[b]));
    entries.emplace_back(idx(n - 1), idx(n - 1), h[a]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    entries.emplace_back(idx(i), idx(i - 1), h[i - 1]);
    entries.emplace_back(idx(i), idx(i), 2.0 * (h[i - 1] + h[i]));
    entries.emplace_back(idx(i), idx(i + 1), h[i]);
    rhs[idx(i)] = 6.0 * ((v_[i + 1] - v_[i]) / h[i] - (v_[i] - v_[i - 1]) / h[i - 1]);
  }
  Eigen::SparseMatrix<double> a(idx(n), idx(n));
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "spline system is singular");
  const Eigen::VectorXd m = lu.solve(rhs);
  for (std::size_t i = 0; i < n; ++i) m_[i] = m[idx(i)];
}

std::size_t CubicSpline::interval(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return std::min(i, t_.size() - 2);
}

double CubicSpline::operator()(double t) const {
  const std::size_t i = interval(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h, b = (t - t_[i]) / h;
  return a * v_[i] + b * v_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
  const std::size_t i = interval(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h, b = (t - t_[i]) / h;
  return (v_[i + 1] - v_[i]) / h +
         (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

double CubicSpline::second_derivative(double t) const {
  const std::size_t i = interval(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h, b = (t - t_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

HermiteSpline::HermiteSpline(std::vector<double> t, std::vector<double> v, std::vector<double> dv)
    : t_(std::move(t)), v_(std::move(v)), dv_(std::move(dv)) {
  if (t_.size() < 2 || v_.size() != t_.size() || dv_.size() != t_.size())
    fail(ErrorCode::InvalidArgument, "hermite spline needs matching samples");
}

double HermiteSpline::operator()(double t) const {
  if (t <= t_.front()) return v_.front() + dv_.front() * (t - t_.front());
  if (t >= t_.back()) return v_.back() + dv_.back() * (t - t_.back());
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * v_[i] + (s3 - 2 * s2 + s) * h * dv_[i] +
         (-2 * s3 + 3 * s2) * v_[i + 1] + (s3 - s2) * h * dv_[i + 1];
}

double HermiteSpline::derivative(double t) const {
  if (t <= t_.front()) return dv_.front();
  if (t >= t_.back()) return dv_.back();
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * v_[i] + (-6 * s2 + 6 * s) * v_[i + 1]) / h +
         (3 * s2 - 4 * s + 1) * dv_[i] + (3 * s2 - 2 * s) * dv_[i + 1];
}

}  // namespace membrane
