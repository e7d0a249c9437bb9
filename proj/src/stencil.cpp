#include "wkbtd/stencil.hpp"

#include <algorithm>
#include <stdexcept>

namespace wkbtd {

std::vector<double> fd_weights(double z, const std::vector<double>& nodes, int deriv) {
  const auto n = static_cast<int>(nodes.size());
  const int m = deriv;
  // c(j, k): weight of node j for derivative k
  std::vector<double> c(static_cast<std::size_t>(n * (m + 1)), 0.0);
  auto at = [&](int j, int k) -> double& { return c[j * (m + 1) + k]; };
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  at(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
        at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
      at(j, 0) = c4 * at(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) w[j] = at(j, m);
  return w;
}

DifferenceOperator::DifferenceOperator(Eigen::Index n, double h, int deriv, int accuracy)
    : n_(n), width_(accuracy + deriv) {
  if (deriv < 1 || deriv > 2 || accuracy < 2 || accuracy % 2 != 0)
    throw std::invalid_argument("unsupported difference operator");
  if (n < width_) throw std::invalid_argument("axis too short for difference stencil");
  const int half = accuracy / 2;
  const double scale = 1.0 / std::pow(h, deriv);
  start_.resize(static_cast<std::size_t>(n));
  row_width_.resize(static_cast<std::size_t>(n));
  weights_.assign(static_cast<std::size_t>(n * width_), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> nodes;
    Eigen::Index s = 0;
    if (i - half >= 0 && i + half <= n - 1) {
      s = i - half;
      for (int k = 0; k <= 2 * half; ++k) nodes.push_back(static_cast<double>(k));
    } else {
      s = std::clamp<Eigen::Index>(i - width_ / 2, 0, n - width_);
      for (int k = 0; k < width_; ++k) nodes.push_back(static_cast<double>(k));
    }
    const auto w = fd_weights(static_cast<double>(i - s), nodes, deriv);
    start_[i] = s;
    row_width_[i] = static_cast<int>(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) weights_[i * width_ + k] = w[k] * scale;
  }
}

LagrangeStencil LagrangeStencil::make(double x, double x0, double h, Eigen::Index n,
                                      int points) {
  LagrangeStencil st;
  st.points = points;
  const double s = (x - x0) / h;
  auto first = static_cast<Eigen::Index>(std::floor(s)) - (points / 2 - 1);
  st.start = std::clamp<Eigen::Index>(first, 0, n - points);
  const double r = s - static_cast<double>(st.start);
  for (int k = 0; k < points; ++k) {
    double w = 1.0;
    for (int j = 0; j < points; ++j) {
      if (j != k) w *= (r - j) / static_cast<double>(k - j);
    }
    st.w[k] = w;
  }
  return st;
}

}  // namespace wkbtd
