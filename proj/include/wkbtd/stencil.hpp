#pragma once

#include <Eigen/Core>

#include <array>
#include <cassert>
#include <cmath>
#include <vector>

namespace wkbtd {

/// Finite-difference weights for the derivative of order `deriv` at `z`
/// from samples at `nodes` (Fornberg's recursion).
std::vector<double> fd_weights(double z, const std::vector<double>& nodes, int deriv);

/// Derivative operator on a uniform axis of `n` points with spacing `h`.
///
/// Centered stencils are used wherever they fit; near the ends the stencil
/// is shifted inwards keeping the same formal order. `accuracy` is the
/// formal order in h (even, >= 2). Stencils are applied to differences
/// f_k - f_i, so constant fields differentiate to exactly zero.
class DifferenceOperator {
 public:
  DifferenceOperator(Eigen::Index n, double h, int deriv, int accuracy);

  Eigen::Index size() const { return n_; }
  int width() const { return width_; }
  Eigen::Index start(Eigen::Index i) const { return start_[i]; }
  int width(Eigen::Index i) const { return row_width_[i]; }
  const double* weights(Eigen::Index i) const { return &weights_[i * width_]; }

  /// Derivative along the rows (first index) of a 2-D array.
  template <typename Derived>
  Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> along_rows(
      const Eigen::ArrayBase<Derived>& f) const {
    using Scalar = typename Derived::Scalar;
    assert(f.rows() == n_);
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(f.rows(), f.cols());
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      for (Eigen::Index i = 0; i < n_; ++i) {
        const double* w = weights(i);
        const Eigen::Index s = start_[i];
        const Scalar fi = f(i, c);
        Scalar acc(0);
        for (int k = 0; k < row_width_[i]; ++k) acc += w[k] * (f(s + k, c) - fi);
        out(i, c) = acc;
      }
    }
    return out;
  }

  /// Derivative along the columns (second index) of a 2-D array.
  template <typename Derived>
  Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> along_cols(
      const Eigen::ArrayBase<Derived>& f) const {
    using Scalar = typename Derived::Scalar;
    assert(f.cols() == n_);
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(f.rows(), f.cols());
    out.setZero();
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double* w = weights(j);
      const Eigen::Index s = start_[j];
      for (int k = 0; k < row_width_[j]; ++k) out.col(j) += w[k] * (f.col(s + k) - f.col(j));
    }
    return out;
  }

  /// Derivative along one axis of a flat tensor-product array whose
  /// dimension of interest has the given stride.
  template <typename Scalar>
  void along_stride(const Scalar* in, Scalar* out, Eigen::Index stride,
                    Eigen::Index outer_count, Eigen::Index outer_stride,
                    Eigen::Index inner_count) const {
    for (Eigen::Index o = 0; o < outer_count; ++o) {
      for (Eigen::Index q = 0; q < inner_count; ++q) {
        const Scalar* base = in + o * outer_stride + q;
        Scalar* dst = out + o * outer_stride + q;
        for (Eigen::Index i = 0; i < n_; ++i) {
          const double* w = weights(i);
          const Eigen::Index s = start_[i];
          const Scalar fi = base[i * stride];
          Scalar acc(0);
          for (int k = 0; k < row_width_[i]; ++k) acc += w[k] * (base[(s + k) * stride] - fi);
          dst[i * stride] = acc;
        }
      }
    }
  }

 private:
  Eigen::Index n_;
  int width_;
  std::vector<Eigen::Index> start_;
  std::vector<int> row_width_;
  std::vector<double> weights_;
};

/// Lagrange interpolation stencil on a uniform axis: `points` consecutive
/// nodes around the evaluation point, clamped to the axis.
struct LagrangeStencil {
  static constexpr int kMaxPoints = 10;
  Eigen::Index start = 0;
  int points = 0;
  std::array<double, kMaxPoints> w{};

  static LagrangeStencil make(double x, double x0, double h, Eigen::Index n, int points);
};

/// Second-order centered first derivative on interior points; the two end
/// rows are left at zero.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> central_d1_rows(
    const Eigen::ArrayBase<Derived>& f, double h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = f.rows();
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, f.cols());
  out.middleRows(1, n - 2) = (f.bottomRows(n - 2) - f.topRows(n - 2)) / (2.0 * h);
  return out;
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> central_d1_cols(
    const Eigen::ArrayBase<Derived>& f, double h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = f.cols();
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(f.rows(), n);
  out.middleCols(1, n - 2) = (f.rightCols(n - 2) - f.leftCols(n - 2)) / (2.0 * h);
  return out;
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> central_d2_rows(
    const Eigen::ArrayBase<Derived>& f, double h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = f.rows();
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, f.cols());
  out.middleRows(1, n - 2) =
      (f.bottomRows(n - 2) - 2.0 * f.middleRows(1, n - 2) + f.topRows(n - 2)) / (h * h);
  return out;
}

}  // namespace wkbtd
