#pragma once

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

#include "wkbtd/errors.hpp"

namespace wkbtd {

using Index = Eigen::Index;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x, double slack = 0.0) const {
    return x >= lo - slack && x <= hi + slack;
  }
};

/// Not-a-knot cubic spline through strictly increasing samples. Outside the
/// sample range the end-interval cubic is continued, so the interpolant is C2
/// on the whole line.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  Interval range() const { return {x_.front(), x_.back()}; }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  Index segment(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

enum class PotentialFamily { Free, Harmonic, Polynomial, Tabulated };

/// A 1-D potential V(x).
///
///  - Free:       V = 0
///  - Harmonic:   V = kappa x^2
///  - Polynomial: V = sum_i c_i x^i (ascending coefficients)
///  - Tabulated:  cubic spline through (x, V) samples; evaluation is
///                restricted to the sample range.
class PotentialSpec {
 public:
  static PotentialSpec free();
  static PotentialSpec harmonic(double kappa = 1.0);
  static PotentialSpec polynomial(std::vector<double> coefficients);
  static PotentialSpec tabulated(std::vector<double> x, std::vector<double> v);

  PotentialFamily family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  const CubicSpline& table() const { return table_; }

  /// Region on which the potential can be evaluated.
  Interval support() const;

 private:
  PotentialFamily family_ = PotentialFamily::Free;
  std::vector<double> params_;
  CubicSpline table_;
};

double eval_potential(const PotentialSpec& spec, double x);
double eval_potential_derivative(const PotentialSpec& spec, double x);

/// Longest subinterval of `search` on which beta - V(x) >= margin. Throws
/// DomainError when there is none.
Interval allowed_window(const PotentialSpec& spec, double beta, double margin,
                        Interval search);

/// Component of {x in search : beta - V(x) >= margin} that contains `x`.
Interval allowed_component(const PotentialSpec& spec, double beta,
                           double margin, Interval search, double x);

/// Uniform space-time grid; t starts at 0.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(double x_lo, double x_hi, Index nx, double t_hi, Index nt);

  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  double t_hi() const { return t_hi_; }
  Index nx() const { return nx_; }
  Index nt() const { return nt_; }
  double hx() const { return (x_hi_ - x_lo_) / static_cast<double>(nx_ - 1); }
  double ht() const { return t_hi_ / static_cast<double>(nt_ - 1); }
  double x(Index i) const {
    return i == nx_ - 1 ? x_hi_ : x_lo_ + static_cast<double>(i) * hx();
  }
  double t(Index n) const {
    return n == nt_ - 1 ? t_hi_ : static_cast<double>(n) * ht();
  }
  Interval x_range() const { return {x_lo_, x_hi_}; }
  Eigen::ArrayXd x_axis() const;
  Eigen::ArrayXd t_axis() const;

  /// Grid with the same spacing and time axis, extended by `left` nodes on
  /// the left and `right` nodes on the right.
  SpaceTimeGrid extended(Index left, Index right) const;

  /// Index of this grid's first x node inside `outer`, or -1 when the grids
  /// do not share spacing, time axis and node positions.
  Index offset_in(const SpaceTimeGrid& outer) const;

  bool operator==(const SpaceTimeGrid&) const = default;

 private:
  double x_lo_;
  double x_hi_;
  Index nx_;
  double t_hi_;
  Index nt_;
};

enum class ProfileFamily { Constant, Gaussian, TabulatedC2 };

/// The free function phi(u) of the characteristic variable.
class InitialProfile {
 public:
  static InitialProfile constant(double value = 1.0);
  static InitialProfile gaussian(double center = 0.0, double width = 1.0);
  static InitialProfile tabulated(std::vector<double> u, std::vector<double> phi);

  ProfileFamily family() const { return family_; }
  double center() const { return center_; }
  double width() const { return width_; }
  double constant_value() const { return value_; }
  const CubicSpline& table() const { return table_; }

  double value(double u) const;
  double d1(double u) const;
  double d2(double u) const;

 private:
  ProfileFamily family_ = ProfileFamily::Constant;
  double value_ = 1.0;
  double center_ = 0.0;
  double width_ = 1.0;
  CubicSpline table_;
};

/// One real coefficient a_k sampled on a space-time grid, x along rows and t
/// along columns.
class AmplitudeField {
 public:
  AmplitudeField(int order, SpaceTimeGrid grid, Eigen::ArrayXXd values);

  int order() const { return order_; }
  const SpaceTimeGrid& grid() const { return grid_; }
  const Eigen::ArrayXXd& values() const { return values_; }
  double operator()(Index i, Index n) const { return values_(i, n); }

  /// Values on an aligned sub-grid.
  AmplitudeField restrict_to(const SpaceTimeGrid& sub) const;

 private:
  int order_;
  SpaceTimeGrid grid_;
  Eigen::ArrayXXd values_;
};

}  // namespace wkbtd
