#pragma once

#include <optional>

#include "wkbtd/model.hpp"

namespace wkbtd {

/// Margin beta - V >= delta used when none is given.
inline constexpr double kDefaultMargin = 0.05;

/// Separable Hamilton-Jacobi solution S(x, t) = W(x) - beta t on the
/// positive branch S_x = +sqrt(2m(beta - V)).
///
/// W is tabulated on the grid's x-axis by adaptive quadrature and is also
/// available at arbitrary points. S_x and S_xx are closed-form in V and V'.
class PhaseField {
 public:
  double mass() const { return mass_; }
  /// Separation constant entering S_t.
  double beta() const { return beta_; }
  double anchor() const { return anchor_; }
  double margin() const { return margin_; }
  /// Component of the allowed region {beta - V >= delta} containing the grid.
  const Interval& domain() const { return domain_; }
  const SpaceTimeGrid& grid() const { return grid_; }
  const PotentialSpec& potential() const { return potential_; }

  /// W at the grid's x nodes.
  const Eigen::ArrayXd& w_grid() const { return w_grid_; }
  double w(double x) const;
  double s(double x, double t) const { return w(x) - beta_ * t; }
  double st() const { return -beta_; }
  double sx(double x) const;
  double sxx(double x) const;

  /// Characteristic travel time sigma(x) = int_{x0}^{x} m / S_x; the
  /// characteristic variable is u = t - sigma(x).
  double travel_time(double x) const;

  Eigen::ArrayXd sx_on(const Eigen::ArrayXd& x) const;
  Eigen::ArrayXd sxx_on(const Eigen::ArrayXd& x) const;

  /// Same W and S_x, different S_t. Used to probe the HJ residual.
  PhaseField with_beta(double beta) const;

  friend PhaseField build_phase(const PotentialSpec&, double, double,
                                const SpaceTimeGrid&, std::optional<double>, double);

 private:
  PhaseField(PotentialSpec potential, SpaceTimeGrid grid)
      : potential_(std::move(potential)), grid_(grid) {}

  PotentialSpec potential_;
  SpaceTimeGrid grid_;
  double mass_ = 1.0;
  double beta_ = 0.0;
  double beta_w_ = 0.0;  // separation constant used for W and S_x
  double anchor_ = 0.0;
  double margin_ = kDefaultMargin;
  Interval domain_;
  Eigen::ArrayXd w_grid_;
};

/// Builds the phase over `grid`. The anchor x0 (W(x0) = 0) defaults to the
/// center of the grid's x-range. Throws DomainError if the grid is not inside
/// the allowed region with margin `margin`.
PhaseField build_phase(const PotentialSpec& spec, double mass, double beta,
                       const SpaceTimeGrid& grid, std::optional<double> anchor = {},
                       double margin = kDefaultMargin);

/// max over grid nodes of |S_t + S_x^2 / 2m + V|.
double hj_residual(const PhaseField& phase, const PotentialSpec& spec);

}  // namespace wkbtd
