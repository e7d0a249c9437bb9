#include "wkbtd/hj.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

namespace wkbtd {

namespace {

template <typename F>
double integrate(F f, double a, double b) {
  if (a == b) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
}

}  // namespace

double PhaseField::sx(double x) const {
  const double kinetic = 2.0 * mass_ * (beta_w_ - eval_potential(potential_, x));
  if (!(kinetic > 0.0)) {
    std::ostringstream os;
    os << "turning point or forbidden region at x = " << x
       << " (beta - V = " << kinetic / (2.0 * mass_) << ")";
    throw DomainError(os.str());
  }
  return std::sqrt(kinetic);
}

double PhaseField::sxx(double x) const {
  return -mass_ * eval_potential_derivative(potential_, x) / sx(x);
}

double PhaseField::w(double x) const {
  return integrate([this](double y) { return sx(y); }, anchor_, x);
}

double PhaseField::travel_time(double x) const {
  return integrate([this](double y) { return mass_ / sx(y); }, anchor_, x);
}

Eigen::ArrayXd PhaseField::sx_on(const Eigen::ArrayXd& x) const {
  return x.unaryExpr([this](double y) { return sx(y); });
}

Eigen::ArrayXd PhaseField::sxx_on(const Eigen::ArrayXd& x) const {
  return x.unaryExpr([this](double y) { return sxx(y); });
}

PhaseField PhaseField::with_beta(double beta) const {
  PhaseField p = *this;
  p.beta_ = beta;
  return p;
}

PhaseField build_phase(const PotentialSpec& spec, double mass, double beta,
                       const SpaceTimeGrid& grid, std::optional<double> anchor,
                       double margin) {
  if (!(mass > 0.0)) throw ConfigError({"mass must be > 0"});
  const double x0 = anchor.value_or(grid.x_range().center());
  if (!grid.x_range().contains(x0)) throw ConfigError({"anchor must lie inside the grid"});

  const double span = grid.x_range().width();
  const Interval search{grid.x_lo() - 16.0 * span, grid.x_hi() + 16.0 * span};
  const Interval domain = allowed_component(spec, beta, margin, search, x0);
  const double slack = 1e-9 * (1.0 + std::abs(grid.x_lo()) + std::abs(grid.x_hi()));
  if (!domain.contains(grid.x_lo(), slack) || !domain.contains(grid.x_hi(), slack)) {
    std::ostringstream os;
    os << "grid [" << grid.x_lo() << ", " << grid.x_hi()
       << "] touches a turning point; allowed window at delta = " << margin << " is ["
       << domain.lo << ", " << domain.hi << "]";
    throw DomainError(os.str());
  }

  PhaseField p(spec, grid);
  p.mass_ = mass;
  p.beta_ = beta;
  p.beta_w_ = beta;
  p.anchor_ = x0;
  p.margin_ = margin;
  p.domain_ = {std::min(domain.lo, grid.x_lo()), std::max(domain.hi, grid.x_hi())};
  p.w_grid_.resize(grid.nx());
  for (Index i = 0; i < grid.nx(); ++i) p.w_grid_(i) = p.w(grid.x(i));
  return p;
}

double hj_residual(const PhaseField& phase, const PotentialSpec& spec) {
  const auto& g = phase.grid();
  double worst = 0.0;
  for (Index i = 0; i < g.nx(); ++i) {
    const double x = g.x(i);
    const double sx = phase.sx(x);
    const double r = phase.st() + sx * sx / (2.0 * phase.mass()) + eval_potential(spec, x);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace wkbtd
