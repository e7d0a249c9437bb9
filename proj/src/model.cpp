#include "wkbtd/model.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wkbtd {

ConfigError::ConfigError(std::vector<std::string> items)
    : Error([&] {
        std::ostringstream os;
        os << "invalid configuration";
        for (const auto& item : items) os << "\n  " << item;
        return os.str();
      }()),
      items_(std::move(items)) {}

// ---------------------------------------------------------------------------
// CubicSpline

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const auto n = static_cast<Index>(x_.size());
  if (n < 4 || y_.size() != x_.size())
    throw ConfigError({"spline needs at least 4 (x, y) samples of equal length"});
  for (Index i = 0; i + 1 < n; ++i) {
    if (!(x_[i + 1] > x_[i]))
      throw ConfigError({"spline abscissae must be strictly increasing"});
  }
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]))
      throw ConfigError({"spline samples must be finite"});
  }

  auto h = [&](Index i) { return x_[i + 1] - x_[i]; };
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  // not-a-knot: third derivative continuous across x_1 and x_{n-2}
  entries.emplace_back(0, 0, h(1));
  entries.emplace_back(0, 1, -(h(0) + h(1)));
  entries.emplace_back(0, 2, h(0));
  for (Index i = 1; i + 1 < n; ++i) {
    entries.emplace_back(i, i - 1, h(i - 1));
    entries.emplace_back(i, i, 2.0 * (h(i - 1) + h(i)));
    entries.emplace_back(i, i + 1, h(i));
    rhs(i) = 6.0 * ((y_[i + 1] - y_[i]) / h(i) - (y_[i] - y_[i - 1]) / h(i - 1));
  }
  entries.emplace_back(n - 1, n - 3, h(n - 2));
  entries.emplace_back(n - 1, n - 2, -(h(n - 3) + h(n - 2)));
  entries.emplace_back(n - 1, n - 1, h(n - 3));

  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw NumericError("spline system is singular");
  const Eigen::VectorXd m = lu.solve(rhs);
  m_.assign(m.data(), m.data() + n);
}

Index CubicSpline::segment(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto i = static_cast<Index>(it - x_.begin()) - 1;
  return std::clamp<Index>(i, 0, static_cast<Index>(x_.size()) - 2);
}

double CubicSpline::value(double x) const {
  const Index i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double x) const {
  const Index i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i] +
         (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
}

double CubicSpline::second_derivative(double x) const {
  const Index i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec PotentialSpec::free() { return {}; }

PotentialSpec PotentialSpec::harmonic(double kappa) {
  if (!std::isfinite(kappa)) throw ConfigError({"harmonic kappa must be finite"});
  PotentialSpec p;
  p.family_ = PotentialFamily::Harmonic;
  p.params_ = {kappa};
  return p;
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty())
    throw ConfigError({"polynomial coefficient list must be non-empty"});
  for (double c : coefficients) {
    if (!std::isfinite(c))
      throw ConfigError({"polynomial coefficients must be finite"});
  }
  PotentialSpec p;
  p.family_ = PotentialFamily::Polynomial;
  p.params_ = std::move(coefficients);
  return p;
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> x, std::vector<double> v) {
  PotentialSpec p;
  p.family_ = PotentialFamily::Tabulated;
  p.table_ = CubicSpline(std::move(x), std::move(v));
  return p;
}

Interval PotentialSpec::support() const {
  if (family_ == PotentialFamily::Tabulated) return table_.range();
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

namespace {

void require_in_table(const PotentialSpec& spec, double x) {
  const Interval r = spec.table().range();
  const double slack = 1e-12 * (1.0 + std::abs(x));
  if (!r.contains(x, slack)) {
    std::ostringstream os;
    os << "x = " << x << " outside tabulated potential range [" << r.lo << ", "
       << r.hi << "]";
    throw RangeError(os.str());
  }
}

}  // namespace

double eval_potential(const PotentialSpec& spec, double x) {
  switch (spec.family()) {
    case PotentialFamily::Free:
      return 0.0;
    case PotentialFamily::Harmonic:
      return spec.params()[0] * x * x;
    case PotentialFamily::Polynomial: {
      double v = 0.0;
      const auto& c = spec.params();
      for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
      return v;
    }
    case PotentialFamily::Tabulated:
      require_in_table(spec, x);
      return spec.table().value(x);
  }
  return 0.0;
}

double eval_potential_derivative(const PotentialSpec& spec, double x) {
  switch (spec.family()) {
    case PotentialFamily::Free:
      return 0.0;
    case PotentialFamily::Harmonic:
      return 2.0 * spec.params()[0] * x;
    case PotentialFamily::Polynomial: {
      const auto& c = spec.params();
      double d = 0.0;
      for (auto i = static_cast<Index>(c.size()) - 1; i >= 1; --i)
        d = d * x + static_cast<double>(i) * c[i];
      return d;
    }
    case PotentialFamily::Tabulated:
      require_in_table(spec, x);
      return spec.table().derivative(x);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Allowed region

namespace {

std::vector<Interval> allowed_components(const PotentialSpec& spec, double beta,
                                         double margin, Interval search) {
  if (!(margin > 0.0)) throw DomainError("allowed-window margin must be positive");
  if (!std::isfinite(search.lo) || !std::isfinite(search.hi) ||
      !(search.hi > search.lo))
    throw DomainError("allowed-window search interval must be finite and non-empty");
  const Interval sup = spec.support();
  search.lo = std::max(search.lo, sup.lo);
  search.hi = std::min(search.hi, sup.hi);
  if (!(search.hi > search.lo))
    throw DomainError("search interval does not meet the potential's support");

  auto g = [&](double x) { return beta - eval_potential(spec, x) - margin; };
  constexpr Index cells = 4096;
  const double dx = search.width() / static_cast<double>(cells);
  auto node = [&](Index k) {
    return k == cells ? search.hi : search.lo + static_cast<double>(k) * dx;
  };

  auto root = [&](double a, double b) {
    // a, b bracket a sign change of g; return the end on the allowed side
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(g, a, b, tol, iters);
    return g(lo) >= 0.0 ? lo : (g(hi) >= 0.0 ? hi : 0.5 * (lo + hi));
  };

  std::vector<Interval> out;
  bool inside = false;
  double start = 0.0;
  double g_prev = g(node(0));
  if (g_prev >= 0.0) {
    inside = true;
    start = search.lo;
  }
  for (Index k = 1; k <= cells; ++k) {
    const double gk = g(node(k));
    if (!inside && gk >= 0.0) {
      start = g_prev == 0.0 ? node(k - 1) : root(node(k - 1), node(k));
      inside = true;
    } else if (inside && gk < 0.0) {
      const double end = root(node(k - 1), node(k));
      if (end > start) out.push_back({start, end});
      inside = false;
    }
    g_prev = gk;
  }
  if (inside) out.push_back({start, search.hi});
  return out;
}

[[noreturn]] void no_region(double beta, double margin) {
  std::ostringstream os;
  os << "no classically allowed region at this beta/delta (beta = " << beta
     << ", delta = " << margin << ")";
  throw DomainError(os.str());
}

}  // namespace

Interval allowed_window(const PotentialSpec& spec, double beta, double margin,
                        Interval search) {
  const auto parts = allowed_components(spec, beta, margin, search);
  if (parts.empty()) no_region(beta, margin);
  return *std::max_element(parts.begin(), parts.end(),
                           [](const Interval& a, const Interval& b) {
                             return a.width() < b.width();
                           });
}

Interval allowed_component(const PotentialSpec& spec, double beta, double margin,
                           Interval search, double x) {
  const auto parts = allowed_components(spec, beta, margin, search);
  if (parts.empty()) no_region(beta, margin);
  for (const auto& p : parts) {
    if (p.contains(x, 1e-12 * (1.0 + std::abs(x)))) return p;
  }
  std::ostringstream os;
  os << "x = " << x << " is not inside the allowed region (beta = " << beta
     << ", delta = " << margin << ")";
  throw DomainError(os.str());
}

// ---------------------------------------------------------------------------
// SpaceTimeGrid

SpaceTimeGrid::SpaceTimeGrid(double x_lo, double x_hi, Index nx, double t_hi, Index nt)
    : x_lo_(x_lo), x_hi_(x_hi), nx_(nx), t_hi_(t_hi), nt_(nt) {
  std::vector<std::string> problems;
  if (nx < 5) problems.emplace_back("grid.nx must be >= 5");
  if (nt < 5) problems.emplace_back("grid.nt must be >= 5");
  if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && x_hi > x_lo))
    problems.emplace_back("grid.x_hi must exceed grid.x_lo");
  if (!(std::isfinite(t_hi) && t_hi > 0.0)) problems.emplace_back("grid.t_hi must be > 0");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

Eigen::ArrayXd SpaceTimeGrid::x_axis() const {
  Eigen::ArrayXd a(nx_);
  for (Index i = 0; i < nx_; ++i) a(i) = x(i);
  return a;
}

Eigen::ArrayXd SpaceTimeGrid::t_axis() const {
  Eigen::ArrayXd a(nt_);
  for (Index n = 0; n < nt_; ++n) a(n) = t(n);
  return a;
}

SpaceTimeGrid SpaceTimeGrid::extended(Index left, Index right) const {
  const double h = hx();
  return {x_lo_ - static_cast<double>(left) * h, x_hi_ + static_cast<double>(right) * h,
          nx_ + left + right, t_hi_, nt_};
}

Index SpaceTimeGrid::offset_in(const SpaceTimeGrid& outer) const {
  const double h = hx();
  const double scale = 1e-9 * h;
  if (nt_ != outer.nt_ || std::abs(t_hi_ - outer.t_hi_) > 1e-12 * t_hi_) return -1;
  if (std::abs(h - outer.hx()) > 1e-9 * h) return -1;
  const double shift = (x_lo_ - outer.x_lo_) / h;
  const auto off = static_cast<Index>(std::llround(shift));
  if (std::abs(shift - static_cast<double>(off)) * h > scale + 1e-9 * std::abs(shift) * h)
    return -1;
  if (off < 0 || off + nx_ > outer.nx_) return -1;
  return off;
}

// ---------------------------------------------------------------------------
// InitialProfile

InitialProfile InitialProfile::constant(double value) {
  if (!std::isfinite(value)) throw ConfigError({"profile.value must be finite"});
  InitialProfile p;
  p.family_ = ProfileFamily::Constant;
  p.value_ = value;
  return p;
}

InitialProfile InitialProfile::gaussian(double center, double width) {
  if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(center))
    throw ConfigError({"profile.width must be > 0 and center finite"});
  InitialProfile p;
  p.family_ = ProfileFamily::Gaussian;
  p.center_ = center;
  p.width_ = width;
  return p;
}

InitialProfile InitialProfile::tabulated(std::vector<double> u, std::vector<double> phi) {
  InitialProfile p;
  p.family_ = ProfileFamily::TabulatedC2;
  p.table_ = CubicSpline(std::move(u), std::move(phi));
  return p;
}

double InitialProfile::value(double u) const {
  switch (family_) {
    case ProfileFamily::Constant:
      return value_;
    case ProfileFamily::Gaussian: {
      const double z = (u - center_) / width_;
      return std::exp(-0.5 * z * z);
    }
    case ProfileFamily::TabulatedC2:
      return table_.value(u);
  }
  return 0.0;
}

double InitialProfile::d1(double u) const {
  switch (family_) {
    case ProfileFamily::Constant:
      return 0.0;
    case ProfileFamily::Gaussian:
      return -(u - center_) / (width_ * width_) * value(u);
    case ProfileFamily::TabulatedC2:
      return table_.derivative(u);
  }
  return 0.0;
}

double InitialProfile::d2(double u) const {
  switch (family_) {
    case ProfileFamily::Constant:
      return 0.0;
    case ProfileFamily::Gaussian: {
      const double s2 = width_ * width_;
      const double d = u - center_;
      return (d * d / (s2 * s2) - 1.0 / s2) * value(u);
    }
    case ProfileFamily::TabulatedC2:
      return table_.second_derivative(u);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// AmplitudeField

AmplitudeField::AmplitudeField(int order, SpaceTimeGrid grid, Eigen::ArrayXXd values)
    : order_(order), grid_(grid), values_(std::move(values)) {
  if (order_ < 0) throw ShapeError("amplitude order must be >= 0");
  if (values_.rows() != grid_.nx() || values_.cols() != grid_.nt())
    throw ShapeError("amplitude values do not match the grid shape");
  if (!values_.allFinite()) {
    std::ostringstream os;
    os << "amplitude a_" << order_ << " has non-finite entries";
    throw NumericError(os.str());
  }
}

AmplitudeField AmplitudeField::restrict_to(const SpaceTimeGrid& sub) const {
  const Index off = sub.offset_in(grid_);
  if (off < 0) throw ShapeError("sub-grid is not aligned with the field's grid");
  return {order_, sub, values_.middleRows(off, sub.nx())};
}

}  // namespace wkbtd
