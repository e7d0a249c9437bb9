#include "wkbtd/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkbtd/stencil.hpp"

namespace wkbtd {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

cd ipow(double hbar, int k) { return std::pow(kI * hbar, k); }

}  // namespace

SeriesWavefunction::SeriesWavefunction(PhaseField phase, std::vector<AmplitudeField> amps,
                                       double hbar)
    : phase_(std::move(phase)), amps_(std::move(amps)), hbar_(hbar) {
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) throw ConfigError({"hbar must be > 0"});
  if (amps_.empty()) throw ShapeError("series needs at least a_0");
  const SpaceTimeGrid& g = amps_.front().grid();
  for (std::size_t k = 0; k < amps_.size(); ++k) {
    if (!(amps_[k].grid() == g)) throw ShapeError("amplitude fields live on different grids");
    if (amps_[k].order() != static_cast<int>(k))
      throw ShapeError("amplitude fields must be ordered a_0 ... a_N");
  }
  if (g == phase_.grid()) {
    w_ = phase_.w_grid();
  } else {
    w_.resize(g.nx());
    for (Index i = 0; i < g.nx(); ++i) w_(i) = phase_.w(g.x(i));
  }
}

ComplexField SeriesWavefunction::carrier() const {
  const SpaceTimeGrid& g = grid();
  ComplexField c(g.nx(), g.nt());
  for (Index n = 0; n < g.nt(); ++n) {
    const double t = g.t(n);
    for (Index i = 0; i < g.nx(); ++i)
      c(i, n) = std::exp(kI * ((w_(i) - phase_.beta() * t) / hbar_));
  }
  return c;
}

ComplexField SeriesWavefunction::envelope() const {
  ComplexField e = amps_[0].values().cast<cd>();
  for (std::size_t k = 1; k < amps_.size(); ++k)
    e += ipow(hbar_, static_cast<int>(k)) * amps_[k].values().cast<cd>();
  return e;
}

ComplexField SeriesWavefunction::values() const { return envelope() * carrier(); }

std::complex<double> SeriesWavefunction::operator()(Index i, Index n) const {
  cd sum = 0.0;
  for (std::size_t k = 0; k < amps_.size(); ++k)
    sum += ipow(hbar_, static_cast<int>(k)) * amps_[k](i, n);
  const double s = w_(i) - phase_.beta() * grid().t(n);
  return sum * std::exp(kI * (s / hbar_));
}

SeriesWavefunction SeriesWavefunction::scaled(double c) const {
  std::vector<AmplitudeField> amps;
  for (const auto& a : amps_) amps.emplace_back(a.order(), a.grid(), c * a.values());
  return {phase_, std::move(amps), hbar_};
}

SeriesWavefunction assemble_psi(const PhaseField& phase, std::vector<AmplitudeField> amps,
                                double hbar) {
  return {phase, std::move(amps), hbar};
}

ComplexField apply_L_algebraic(const SeriesWavefunction& psi, const PotentialSpec& spec,
                               int accuracy) {
  const double hj = hj_residual(psi.phase(), spec);
  if (hj > 1e-10) {
    std::ostringstream os;
    os << "phase does not satisfy the Hamilton-Jacobi equation (residual " << hj
       << " > 1e-10); the algebraic expansion does not apply";
    throw ConsistencyError(os.str());
  }
  const auto& amps = psi.amplitudes();
  const auto transport = transport_residual_fields(psi.phase(), amps, accuracy);
  const double hbar = psi.hbar();
  const double inv_2m = 1.0 / (2.0 * psi.phase().mass());
  const int order = psi.order();

  ComplexField bracket = (kI * hbar * inv_2m) * transport[0].cast<cd>();
  for (int k = 1; k <= order; ++k)
    bracket += (ipow(hbar, k + 1) * inv_2m) * transport[k].cast<cd>();
  const FieldDerivatives last = differentiate(amps.back(), accuracy);
  bracket -= (ipow(hbar, order + 2) * inv_2m) * last.dxx.cast<cd>();
  return bracket * psi.carrier();
}

ComplexField apply_L_direct(const SeriesWavefunction& psi, const PotentialSpec& spec) {
  const SpaceTimeGrid& g = psi.grid();
  const Eigen::ArrayXd x = g.x_axis();
  const double max_sx = psi.phase().sx_on(x).maxCoeff();
  const double hbar = psi.hbar();
  if (g.hx() > hbar / (10.0 * max_sx)) {
    const auto nx = static_cast<long>(std::ceil(g.x_range().width() * 10.0 * max_sx / hbar)) + 1;
    std::ostringstream os;
    os << "grid does not resolve exp(iS/hbar): hx = " << g.hx() << " > hbar / (10 max S_x) = "
       << hbar / (10.0 * max_sx) << "; use nx >= " << nx;
    throw ResolutionError(os.str(), nx);
  }
  const ComplexField p = psi.values();
  const Eigen::ArrayXd v = x.unaryExpr([&](double y) { return eval_potential(spec, y); });
  const double m = psi.phase().mass();
  ComplexField l = (hbar * hbar / (2.0 * m)) * central_d2_rows(p, g.hx()) -
                   (p.colwise() * v.cast<cd>()) + (kI * hbar) * central_d1_cols(p, g.ht());
  l.topRows(1).setZero();
  l.bottomRows(1).setZero();
  l.leftCols(1).setZero();
  l.rightCols(1).setZero();
  return l;
}

ComplexField predicted_remainder(const SeriesWavefunction& psi, int accuracy) {
  const double inv_2m = 1.0 / (2.0 * psi.phase().mass());
  const FieldDerivatives last = differentiate(psi.amplitudes().back(), accuracy);
  return (-ipow(psi.hbar(), psi.order() + 2) * inv_2m) * last.dxx.cast<cd>() * psi.carrier();
}

FieldNorms interior_norms(const ComplexField& f) {
  const auto block = f.block(2, 1, f.rows() - 4, f.cols() - 2);
  const Eigen::ArrayXXd mag = block.abs();
  return {mag.maxCoeff(), std::sqrt(mag.square().mean())};
}

void validate_hbar_list(const std::vector<double>& hbars) {
  std::vector<std::string> problems;
  if (hbars.size() < 3) problems.emplace_back("hbar list needs at least 3 values");
  for (std::size_t i = 0; i < hbars.size(); ++i) {
    if (!(hbars[i] > 0.0)) problems.emplace_back("hbar values must be > 0");
    if (i > 0 && !(hbars[i] < hbars[i - 1]))
      problems.emplace_back("hbar list must be strictly decreasing");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::array<double, 3> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    a(i, 0) = x[i];
    a(i, 1) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(n));
  return {c(0), c(1), rms};
}

ResidualReport residual_order_sweep(const PhaseField& phase, const PotentialSpec& spec,
                                    const std::vector<AmplitudeField>& fields,
                                    const std::vector<double>& hbars, double tol_identity,
                                    int accuracy) {
  validate_hbar_list(hbars);
  ResidualReport report;
  report.order = static_cast<int>(fields.size()) - 1;
  report.tol_identity = tol_identity;
  std::vector<double> log_h;
  std::vector<double> log_r;
  for (double hbar : hbars) {
    const SeriesWavefunction psi(phase, fields, hbar);
    const ComplexField l = apply_L_algebraic(psi, spec, accuracy);
    const ComplexField r = predicted_remainder(psi, accuracy);
    ResidualEntry e;
    e.hbar = hbar;
    e.residual = interior_norms(l);
    e.remainder = interior_norms(r);
    const FieldNorms diff = interior_norms(l - r);
    // absolute when the remainder vanishes identically
    e.identity_error = e.remainder.max > 0.0 ? diff.max / e.remainder.max : diff.max;
    e.identity_error_rms = e.remainder.rms > 0.0 ? diff.rms / e.remainder.rms : diff.rms;
    if (!(e.identity_error <= tol_identity)) {
      std::ostringstream os;
      os << "hbar = " << hbar << ": remainder identity error " << e.identity_error
         << " exceeds " << tol_identity;
      report.failures.push_back(os.str());
    }
    log_h.push_back(std::log(hbar));
    log_r.push_back(std::log(e.residual.rms));
    report.entries.push_back(e);
  }
  report.vanishing = std::all_of(report.entries.begin(), report.entries.end(),
                                 [](const ResidualEntry& e) { return e.residual.max == 0.0; });
  if (report.vanishing) return report;
  const auto [slope, intercept, resid] = fit_line(log_h, log_r);
  report.slope = slope;
  report.intercept = intercept;
  report.fit_residual = resid;
  if (!std::isfinite(slope)) report.failures.emplace_back("order slope is not finite");
  return report;
}

void require_passed(const ResidualReport& report) {
  if (report.passed()) return;
  std::ostringstream os;
  os << "residual sweep failed:";
  for (const auto& f : report.failures) os << "\n  " << f;
  throw ToleranceFailure(os.str());
}

}  // namespace wkbtd
