#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "wkbtd/transport.hpp"

namespace wkbtd {

using ComplexField = Eigen::ArrayXXcd;

/// Formal order of the differences applied to the amplitude fields in the
/// algebraic residual path.
inline constexpr int kAlgebraicAccuracy = 8;

/// Psi(x, t) = sum_{k=0}^{N} (i hbar)^k a_k(x, t) exp(i S(x, t) / hbar) on
/// the grid of the amplitude fields.
class SeriesWavefunction {
 public:
  SeriesWavefunction(PhaseField phase, std::vector<AmplitudeField> amps, double hbar);

  double hbar() const { return hbar_; }
  int order() const { return static_cast<int>(amps_.size()) - 1; }
  const PhaseField& phase() const { return phase_; }
  const std::vector<AmplitudeField>& amplitudes() const { return amps_; }
  const SpaceTimeGrid& grid() const { return amps_.front().grid(); }

  /// W on the grid's x nodes.
  const Eigen::ArrayXd& w() const { return w_; }
  /// exp(i S / hbar) on the grid.
  ComplexField carrier() const;
  /// sum_k (i hbar)^k a_k on the grid.
  ComplexField envelope() const;
  ComplexField values() const;
  std::complex<double> operator()(Index i, Index n) const;

  /// Copy with every a_k multiplied by c.
  SeriesWavefunction scaled(double c) const;

 private:
  PhaseField phase_;
  std::vector<AmplitudeField> amps_;
  double hbar_;
  Eigen::ArrayXd w_;
};

SeriesWavefunction assemble_psi(const PhaseField& phase, std::vector<AmplitudeField> amps,
                                double hbar);

/// L Psi through the expansion in which S satisfies the HJ equation:
/// exp(iS/hbar) [ (i hbar / 2m) T_0 + sum_{k>=1} (i hbar)^{k+1} / 2m T_k
///                - (i hbar)^{N+2} / 2m a_N,xx ],
/// T_k = 2 S_x a_k,x + S_xx a_k + 2m a_k,t - a_{k-1,xx}. Derivatives of S are
/// analytic; those of a_k are differences of formal order `accuracy`.
/// Throws ConsistencyError when the phase's HJ residual exceeds 1e-10.
ComplexField apply_L_algebraic(const SeriesWavefunction& psi, const PotentialSpec& spec,
                               int accuracy = kAlgebraicAccuracy);

/// (hbar^2/2m) Psi_xx - V Psi + i hbar Psi_t by centered differences of the
/// sampled Psi. Border nodes are zero. Throws ResolutionError unless
/// hx <= hbar / (10 max S_x).
ComplexField apply_L_direct(const SeriesWavefunction& psi, const PotentialSpec& spec);

/// -(1/2m) (i hbar)^{N+2} a_N,xx exp(iS/hbar).
ComplexField predicted_remainder(const SeriesWavefunction& psi,
                                 int accuracy = kAlgebraicAccuracy);

struct FieldNorms {
  double max = 0.0;
  double rms = 0.0;
};

/// Norms over interior nodes: two layers removed in x, one in t.
FieldNorms interior_norms(const ComplexField& f);

struct ResidualEntry {
  double hbar = 0.0;
  FieldNorms residual;       // |L Psi|
  FieldNorms remainder;      // |predicted remainder|
  double identity_error = 0.0;      // max|L Psi - R| / max|R|
  double identity_error_rms = 0.0;  // rms(L Psi - R) / rms(R)
};

struct ResidualReport {
  int order = 0;
  std::vector<ResidualEntry> entries;
  /// least-squares fit log rms|L Psi| = slope log hbar + intercept
  double slope = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;
  double tol_identity = 0.0;
  /// L Psi is exactly zero on the interior for every hbar; no slope is fitted.
  bool vanishing = false;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// Evaluates the algebraic residual and the remainder identity for each
/// hbar (fields are hbar-independent and reused) and fits the order slope.
/// Identity errors above `tol_identity` are listed in `failures`.
ResidualReport residual_order_sweep(const PhaseField& phase, const PotentialSpec& spec,
                                    const std::vector<AmplitudeField>& fields,
                                    const std::vector<double>& hbars,
                                    double tol_identity = 1e-6,
                                    int accuracy = kAlgebraicAccuracy);

/// Throws ToleranceFailure listing the report's failures, if any.
void require_passed(const ResidualReport& report);

/// Checks that `hbars` is strictly decreasing with at least three entries.
void validate_hbar_list(const std::vector<double>& hbars);

/// Least-squares line through (x_i, y_i): returns {slope, intercept, rms residual}.
std::array<double, 3> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace wkbtd
