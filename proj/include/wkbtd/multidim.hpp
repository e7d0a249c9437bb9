#pragma once

#include <vector>

#include "wkbtd/series.hpp"

namespace wkbtd {

inline constexpr int kMaxDims = 3;
inline constexpr int kMaxOrderMultiD = 2;

/// Tensor-product space-time grid. Each spatial axis is a SpaceTimeGrid and
/// all axes share one time axis. Flat storage runs over axis 0 fastest, then
/// the remaining axes, then time.
class GridD {
 public:
  explicit GridD(std::vector<SpaceTimeGrid> axes);

  int dims() const { return static_cast<int>(axes_.size()); }
  const SpaceTimeGrid& axis(int a) const { return axes_[a]; }
  const std::vector<SpaceTimeGrid>& axes() const { return axes_; }
  Index nt() const { return axes_.front().nt(); }
  double t_hi() const { return axes_.front().t_hi(); }
  double ht() const { return axes_.front().ht(); }
  double t(Index n) const { return axes_.front().t(n); }

  Index spatial_size() const { return spatial_size_; }
  Index size() const { return spatial_size_ * nt(); }
  /// Stride of spatial axis a, or of time for a == dims().
  Index stride(int a) const { return strides_[a]; }
  Index extent(int a) const { return a == dims() ? nt() : axes_[a].nx(); }

  /// Spatial multi-index of a flat spatial index.
  std::array<Index, kMaxDims> unflatten(Index spatial) const;

  bool operator==(const GridD& other) const { return axes_ == other.axes_; }

 private:
  std::vector<SpaceTimeGrid> axes_;
  std::vector<Index> strides_;
  Index spatial_size_ = 1;
};

class AmplitudeFieldD {
 public:
  AmplitudeFieldD(int order, GridD grid, Eigen::ArrayXd values);

  int order() const { return order_; }
  const GridD& grid() const { return grid_; }
  const Eigen::ArrayXd& values() const { return values_; }

  AmplitudeFieldD restrict_to(const GridD& sub) const;

 private:
  int order_;
  GridD grid_;
  Eigen::ArrayXd values_;
};

/// S(x, t) = sum_i W_i(x_i) - beta t with beta = sum_i beta_i for a separable
/// potential V(x) = sum_i V_i(x_i).
class SeparablePhaseD {
 public:
  explicit SeparablePhaseD(std::vector<PhaseField> axes);

  int dims() const { return static_cast<int>(axes_.size()); }
  const PhaseField& axis(int a) const { return axes_[a]; }
  double mass() const { return axes_.front().mass(); }
  double beta() const { return beta_; }

 private:
  std::vector<PhaseField> axes_;
  double beta_ = 0.0;
};

/// Per-axis phases over the axes of `grid`; axis errors are rethrown with the
/// axis index.
SeparablePhaseD build_phase_d(const std::vector<PotentialSpec>& specs, double mass,
                              const std::vector<double>& betas, const GridD& grid,
                              double margin = kDefaultMargin,
                              const std::vector<std::optional<double>>& anchors = {});

/// max over grid nodes of |S_t + |grad S|^2 / 2m + V|.
double hj_residual_d(const SeparablePhaseD& phase);

/// a0 = prod_i S_{x_i}^{-1/2} phi_i(t - sigma_i(x_i)).
AmplitudeFieldD solve_a0_d(const SeparablePhaseD& phase,
                           const std::vector<InitialProfile>& profiles, const GridD& grid);

/// Order-k field from the order-(k-1) field: along the decoupled backward
/// characteristics dx_i/dtau = S_{x_i}/m, with source Laplacian(a_{k-1}).
AmplitudeFieldD solve_ak_d(const SeparablePhaseD& phase, const AmplitudeFieldD& a_prev,
                           const GridD& grid, const TransportOptions& options = {});

std::vector<AmplitudeFieldD> solve_hierarchy_d(const SeparablePhaseD& phase,
                                               const std::vector<InitialProfile>& profiles,
                                               const GridD& grid, int order,
                                               const TransportOptions& options = {});

/// Pointwise 2 grad S . grad a_k + Lap S a_k + 2m a_k,t - Lap a_{k-1}.
std::vector<Eigen::ArrayXd> transport_residual_fields_d(
    const SeparablePhaseD& phase, const std::vector<AmplitudeFieldD>& fields, int accuracy);

/// max over interior nodes (one layer per axis and in t removed), per order.
std::vector<double> transport_residual_d(const SeparablePhaseD& phase,
                                         const std::vector<AmplitudeFieldD>& fields,
                                         int accuracy = kAlgebraicAccuracy);

/// max over interior nodes of |d_t(a0^2) + (1/m) div(a0^2 grad S)|, centered
/// differences.
double continuity_residual_d(const SeparablePhaseD& phase, const AmplitudeFieldD& a0);

/// Laplacian of a field, differences of the given formal order.
Eigen::ArrayXd laplacian(const AmplitudeFieldD& field, int accuracy);

struct SeriesWavefunctionD {
  SeriesWavefunctionD(SeparablePhaseD phase, std::vector<AmplitudeFieldD> amps, double hbar);

  SeparablePhaseD phase;
  std::vector<AmplitudeFieldD> amps;
  double hbar;

  int order() const { return static_cast<int>(amps.size()) - 1; }
  const GridD& grid() const { return amps.front().grid(); }
  Eigen::ArrayXcd carrier() const;
  Eigen::ArrayXcd values() const;
};

/// L Psi through the d-dimensional expansion; normalisation 1/2m on every
/// bracket including the remainder term.
Eigen::ArrayXcd apply_L_algebraic_d(const SeriesWavefunctionD& psi,
                                    int accuracy = kAlgebraicAccuracy);

/// -(1/2m) (i hbar)^{N+2} Lap a_N exp(iS/hbar).
Eigen::ArrayXcd predicted_remainder_d(const SeriesWavefunctionD& psi,
                                      int accuracy = kAlgebraicAccuracy);

/// Norms over interior nodes: two layers per spatial axis, one in t.
FieldNorms interior_norms_d(const GridD& grid, const Eigen::ArrayXcd& f);

/// max|L Psi - R| / max|R| on interior nodes; the absolute max|L Psi - R|
/// when R vanishes identically.
double remainder_identity_d(const SeriesWavefunctionD& psi,
                            int accuracy = kAlgebraicAccuracy);

ResidualReport residual_order_sweep_d(const SeparablePhaseD& phase,
                                      const std::vector<AmplitudeFieldD>& fields,
                                      const std::vector<double>& hbars,
                                      double tol_identity = 1e-6,
                                      int accuracy = kAlgebraicAccuracy);

}  // namespace wkbtd
