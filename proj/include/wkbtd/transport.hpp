#pragma once

#include <array>
#include <vector>

#include "wkbtd/hj.hpp"

namespace wkbtd {

/// Maximum truncation order of the 1-D hierarchy.
inline constexpr int kMaxOrder1D = 4;

struct TransportOptions {
  /// Formal order of the differences that produce the source a_{k-1,xx}.
  int difference_accuracy = 8;
  /// Lagrange points used to interpolate the source in x and in t.
  int interpolation_points = 8;
  /// RK4 steps per time cell; the step is ht / steps_per_cell.
  int steps_per_cell = 4;
};

/// Backward characteristic dx/dtau = S_x(x)/m from a seed node down to tau = 0.
///
/// `stages[i]` holds the four RK4 stage positions of step i, which runs from
/// tau = seed_t - i*step to tau = seed_t - (i+1)*step. `x[i]` is the path at
/// the start of step i; x.back() is the foot of the characteristic.
struct CharacteristicPath {
  double seed_x = 0.0;
  double seed_t = 0.0;
  double step = 0.0;
  std::vector<double> x;
  std::vector<std::array<double, 4>> stages;

  Index steps() const { return static_cast<Index>(stages.size()); }
  double tau(Index i) const { return seed_t - static_cast<double>(i) * step; }
  double foot() const { return x.back(); }
};

/// Traces the backward characteristic through (x_seed, t_seed) with a fixed
/// RK4 step (t_seed must be a multiple of it up to rounding). Throws
/// HorizonError if the path leaves the phase's allowed domain.
CharacteristicPath trace_characteristic(const PhaseField& phase, double x_seed,
                                        double t_seed, double step);

/// a0(x, t) = S_x(x)^{-1/2} phi(t - sigma(x)), the exact solution of
/// 2 S_x a_x + S_xx a + 2m a_t = 0 with a0(x, 0) = S_x^{-1/2} phi(u(x, 0)).
AmplitudeField solve_a0(const PhaseField& phase, const InitialProfile& phi,
                        const SpaceTimeGrid& grid);

/// Order-k coefficient on `grid` from the order-(k-1) field, solving
/// a_t + (S_x/m) a_x = (a_prev,xx - S_xx a) / 2m with a(x, 0) = 0 along
/// backward characteristics. `a_prev` must live on an aligned grid that
/// contains the domain of dependence of `grid`; otherwise HorizonError.
AmplitudeField solve_ak(const PhaseField& phase, const AmplitudeField& a_prev,
                        const SpaceTimeGrid& grid, const TransportOptions& options = {});

/// a_0 ... a_N on `grid`. Lower orders are solved on nested, left-extended
/// grids that cover each order's domain of dependence, then restricted.
std::vector<AmplitudeField> solve_hierarchy(const PhaseField& phase,
                                            const InitialProfile& phi,
                                            const SpaceTimeGrid& grid, int order,
                                            const TransportOptions& options = {});

/// Nested grids G_0 ⊇ G_1 ⊇ ... ⊇ G_order = grid, aligned with `grid`, where
/// G_{k-1} covers the domain of dependence of G_k plus stencil padding.
/// Empty when some G_k leaves the phase's allowed domain.
std::vector<SpaceTimeGrid> hierarchy_support(const PhaseField& phase,
                                             const SpaceTimeGrid& grid, int order,
                                             const TransportOptions& options = {});

/// Largest final time for which solve_hierarchy(order) fits in the allowed
/// domain, keeping the grid's x-range.
double max_admissible_t_hi(const PhaseField& phase, const SpaceTimeGrid& grid, int order,
                           const TransportOptions& options = {});

struct FieldDerivatives {
  Eigen::ArrayXXd dx;
  Eigen::ArrayXXd dxx;
  Eigen::ArrayXXd dt;
};

/// Derivatives of a field on its own grid with differences of the given
/// formal order (2 means plain centered differences, zero on the border).
FieldDerivatives differentiate(const AmplitudeField& field, int accuracy);

/// Pointwise transport residual 2 S_x a_k,x + S_xx a_k + 2m a_k,t - a_{k-1,xx}
/// for each order k; fields ordered k = 0..N on one grid.
std::vector<Eigen::ArrayXXd> transport_residual_fields(
    const PhaseField& phase, const std::vector<AmplitudeField>& fields, int accuracy);

/// max over interior nodes (one layer in x and t removed) of the transport
/// residual, per order.
std::vector<double> transport_residual(const PhaseField& phase,
                                       const std::vector<AmplitudeField>& fields,
                                       int accuracy = 2);

/// Pointwise d_t(a0^2) + (1/m) d_x(S_x a0^2) with centered differences.
Eigen::ArrayXXd continuity_residual_field(const PhaseField& phase, const AmplitudeField& a0);
double continuity_residual(const PhaseField& phase, const AmplitudeField& a0);

/// Closed-form a0 for V = x^2:
/// (2m(beta - x^2))^{-1/4} phi(t - (sqrt(2m)/2) arctan(x / sqrt(beta - x^2))).
double harmonic_a0_oracle(double mass, double beta, const InitialProfile& phi, double x,
                          double t);

}  // namespace wkbtd
