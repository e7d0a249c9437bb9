#include "wkbtd/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkbtd/parallel.hpp"
#include "wkbtd/stencil.hpp"

namespace wkbtd {

namespace {

int usable_accuracy(int requested, Index n, int deriv) {
  // the operator needs accuracy + deriv points
  int acc = requested;
  while (acc > 2 && acc + deriv > n) acc -= 2;
  return acc;
}

double domain_slack(const Interval& d) { return 1e-12 * (1.0 + std::abs(d.lo) + std::abs(d.hi)); }

[[noreturn]] void horizon(const std::string& why, double x, double t, double suggested) {
  std::ostringstream os;
  os << why << " (seed node x = " << x << ", t = " << t
     << "); largest admissible t_hi is about " << suggested;
  throw HorizonError(os.str(), x, t, suggested);
}

}  // namespace

CharacteristicPath trace_characteristic(const PhaseField& phase, double x_seed,
                                        double t_seed, double step) {
  if (!(step > 0.0) || !(t_seed >= 0.0))
    throw ConfigError({"characteristic step must be > 0 and seed time >= 0"});
  CharacteristicPath path;
  path.seed_x = x_seed;
  path.seed_t = t_seed;
  path.step = step;
  const auto steps = static_cast<Index>(std::llround(t_seed / step));
  path.x.reserve(static_cast<std::size_t>(steps + 1));
  path.stages.reserve(static_cast<std::size_t>(steps));

  const Interval& dom = phase.domain();
  const double slack = domain_slack(dom);
  const double m = phase.mass();
  auto velocity = [&](double x, Index i) {
    if (!dom.contains(x, slack))
      horizon("backward characteristic leaves the allowed region", x_seed, t_seed,
              static_cast<double>(i) * step);
    return -phase.sx(x) / m;  // d x / d s with s = seed_t - tau
  };

  double x = x_seed;
  path.x.push_back(x);
  for (Index i = 0; i < steps; ++i) {
    const double k1 = velocity(x, i);
    const double x2 = x + 0.5 * step * k1;
    const double k2 = velocity(x2, i);
    const double x3 = x + 0.5 * step * k2;
    const double k3 = velocity(x3, i);
    const double x4 = x + step * k3;
    const double k4 = velocity(x4, i);
    path.stages.push_back({x, x2, x3, x4});
    x += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    path.x.push_back(x);
  }
  if (!dom.contains(x, slack))
    horizon("backward characteristic leaves the allowed region", x_seed, t_seed, t_seed);
  return path;
}

AmplitudeField solve_a0(const PhaseField& phase, const InitialProfile& phi,
                        const SpaceTimeGrid& grid) {
  Eigen::ArrayXXd a(grid.nx(), grid.nt());
  const Eigen::ArrayXd t = grid.t_axis();
  for (Index i = 0; i < grid.nx(); ++i) {
    const double x = grid.x(i);
    const double amp = 1.0 / std::sqrt(phase.sx(x));
    const double sigma = phase.travel_time(x);
    for (Index n = 0; n < grid.nt(); ++n) a(i, n) = amp * phi.value(t(n) - sigma);
  }
  return {0, grid, std::move(a)};
}

AmplitudeField solve_ak(const PhaseField& phase, const AmplitudeField& a_prev,
                        const SpaceTimeGrid& grid, const TransportOptions& options) {
  const SpaceTimeGrid& pg = a_prev.grid();
  if (grid.offset_in(pg) < 0)
    throw ShapeError("target grid is not aligned with the grid of a_{k-1}");
  const int spc = options.steps_per_cell;
  if (spc < 1) throw ConfigError({"steps_per_cell must be >= 1"});

  const Index nt = grid.nt();
  const Index nxp = pg.nx();
  const double hx = pg.hx();
  const double ht = grid.ht();
  const double step = ht / spc;
  const int px = static_cast<int>(std::min<Index>(options.interpolation_points, nxp));
  const int pt = static_cast<int>(std::min<Index>(options.interpolation_points, nt));

  // The leftmost seed at the final time reaches furthest back.
  {
    const double bound = pg.x_lo() + static_cast<double>(px / 2 - 1) * hx - 1e-9 * hx;
    const auto path = trace_characteristic(phase, grid.x_lo(), grid.t_hi(), step);
    if (path.foot() < bound) {
      Index i = 0;
      while (i < path.steps() && *std::min_element(path.stages[i].begin(),
                                                   path.stages[i].end()) >= bound)
        ++i;
      horizon("backward characteristic leaves the support of a_{k-1}", grid.x_lo(),
              grid.t_hi(), static_cast<double>(i) * step);
    }
    trace_characteristic(phase, grid.x_hi(), grid.t_hi(), step);
  }

  // Source a_{k-1,xx} on the previous grid, then on a time axis refined so
  // every RK4 stage time is a node.
  const DifferenceOperator dxx(nxp, hx, 2, usable_accuracy(options.difference_accuracy, nxp, 2));
  const Eigen::ArrayXXd src = dxx.along_rows(a_prev.values());
  const int refine = 2 * spc;
  const Index nr = (nt - 1) * refine + 1;
  Eigen::ArrayXXd src_ref(nxp, nr);
  for (Index r = 0; r < nr; ++r) {
    const auto st = LagrangeStencil::make(static_cast<double>(r) / refine, 0.0, 1.0, nt, pt);
    src_ref.col(r) = st.w[0] * src.col(st.start);
    for (int k = 1; k < pt; ++k) src_ref.col(r) += st.w[k] * src.col(st.start + k);
  }

  const double two_m = 2.0 * phase.mass();
  Eigen::ArrayXXd a = Eigen::ArrayXXd::Zero(grid.nx(), nt);
  const Index total_steps = (nt - 1) * spc;

  parallel_for(0, grid.nx(), [&](long j) {
    const double xj = grid.x(j);
    const auto path = trace_characteristic(phase, xj, grid.t_hi(), step);
    if (path.steps() != total_steps)
      throw NumericError("characteristic step count does not match the time grid");
    std::vector<LagrangeStencil> stencil(static_cast<std::size_t>(4 * total_steps));
    std::vector<double> weight(static_cast<std::size_t>(4 * total_steps));
    for (Index i = 0; i < total_steps; ++i) {
      for (int q = 0; q < 4; ++q) {
        const double xs = path.stages[i][q];
        stencil[4 * i + q] = LagrangeStencil::make(xs, pg.x_lo(), hx, nxp, px);
        weight[4 * i + q] = std::sqrt(phase.sx(xs)) / two_m;
      }
    }
    static constexpr std::array<int, 4> kLag{0, 1, 1, 2};
    static constexpr std::array<double, 4> kRk{1.0, 2.0, 2.0, 1.0};
    const double amp = 1.0 / std::sqrt(phase.sx(xj));
    for (Index n = 1; n < nt; ++n) {
      double sum = 0.0;
      const Index base = refine * n;
      for (Index i = 0; i < spc * n; ++i) {
        double stage_sum = 0.0;
        for (int q = 0; q < 4; ++q) {
          const auto& st = stencil[4 * i + q];
          const double* col = &src_ref(st.start, base - 2 * i - kLag[q]);
          double v = 0.0;
          for (int k = 0; k < px; ++k) v += st.w[k] * col[k];
          stage_sum += kRk[q] * weight[4 * i + q] * v;
        }
        sum += step / 6.0 * stage_sum;
      }
      a(j, n) = amp * sum;
    }
  });

  if (!a.allFinite()) {
    std::ostringstream os;
    os << "non-finite source while solving a_" << a_prev.order() + 1;
    throw NumericError(os.str());
  }
  return {a_prev.order() + 1, grid, std::move(a)};
}

std::vector<SpaceTimeGrid> hierarchy_support(const PhaseField& phase,
                                             const SpaceTimeGrid& grid, int order,
                                             const TransportOptions& options) {
  std::vector<SpaceTimeGrid> grids(static_cast<std::size_t>(order + 1), grid);
  const double hx = grid.hx();
  const double step = grid.ht() / options.steps_per_cell;
  const Interval& dom = phase.domain();
  const double slack = domain_slack(dom);
  const Index pad = options.interpolation_points / 2 + options.difference_accuracy / 2 + 1;
  for (int k = order; k >= 1; --k) {
    const SpaceTimeGrid& g = grids[k];
    double foot = 0.0;
    try {
      foot = trace_characteristic(phase, g.x_lo(), g.t_hi(), step).foot();
    } catch (const HorizonError&) {
      return {};
    }
    const double reach = g.x_lo() - foot;
    const Index left = static_cast<Index>(std::ceil(reach / hx)) + pad;
    const Index room = static_cast<Index>(std::floor((dom.hi + slack - g.x_hi()) / hx));
    const Index right = std::clamp<Index>(room, 0, pad);
    grids[k - 1] = g.extended(left, right);
    if (!dom.contains(grids[k - 1].x_lo(), slack)) return {};
  }
  return grids;
}

double max_admissible_t_hi(const PhaseField& phase, const SpaceTimeGrid& grid, int order,
                           const TransportOptions& options) {
  auto feasible = [&](double t_hi) {
    const SpaceTimeGrid g(grid.x_lo(), grid.x_hi(), grid.nx(), t_hi, grid.nt());
    return !hierarchy_support(phase, g, order, options).empty();
  };
  if (feasible(grid.t_hi())) return grid.t_hi();
  double lo = 0.0;
  double hi = grid.t_hi();
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::vector<AmplitudeField> solve_hierarchy(const PhaseField& phase,
                                            const InitialProfile& phi,
                                            const SpaceTimeGrid& grid, int order,
                                            const TransportOptions& options) {
  if (order < 0 || order > kMaxOrder1D) {
    std::ostringstream os;
    os << "order N = " << order << " outside 0..N <= " << kMaxOrder1D;
    throw ConfigError({os.str()});
  }
  const auto grids = hierarchy_support(phase, grid, order, options);
  if (grids.empty()) {
    horizon("domain of dependence of the hierarchy leaves the allowed region",
            grid.x_lo(), grid.t_hi(), max_admissible_t_hi(phase, grid, order, options));
  }

  std::vector<AmplitudeField> out;
  AmplitudeField current = solve_a0(phase, phi, grids[0]);
  out.push_back(current.restrict_to(grid));
  for (int k = 1; k <= order; ++k) {
    current = solve_ak(phase, current, grids[k], options);
    out.push_back(current.restrict_to(grid));
  }
  return out;
}

FieldDerivatives differentiate(const AmplitudeField& field, int accuracy) {
  const auto& g = field.grid();
  const auto& a = field.values();
  if (accuracy <= 2) {
    return {central_d1_rows(a, g.hx()), central_d2_rows(a, g.hx()),
            central_d1_cols(a, g.ht())};
  }
  const DifferenceOperator dx(g.nx(), g.hx(), 1, usable_accuracy(accuracy, g.nx(), 1));
  const DifferenceOperator dxx(g.nx(), g.hx(), 2, usable_accuracy(accuracy, g.nx(), 2));
  const DifferenceOperator dt(g.nt(), g.ht(), 1, usable_accuracy(accuracy, g.nt(), 1));
  return {dx.along_rows(a), dxx.along_rows(a), dt.along_cols(a)};
}

std::vector<Eigen::ArrayXXd> transport_residual_fields(
    const PhaseField& phase, const std::vector<AmplitudeField>& fields, int accuracy) {
  std::vector<Eigen::ArrayXXd> out;
  if (fields.empty()) return out;
  const SpaceTimeGrid& g = fields.front().grid();
  for (const auto& f : fields) {
    if (!(f.grid() == g)) throw ShapeError("transport fields must share one grid");
  }
  const Eigen::ArrayXd x = g.x_axis();
  const Eigen::ArrayXd sx = phase.sx_on(x);
  const Eigen::ArrayXd sxx = phase.sxx_on(x);
  const double two_m = 2.0 * phase.mass();
  Eigen::ArrayXXd prev_xx = Eigen::ArrayXXd::Zero(g.nx(), g.nt());
  for (const auto& f : fields) {
    const FieldDerivatives d = differentiate(f, accuracy);
    Eigen::ArrayXXd r = 2.0 * (d.dx.colwise() * sx) + (f.values().colwise() * sxx) +
                        two_m * d.dt - prev_xx;
    out.push_back(std::move(r));
    prev_xx = d.dxx;
  }
  return out;
}

std::vector<double> transport_residual(const PhaseField& phase,
                                       const std::vector<AmplitudeField>& fields,
                                       int accuracy) {
  std::vector<double> out;
  for (const auto& r : transport_residual_fields(phase, fields, accuracy)) {
    out.push_back(r.block(1, 1, r.rows() - 2, r.cols() - 2).abs().maxCoeff());
  }
  return out;
}

Eigen::ArrayXXd continuity_residual_field(const PhaseField& phase, const AmplitudeField& a0) {
  const auto& g = a0.grid();
  const Eigen::ArrayXXd density = a0.values().square();
  const Eigen::ArrayXd sx = phase.sx_on(g.x_axis());
  const Eigen::ArrayXXd flux = density.colwise() * sx;
  return central_d1_cols(density, g.ht()) + central_d1_rows(flux, g.hx()) / phase.mass();
}

double continuity_residual(const PhaseField& phase, const AmplitudeField& a0) {
  const Eigen::ArrayXXd r = continuity_residual_field(phase, a0);
  return r.block(1, 1, r.rows() - 2, r.cols() - 2).abs().maxCoeff();
}

double harmonic_a0_oracle(double mass, double beta, const InitialProfile& phi, double x,
                          double t) {
  if (!(x * x < beta)) {
    std::ostringstream os;
    os << "harmonic oracle needs |x| < sqrt(beta); got x = " << x;
    throw DomainError(os.str());
  }
  const double q = beta - x * x;
  const double u = t - 0.5 * std::sqrt(2.0 * mass) * std::atan(x / std::sqrt(q));
  return std::pow(2.0 * mass * q, -0.25) * phi.value(u);
}

}  // namespace wkbtd
