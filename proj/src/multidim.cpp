#include "wkbtd/multidim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkbtd/parallel.hpp"
#include "wkbtd/stencil.hpp"

namespace wkbtd {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

cd ipow(double hbar, int k) { return std::pow(kI * hbar, k); }

int usable_accuracy(int requested, Index n, int deriv) {
  int acc = requested;
  while (acc > 2 && acc + deriv > n) acc -= 2;
  return acc;
}

std::string axis_label(int a) { return "axis " + std::to_string(a) + ": "; }

/// Derivative of a flat field along spatial axis a, or along t for a == dims.
Eigen::ArrayXd derivative(const GridD& g, const Eigen::ArrayXd& f, int a, int deriv,
                          int accuracy) {
  const Index n = g.extent(a);
  const double h = a == g.dims() ? g.ht() : g.axis(a).hx();
  const DifferenceOperator op(n, h, deriv, usable_accuracy(accuracy, n, deriv));
  Eigen::ArrayXd out(f.size());
  const Index stride = g.stride(a);
  op.along_stride(f.data(), out.data(), stride, g.size() / (stride * n), stride * n, stride);
  return out;
}

/// Calls body(flat index) for nodes at least `lx` layers from every spatial
/// border and `lt` layers from the time border.
template <typename Body>
void for_interior(const GridD& g, Index lx, Index lt, Body&& body) {
  std::array<Index, kMaxDims> lo{0, 0, 0};
  std::array<Index, kMaxDims> hi{1, 1, 1};
  for (int a = 0; a < g.dims(); ++a) {
    lo[a] = lx;
    hi[a] = g.axis(a).nx() - lx;
  }
  const Index s1 = g.dims() > 1 ? g.stride(1) : 0;
  const Index s2 = g.dims() > 2 ? g.stride(2) : 0;
  const Index st = g.spatial_size();
  for (Index n = lt; n < g.nt() - lt; ++n)
    for (Index k = lo[2]; k < hi[2]; ++k)
      for (Index j = lo[1]; j < hi[1]; ++j)
        for (Index i = lo[0]; i < hi[0]; ++i) body(i + j * s1 + k * s2 + n * st);
}

/// grad S components and Lap S on the spatial nodes of g.
struct PhaseSamples {
  std::vector<Eigen::ArrayXd> grad;
  Eigen::ArrayXd lap;
};

PhaseSamples sample_phase(const SeparablePhaseD& phase, const GridD& g) {
  PhaseSamples out;
  out.lap = Eigen::ArrayXd::Zero(g.spatial_size());
  for (int a = 0; a < g.dims(); ++a) {
    const Eigen::ArrayXd x = g.axis(a).x_axis();
    const Eigen::ArrayXd sx = phase.axis(a).sx_on(x);
    const Eigen::ArrayXd sxx = phase.axis(a).sxx_on(x);
    Eigen::ArrayXd grad(g.spatial_size());
    for (Index s = 0; s < g.spatial_size(); ++s) {
      const Index i = (s / g.stride(a)) % g.axis(a).nx();
      grad(s) = sx(i);
      out.lap(s) += sxx(i);
    }
    out.grad.push_back(std::move(grad));
  }
  return out;
}

using FieldMap = Eigen::Map<const Eigen::ArrayXXd>;

FieldMap as_matrix(const GridD& g, const Eigen::ArrayXd& f) {
  return {f.data(), g.spatial_size(), g.nt()};
}

}  // namespace

GridD::GridD(std::vector<SpaceTimeGrid> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > static_cast<std::size_t>(kMaxDims)) {
    std::ostringstream os;
    os << "dimension must be 1.." << kMaxDims << "; got " << axes_.size();
    throw ConfigError({os.str()});
  }
  for (const auto& ax : axes_) {
    if (ax.nt() != axes_.front().nt() || ax.t_hi() != axes_.front().t_hi())
      throw ShapeError("all axes must share one time axis");
  }
  for (const auto& ax : axes_) {
    strides_.push_back(spatial_size_);
    spatial_size_ *= ax.nx();
  }
  strides_.push_back(spatial_size_);
}

std::array<Index, kMaxDims> GridD::unflatten(Index spatial) const {
  std::array<Index, kMaxDims> idx{0, 0, 0};
  for (int a = 0; a < dims(); ++a) {
    idx[a] = spatial % axes_[a].nx();
    spatial /= axes_[a].nx();
  }
  return idx;
}

AmplitudeFieldD::AmplitudeFieldD(int order, GridD grid, Eigen::ArrayXd values)
    : order_(order), grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    std::ostringstream os;
    os << "amplitude field has " << values_.size() << " values, grid has " << grid_.size();
    throw ShapeError(os.str());
  }
  if (!values_.allFinite()) {
    std::ostringstream os;
    os << "amplitude field a_" << order_ << " contains non-finite values";
    throw NumericError(os.str());
  }
}

AmplitudeFieldD AmplitudeFieldD::restrict_to(const GridD& sub) const {
  if (sub.dims() != grid_.dims()) throw ShapeError("sub-grid dimension mismatch");
  std::array<Index, kMaxDims> off{0, 0, 0};
  for (int a = 0; a < sub.dims(); ++a) {
    off[a] = sub.axis(a).offset_in(grid_.axis(a));
    if (off[a] < 0) throw ShapeError("sub-grid is not aligned with the field's grid");
    if (off[a] + sub.axis(a).nx() > grid_.axis(a).nx())
      throw ShapeError("sub-grid extends past the field's grid");
  }
  Eigen::ArrayXd v(sub.size());
  for (Index n = 0; n < sub.nt(); ++n) {
    for (Index s = 0; s < sub.spatial_size(); ++s) {
      const auto idx = sub.unflatten(s);
      Index src = n * grid_.spatial_size();
      for (int a = 0; a < sub.dims(); ++a) src += (idx[a] + off[a]) * grid_.stride(a);
      v(s + n * sub.spatial_size()) = values_(src);
    }
  }
  return {order_, sub, std::move(v)};
}

SeparablePhaseD::SeparablePhaseD(std::vector<PhaseField> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ConfigError({"separable phase needs at least one axis"});
  for (const auto& ax : axes_) {
    if (ax.mass() != axes_.front().mass())
      throw ConfigError({"all axes must share one mass"});
    beta_ += ax.beta();
  }
}

SeparablePhaseD build_phase_d(const std::vector<PotentialSpec>& specs, double mass,
                              const std::vector<double>& betas, const GridD& grid,
                              double margin,
                              const std::vector<std::optional<double>>& anchors) {
  const auto d = static_cast<std::size_t>(grid.dims());
  std::vector<std::string> problems;
  if (specs.size() != d) problems.push_back("need one potential per axis");
  if (betas.size() != d) problems.push_back("need one beta per axis");
  if (!anchors.empty() && anchors.size() != d) problems.push_back("need one anchor per axis");
  if (!problems.empty()) throw ConfigError(std::move(problems));

  std::vector<PhaseField> axes;
  for (std::size_t a = 0; a < d; ++a) {
    try {
      axes.push_back(build_phase(specs[a], mass, betas[a], grid.axis(static_cast<int>(a)),
                                 anchors.empty() ? std::nullopt : anchors[a], margin));
    } catch (const RangeError& e) {
      throw RangeError(axis_label(static_cast<int>(a)) + e.what());
    } catch (const DomainError& e) {
      throw DomainError(axis_label(static_cast<int>(a)) + e.what());
    }
  }
  return SeparablePhaseD(std::move(axes));
}

double hj_residual_d(const SeparablePhaseD& phase) {
  // per-axis contributions on each axis' nodes, summed over the tensor grid
  std::vector<Eigen::ArrayXd> parts;
  for (int a = 0; a < phase.dims(); ++a) {
    const PhaseField& ax = phase.axis(a);
    const Eigen::ArrayXd x = ax.grid().x_axis();
    const Eigen::ArrayXd sx = ax.sx_on(x);
    Eigen::ArrayXd e(x.size());
    for (Index i = 0; i < x.size(); ++i)
      e(i) = sx(i) * sx(i) / (2.0 * ax.mass()) + eval_potential(ax.potential(), x(i));
    parts.push_back(std::move(e));
  }
  const double st = -phase.beta();
  const Index n0 = parts[0].size();
  const Index n1 = phase.dims() > 1 ? parts[1].size() : 1;
  const Index n2 = phase.dims() > 2 ? parts[2].size() : 1;
  double worst = 0.0;
  for (Index k = 0; k < n2; ++k)
    for (Index j = 0; j < n1; ++j)
      for (Index i = 0; i < n0; ++i) {
        double r = st + parts[0](i);
        if (phase.dims() > 1) r += parts[1](j);
        if (phase.dims() > 2) r += parts[2](k);
        worst = std::max(worst, std::abs(r));
      }
  return worst;
}

AmplitudeFieldD solve_a0_d(const SeparablePhaseD& phase,
                           const std::vector<InitialProfile>& profiles, const GridD& grid) {
  if (static_cast<int>(profiles.size()) != grid.dims())
    throw ConfigError({"need one initial profile per axis"});
  std::vector<Eigen::ArrayXXd> factors;
  for (int a = 0; a < grid.dims(); ++a)
    factors.push_back(solve_a0(phase.axis(a), profiles[a], grid.axis(a)).values());
  Eigen::ArrayXd v(grid.size());
  for (Index n = 0; n < grid.nt(); ++n) {
    for (Index s = 0; s < grid.spatial_size(); ++s) {
      const auto idx = grid.unflatten(s);
      double p = factors[0](idx[0], n);
      for (int a = 1; a < grid.dims(); ++a) p *= factors[a](idx[a], n);
      v(s + n * grid.spatial_size()) = p;
    }
  }
  return {0, grid, std::move(v)};
}

Eigen::ArrayXd laplacian(const AmplitudeFieldD& field, int accuracy) {
  const GridD& g = field.grid();
  Eigen::ArrayXd out = derivative(g, field.values(), 0, 2, accuracy);
  for (int a = 1; a < g.dims(); ++a) out += derivative(g, field.values(), a, 2, accuracy);
  return out;
}

AmplitudeFieldD solve_ak_d(const SeparablePhaseD& phase, const AmplitudeFieldD& a_prev,
                           const GridD& grid, const TransportOptions& options) {
  const GridD& pg = a_prev.grid();
  const int d = grid.dims();
  if (pg.dims() != d || phase.dims() != d) throw ShapeError("dimension mismatch");
  for (int a = 0; a < d; ++a) {
    if (grid.axis(a).offset_in(pg.axis(a)) < 0)
      throw ShapeError(axis_label(a) + "target grid is not aligned with the grid of a_{k-1}");
  }
  const int spc = options.steps_per_cell;
  if (spc < 1) throw ConfigError({"steps_per_cell must be >= 1"});

  const Index nt = grid.nt();
  const double step = grid.ht() / spc;
  const Index total_steps = (nt - 1) * spc;
  const int pt = static_cast<int>(std::min<Index>(options.interpolation_points, nt));

  // Per axis and target node: stage stencils and sqrt(S_x) along the path.
  struct AxisPaths {
    int points = 0;
    std::vector<std::vector<LagrangeStencil>> stencil;
    std::vector<std::vector<double>> weight;
    std::vector<double> amp;
  };
  std::vector<AxisPaths> paths(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    const PhaseField& ax = phase.axis(a);
    const SpaceTimeGrid& tg = grid.axis(a);
    const SpaceTimeGrid& ag = pg.axis(a);
    AxisPaths& p = paths[a];
    p.points = static_cast<int>(std::min<Index>(options.interpolation_points, ag.nx()));
    const double bound = ag.x_lo() + static_cast<double>(p.points / 2 - 1) * ag.hx() -
                         1e-9 * ag.hx();
    p.stencil.resize(static_cast<std::size_t>(tg.nx()));
    p.weight.resize(static_cast<std::size_t>(tg.nx()));
    p.amp.resize(static_cast<std::size_t>(tg.nx()));
    for (Index j = 0; j < tg.nx(); ++j) {
      CharacteristicPath path;
      try {
        path = trace_characteristic(ax, tg.x(j), tg.t_hi(), step);
      } catch (const HorizonError& e) {
        throw HorizonError(axis_label(a) + e.what(), e.seed_x(), e.seed_t(),
                           e.suggested_t_hi());
      }
      if (path.steps() != total_steps)
        throw NumericError("characteristic step count does not match the time grid");
      if (path.foot() < bound) {
        std::ostringstream os;
        os << axis_label(a) << "backward characteristic leaves the support of a_{k-1} (seed x = "
           << tg.x(j) << ")";
        throw HorizonError(os.str(), tg.x(j), tg.t_hi(), 0.0);
      }
      auto& st = p.stencil[j];
      auto& w = p.weight[j];
      st.resize(static_cast<std::size_t>(4 * total_steps));
      w.resize(static_cast<std::size_t>(4 * total_steps));
      for (Index i = 0; i < total_steps; ++i) {
        for (int q = 0; q < 4; ++q) {
          const double xs = path.stages[i][q];
          st[4 * i + q] = LagrangeStencil::make(xs, ag.x_lo(), ag.hx(), ag.nx(), p.points);
          w[4 * i + q] = std::sqrt(ax.sx(xs));
        }
      }
      p.amp[j] = 1.0 / std::sqrt(ax.sx(tg.x(j)));
    }
  }

  // Source Lap a_{k-1}, moved onto a time axis refined so every RK4 stage
  // time is a node. Columns are spatial slices of the previous grid.
  const Eigen::ArrayXd lap = laplacian(a_prev, options.difference_accuracy);
  const FieldMap src = as_matrix(pg, lap);
  const int refine = 2 * spc;
  const Index nr = (nt - 1) * refine + 1;
  Eigen::ArrayXXd src_ref(pg.spatial_size(), nr);
  for (Index r = 0; r < nr; ++r) {
    const auto st = LagrangeStencil::make(static_cast<double>(r) / refine, 0.0, 1.0, nt, pt);
    src_ref.col(r) = st.w[0] * src.col(st.start);
    for (int k = 1; k < pt; ++k) src_ref.col(r) += st.w[k] * src.col(st.start + k);
  }

  const Index p1 = pg.dims() > 1 ? pg.stride(1) : 0;
  const Index p2 = pg.dims() > 2 ? pg.stride(2) : 0;
  const double two_m = 2.0 * phase.mass();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(grid.size());

  parallel_for(0, grid.spatial_size(), [&](long s) {
    const auto idx = grid.unflatten(s);
    const std::vector<LagrangeStencil>* st[kMaxDims] = {};
    const std::vector<double>* gw[kMaxDims] = {};
    double amp = 1.0;
    for (int a = 0; a < d; ++a) {
      st[a] = &paths[a].stencil[idx[a]];
      gw[a] = &paths[a].weight[idx[a]];
      amp *= paths[a].amp[idx[a]];
    }
    const int q0 = paths[0].points;
    const int q1 = d > 1 ? paths[1].points : 1;
    const int q2 = d > 2 ? paths[2].points : 1;

    auto interp = [&](const double* col, Index e) {
      const auto& s0 = (*st[0])[e];
      if (d == 1) {
        double v = 0.0;
        for (int k = 0; k < q0; ++k) v += s0.w[k] * col[s0.start + k];
        return v;
      }
      const auto& s1 = (*st[1])[e];
      double v = 0.0;
      for (int k2 = 0; k2 < q2; ++k2) {
        const double w2 = d > 2 ? (*st[2])[e].w[k2] : 1.0;
        const Index off2 = d > 2 ? ((*st[2])[e].start + k2) * p2 : 0;
        double v1 = 0.0;
        for (int k1 = 0; k1 < q1; ++k1) {
          const double* row = col + off2 + (s1.start + k1) * p1 + s0.start;
          double v0 = 0.0;
          for (int k = 0; k < q0; ++k) v0 += s0.w[k] * row[k];
          v1 += s1.w[k1] * v0;
        }
        v += w2 * v1;
      }
      return v;
    };

    static constexpr std::array<int, 4> kLag{0, 1, 1, 2};
    static constexpr std::array<double, 4> kRk{1.0, 2.0, 2.0, 1.0};
    for (Index n = 1; n < nt; ++n) {
      double sum = 0.0;
      const Index base = refine * n;
      for (Index i = 0; i < spc * n; ++i) {
        double stage_sum = 0.0;
        for (int q = 0; q < 4; ++q) {
          const Index e = 4 * i + q;
          double g = (*gw[0])[e];
          for (int a = 1; a < d; ++a) g *= (*gw[a])[e];
          stage_sum += kRk[q] * g * interp(&src_ref(0, base - 2 * i - kLag[q]), e);
        }
        sum += step / 6.0 * stage_sum;
      }
      out(s + n * grid.spatial_size()) = amp * sum / two_m;
    }
  });

  if (!out.allFinite()) {
    std::ostringstream os;
    os << "non-finite source while solving a_" << a_prev.order() + 1;
    throw NumericError(os.str());
  }
  return {a_prev.order() + 1, grid, std::move(out)};
}

std::vector<AmplitudeFieldD> solve_hierarchy_d(const SeparablePhaseD& phase,
                                               const std::vector<InitialProfile>& profiles,
                                               const GridD& grid, int order,
                                               const TransportOptions& options) {
  if (order < 0 || order > kMaxOrderMultiD) {
    std::ostringstream os;
    os << "order N = " << order << " outside 0..N <= " << kMaxOrderMultiD
       << " for multi-dimensional runs";
    throw ConfigError({os.str()});
  }
  if (phase.dims() != grid.dims()) throw ShapeError("phase and grid dimension differ");

  std::vector<std::vector<SpaceTimeGrid>> per_axis;
  for (int a = 0; a < grid.dims(); ++a) {
    auto g = hierarchy_support(phase.axis(a), grid.axis(a), order, options);
    if (g.empty()) {
      const double t = max_admissible_t_hi(phase.axis(a), grid.axis(a), order, options);
      std::ostringstream os;
      os << axis_label(a) << "domain of dependence of the hierarchy leaves the allowed region"
         << "; largest admissible t_hi is about " << t;
      throw HorizonError(os.str(), grid.axis(a).x_lo(), grid.t_hi(), t);
    }
    per_axis.push_back(std::move(g));
  }
  auto level = [&](int k) {
    std::vector<SpaceTimeGrid> axes;
    for (const auto& g : per_axis) axes.push_back(g[k]);
    return GridD(std::move(axes));
  };

  std::vector<AmplitudeFieldD> out;
  AmplitudeFieldD current = solve_a0_d(phase, profiles, level(0));
  out.push_back(current.restrict_to(grid));
  for (int k = 1; k <= order; ++k) {
    current = solve_ak_d(phase, current, level(k), options);
    out.push_back(current.restrict_to(grid));
  }
  return out;
}

std::vector<Eigen::ArrayXd> transport_residual_fields_d(
    const SeparablePhaseD& phase, const std::vector<AmplitudeFieldD>& fields, int accuracy) {
  std::vector<Eigen::ArrayXd> out;
  if (fields.empty()) return out;
  const GridD& g = fields.front().grid();
  for (const auto& f : fields) {
    if (!(f.grid() == g)) throw ShapeError("transport fields must share one grid");
  }
  const PhaseSamples ps = sample_phase(phase, g);
  const double two_m = 2.0 * phase.mass();
  Eigen::ArrayXd prev_lap = Eigen::ArrayXd::Zero(g.size());
  for (const auto& f : fields) {
    Eigen::ArrayXd r(g.size());
    Eigen::Map<Eigen::ArrayXXd> rm(r.data(), g.spatial_size(), g.nt());
    rm = as_matrix(g, f.values()).colwise() * ps.lap;
    for (int a = 0; a < g.dims(); ++a) {
      const Eigen::ArrayXd da = derivative(g, f.values(), a, 1, accuracy);
      rm += 2.0 * (as_matrix(g, da).colwise() * ps.grad[a]);
    }
    r += two_m * derivative(g, f.values(), g.dims(), 1, accuracy) - prev_lap;
    out.push_back(std::move(r));
    prev_lap = laplacian(f, accuracy);
  }
  return out;
}

std::vector<double> transport_residual_d(const SeparablePhaseD& phase,
                                         const std::vector<AmplitudeFieldD>& fields,
                                         int accuracy) {
  std::vector<double> out;
  if (fields.empty()) return out;
  const GridD& g = fields.front().grid();
  for (const auto& r : transport_residual_fields_d(phase, fields, accuracy)) {
    double worst = 0.0;
    for_interior(g, 1, 1, [&](Index i) { worst = std::max(worst, std::abs(r(i))); });
    out.push_back(worst);
  }
  return out;
}

double continuity_residual_d(const SeparablePhaseD& phase, const AmplitudeFieldD& a0) {
  const GridD& g = a0.grid();
  const PhaseSamples ps = sample_phase(phase, g);
  const Eigen::ArrayXd density = a0.values().square();
  Eigen::ArrayXd r = derivative(g, density, g.dims(), 1, 2);
  for (int a = 0; a < g.dims(); ++a) {
    Eigen::ArrayXd flux(g.size());
    Eigen::Map<Eigen::ArrayXXd>(flux.data(), g.spatial_size(), g.nt()) =
        as_matrix(g, density).colwise() * ps.grad[a];
    r += derivative(g, flux, a, 1, 2) / phase.mass();
  }
  double worst = 0.0;
  for_interior(g, 1, 1, [&](Index i) { worst = std::max(worst, std::abs(r(i))); });
  return worst;
}

SeriesWavefunctionD::SeriesWavefunctionD(SeparablePhaseD phase_,
                                         std::vector<AmplitudeFieldD> amps_, double hbar_)
    : phase(std::move(phase_)), amps(std::move(amps_)), hbar(hbar_) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ConfigError({"hbar must be > 0"});
  if (amps.empty()) throw ShapeError("series needs at least a_0");
  for (std::size_t k = 0; k < amps.size(); ++k) {
    if (!(amps[k].grid() == amps.front().grid()))
      throw ShapeError("amplitude fields live on different grids");
    if (amps[k].order() != static_cast<int>(k))
      throw ShapeError("amplitude fields must be ordered a_0 ... a_N");
  }
  if (phase.dims() != grid().dims()) throw ShapeError("phase and grid dimension differ");
}

Eigen::ArrayXcd SeriesWavefunctionD::carrier() const {
  const GridD& g = grid();
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(g.spatial_size());
  for (int a = 0; a < g.dims(); ++a) {
    const PhaseField& ax = phase.axis(a);
    const SpaceTimeGrid& ga = g.axis(a);
    Eigen::ArrayXd wa;
    if (ga == ax.grid()) {
      wa = ax.w_grid();
    } else {
      wa.resize(ga.nx());
      for (Index i = 0; i < ga.nx(); ++i) wa(i) = ax.w(ga.x(i));
    }
    for (Index s = 0; s < g.spatial_size(); ++s) w(s) += wa((s / g.stride(a)) % ga.nx());
  }
  Eigen::ArrayXcd c(g.size());
  for (Index n = 0; n < g.nt(); ++n) {
    const double bt = phase.beta() * g.t(n);
    for (Index s = 0; s < g.spatial_size(); ++s)
      c(s + n * g.spatial_size()) = std::exp(kI * ((w(s) - bt) / hbar));
  }
  return c;
}

Eigen::ArrayXcd SeriesWavefunctionD::values() const {
  Eigen::ArrayXcd e = amps[0].values().cast<cd>();
  for (std::size_t k = 1; k < amps.size(); ++k)
    e += ipow(hbar, static_cast<int>(k)) * amps[k].values().cast<cd>();
  return e * carrier();
}

Eigen::ArrayXcd apply_L_algebraic_d(const SeriesWavefunctionD& psi, int accuracy) {
  const double hj = hj_residual_d(psi.phase);
  if (hj > 1e-10) {
    std::ostringstream os;
    os << "phase does not satisfy the Hamilton-Jacobi equation (residual " << hj
       << " > 1e-10); the algebraic expansion does not apply";
    throw ConsistencyError(os.str());
  }
  const auto transport = transport_residual_fields_d(psi.phase, psi.amps, accuracy);
  const double inv_2m = 1.0 / (2.0 * psi.phase.mass());
  const int order = psi.order();
  Eigen::ArrayXcd bracket = (kI * psi.hbar * inv_2m) * transport[0].cast<cd>();
  for (int k = 1; k <= order; ++k)
    bracket += (ipow(psi.hbar, k + 1) * inv_2m) * transport[k].cast<cd>();
  bracket -= (ipow(psi.hbar, order + 2) * inv_2m) * laplacian(psi.amps.back(), accuracy).cast<cd>();
  return bracket * psi.carrier();
}

Eigen::ArrayXcd predicted_remainder_d(const SeriesWavefunctionD& psi, int accuracy) {
  const double inv_2m = 1.0 / (2.0 * psi.phase.mass());
  return (-ipow(psi.hbar, psi.order() + 2) * inv_2m) *
         laplacian(psi.amps.back(), accuracy).cast<cd>() * psi.carrier();
}

FieldNorms interior_norms_d(const GridD& grid, const Eigen::ArrayXcd& f) {
  double worst = 0.0;
  double sq = 0.0;
  Index count = 0;
  for_interior(grid, 2, 1, [&](Index i) {
    const double m = std::abs(f(i));
    worst = std::max(worst, m);
    sq += m * m;
    ++count;
  });
  return {worst, count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0};
}

double remainder_identity_d(const SeriesWavefunctionD& psi, int accuracy) {
  const Eigen::ArrayXcd l = apply_L_algebraic_d(psi, accuracy);
  const Eigen::ArrayXcd r = predicted_remainder_d(psi, accuracy);
  const double diff = interior_norms_d(psi.grid(), l - r).max;
  const double ref = interior_norms_d(psi.grid(), r).max;
  return ref > 0.0 ? diff / ref : diff;
}

ResidualReport residual_order_sweep_d(const SeparablePhaseD& phase,
                                      const std::vector<AmplitudeFieldD>& fields,
                                      const std::vector<double>& hbars, double tol_identity,
                                      int accuracy) {
  validate_hbar_list(hbars);
  ResidualReport report;
  report.order = static_cast<int>(fields.size()) - 1;
  report.tol_identity = tol_identity;
  std::vector<double> log_h;
  std::vector<double> log_r;
  for (double hbar : hbars) {
    const SeriesWavefunctionD psi(phase, fields, hbar);
    const Eigen::ArrayXcd l = apply_L_algebraic_d(psi, accuracy);
    const Eigen::ArrayXcd r = predicted_remainder_d(psi, accuracy);
    ResidualEntry e;
    e.hbar = hbar;
    e.residual = interior_norms_d(psi.grid(), l);
    e.remainder = interior_norms_d(psi.grid(), r);
    const FieldNorms diff = interior_norms_d(psi.grid(), l - r);
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

}  // namespace wkbtd
