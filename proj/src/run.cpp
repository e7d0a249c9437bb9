#include "wkbtd/run.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "wkbtd/berry.hpp"
#include "wkbtd/multidim.hpp"
#include "wkbtd/series.hpp"

namespace wkbtd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kHjGate = 1e-10;
constexpr double kSeparabilityGate = 1e-8;
constexpr double kGaugeGate = 1e-12;
constexpr double kBerryGate = 1e-3;

std::string kind_of(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->kind();
  return "internal";
}

std::string join_lines(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

class Gates {
 public:
  void check(bool ok, const std::string& what) {
    lines_.push_back((ok ? "PASS " : "FAIL ") + what);
    if (!ok) failures_.push_back(what);
  }
  const std::vector<std::string>& lines() const { return lines_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> lines_;
  std::vector<std::string> failures_;
};

std::string describe(const char* name, double value, const char* op, double limit) {
  std::ostringstream os;
  os << name << " = " << value << ' ' << op << ' ' << limit;
  return os.str();
}

// --- CSV -------------------------------------------------------------------

void append_row(std::string& s, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) s += ',';
    s += format_double(v);
    first = false;
  }
  s += '\n';
}

std::string field_csv(const AmplitudeField& f) {
  const auto& g = f.grid();
  std::string s = "x,t,value\n";
  s.reserve(static_cast<std::size_t>(g.nx() * g.nt() * 60));
  for (Index n = 0; n < g.nt(); ++n)
    for (Index i = 0; i < g.nx(); ++i) append_row(s, {g.x(i), g.t(n), f(i, n)});
  return s;
}

std::string spatial_header(int dims) {
  static const char* names[] = {"x", "x2", "x3"};
  std::string h;
  for (int a = 0; a < dims; ++a) h += std::string(names[a]) + ",";
  return h;
}

std::string field_csv_d(const AmplitudeFieldD& f) {
  const GridD& g = f.grid();
  std::string s = spatial_header(g.dims()) + "t,value\n";
  s.reserve(static_cast<std::size_t>(g.size() * 80));
  for (Index n = 0; n < g.nt(); ++n) {
    for (Index p = 0; p < g.spatial_size(); ++p) {
      const auto idx = g.unflatten(p);
      for (int a = 0; a < g.dims(); ++a) {
        s += format_double(g.axis(a).x(idx[a]));
        s += ',';
      }
      append_row(s, {g.t(n), f.values()(p + n * g.spatial_size())});
    }
  }
  return s;
}

std::string loop_csv(const StateLoop& loop) {
  std::string s;
  for (Index c = 0; c < loop.dimension(); ++c) {
    if (c > 0) s += ',';
    s += "re" + std::to_string(c) + ",im" + std::to_string(c);
  }
  s += '\n';
  for (Index j = 0; j < loop.size(); ++j) {
    for (Index c = 0; c < loop.dimension(); ++c) {
      if (c > 0) s += ',';
      s += format_double(loop[j](c).real()) + ',' + format_double(loop[j](c).imag());
    }
    s += '\n';
  }
  return s;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ShapeError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ShapeError(path.string() + " is empty");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw ShapeError(path.string() + ": malformed number in row");
      row.push_back(v);
      if (next == end) break;
      if (*next != ',') throw ShapeError(path.string() + ": malformed row");
      p = next + 1;
    }
    if (row.size() != t.header.size())
      throw ShapeError(path.string() + ": row width does not match the header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)); }

AmplitudeField read_field(const fs::path& path, const SpaceTimeGrid& g, int order) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"x", "t", "value"})
    throw ShapeError(path.string() + ": expected columns x,t,value");
  if (static_cast<Index>(t.rows.size()) != g.nx() * g.nt())
    throw ShapeError(path.string() + ": row count does not match the grid");
  Eigen::ArrayXXd v(g.nx(), g.nt());
  std::size_t r = 0;
  for (Index n = 0; n < g.nt(); ++n) {
    for (Index i = 0; i < g.nx(); ++i, ++r) {
      const auto& row = t.rows[r];
      if (!close_to(row[0], g.x(i)) || !close_to(row[1], g.t(n)))
        throw ShapeError(path.string() + ": node coordinates do not match the grid");
      v(i, n) = row[2];
    }
  }
  return {order, g, std::move(v)};
}

AmplitudeFieldD read_field_d(const fs::path& path, const GridD& g, int order) {
  const CsvTable t = read_csv(path);
  const auto d = static_cast<std::size_t>(g.dims());
  if (t.header.size() != d + 2 || t.header.back() != "value")
    throw ShapeError(path.string() + ": unexpected columns");
  if (static_cast<Index>(t.rows.size()) != g.size())
    throw ShapeError(path.string() + ": row count does not match the grid");
  Eigen::ArrayXd v(g.size());
  for (Index r = 0; r < g.size(); ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    const Index p = r % g.spatial_size();
    const auto idx = g.unflatten(p);
    for (int a = 0; a < g.dims(); ++a) {
      if (!close_to(row[a], g.axis(a).x(idx[a])))
        throw ShapeError(path.string() + ": node coordinates do not match the grid");
    }
    if (!close_to(row[d], g.t(r / g.spatial_size())))
      throw ShapeError(path.string() + ": node coordinates do not match the grid");
    v(r) = row[d + 1];
  }
  return {order, g, std::move(v)};
}

StateLoop read_loop(const fs::path& path) { return load_state_loop(path); }

std::string field_name(int k) { return "a" + std::to_string(k) + ".csv"; }

// --- report blocks (shared by run and check) ---------------------------------

json phase_block(const std::vector<double>& x, const std::vector<double>& sx,
                 const RunConfig& c, const PhaseField* phase, Gates& gates) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = -c.beta + sx[i] * sx[i] / (2.0 * c.mass) + eval_potential(c.potential, x[i]);
    worst = std::max(worst, std::abs(r));
  }
  gates.check(worst <= kHjGate, describe("Hamilton-Jacobi residual", worst, "<=", kHjGate));
  json j = {{"hj_residual", worst}};
  if (phase) {
    j["domain"] = {phase->domain().lo, phase->domain().hi};
    j["anchor"] = phase->anchor();
  }
  return j;
}

double interior_max(const Eigen::ArrayXXd& a) {
  return a.block(1, 1, a.rows() - 2, a.cols() - 2).abs().maxCoeff();
}

json transport_block(const PhaseField& phase, const std::vector<AmplitudeField>& fields,
                     const RunConfig& c, Gates& gates) {
  const auto fine = transport_residual(phase, fields, kAlgebraicAccuracy);
  const auto centered = transport_residual(phase, fields, 2);
  json orders = json::array();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    double scale = 0.0;
    if (k > 0) scale = interior_max(differentiate(fields[k - 1], kAlgebraicAccuracy).dxx);
    const double limit = 10.0 * c.tol.ode * std::max(1.0, scale);
    gates.check(fine[k] <= limit,
                describe(("transport residual a" + std::to_string(k)).c_str(), fine[k], "<=", limit));
    orders.push_back({{"order", k},
                      {"residual", fine[k]},
                      {"residual_centered", centered[k]},
                      {"source_scale", scale},
                      {"limit", limit}});
  }
  const auto& g = fields.front().grid();
  const double cont = continuity_residual(phase, fields.front());
  const double h2 = g.hx() * g.hx() + g.ht() * g.ht();
  return {{"orders", orders},
          {"continuity", {{"residual", cont}, {"h2", h2}, {"constant", cont / h2}}}};
}

json entry_json(const ResidualEntry& e) {
  return {{"hbar", e.hbar},
          {"residual", {{"max", e.residual.max}, {"rms", e.residual.rms}}},
          {"remainder", {{"max", e.remainder.max}, {"rms", e.remainder.rms}}},
          {"identity_error", e.identity_error},
          {"identity_error_rms", e.identity_error_rms}};
}

json report_json(const ResidualReport& r, Gates& gates) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back(entry_json(e));
    std::ostringstream os;
    os << "remainder identity at hbar = " << e.hbar;
    gates.check(e.identity_error <= r.tol_identity,
                describe(os.str().c_str(), e.identity_error, "<=", r.tol_identity));
  }
  json slope = r.slope;
  if (r.vanishing) {
    slope = nullptr;
    gates.check(true, "L Psi vanishes identically; no slope to fit");
  } else {
    gates.check(std::isfinite(r.slope), "order slope is finite");
  }
  return {{"order", r.order},
          {"entries", entries},
          {"vanishing", r.vanishing},
          {"slope", slope},
          {"intercept", r.intercept},
          {"fit_residual", r.fit_residual},
          {"expected_slope", r.order + 2},
          {"tol_identity", r.tol_identity}};
}

json sweep_block(const PhaseField& phase, const std::vector<AmplitudeField>& fields,
                 const RunConfig& c, Gates& gates) {
  const ResidualReport r =
      residual_order_sweep(phase, c.potential, fields, c.hbars, c.tol.identity);
  json j = report_json(r, gates);
  json direct = json::array();
  for (double hbar : c.hbars) {
    const SeriesWavefunction psi(phase, fields, hbar);
    try {
      const FieldNorms n = interior_norms(apply_L_direct(psi, c.potential));
      direct.push_back({{"hbar", hbar}, {"max", n.max}, {"rms", n.rms}});
    } catch (const ResolutionError& e) {
      direct.push_back({{"hbar", hbar}, {"skipped", e.what()}});
    }
  }
  j["direct"] = direct;
  return j;
}

GridD grid_d(const RunConfig& c) {
  std::vector<SpaceTimeGrid> axes;
  for (const auto& a : c.axes) axes.emplace_back(a.x_lo, a.x_hi, a.nx, c.grid.t_hi, c.grid.nt);
  return GridD(std::move(axes));
}

SeparablePhaseD phase_d(const RunConfig& c, const GridD& g) {
  std::vector<PotentialSpec> specs;
  std::vector<double> betas;
  std::vector<std::optional<double>> anchors;
  for (const auto& a : c.axes) {
    specs.push_back(a.potential);
    betas.push_back(a.beta);
    anchors.push_back(a.anchor);
  }
  return build_phase_d(specs, c.mass, betas, g, c.margin, anchors);
}

std::vector<InitialProfile> profiles_d(const RunConfig& c) {
  std::vector<InitialProfile> p;
  for (const auto& a : c.axes) p.push_back(a.profile);
  return p;
}

template <typename F>
double max_over_interior_d(const GridD& g, F&& value) {
  double worst = 0.0;
  for (Index n = 1; n < g.nt() - 1; ++n) {
    for (Index p = 0; p < g.spatial_size(); ++p) {
      const auto idx = g.unflatten(p);
      bool inside = true;
      for (int a = 0; a < g.dims(); ++a)
        inside = inside && idx[a] > 0 && idx[a] < g.axis(a).nx() - 1;
      if (inside) worst = std::max(worst, std::abs(value(p + n * g.spatial_size())));
    }
  }
  return worst;
}

json multidim_block(const SeparablePhaseD& phase, const std::vector<AmplitudeFieldD>& fields,
                    const RunConfig& c, Gates& gates) {
  const GridD& g = fields.front().grid();
  const double hj = hj_residual_d(phase);
  gates.check(hj <= kHjGate, describe("Hamilton-Jacobi residual", hj, "<=", kHjGate));

  const auto fine = transport_residual_d(phase, fields, kAlgebraicAccuracy);
  json orders = json::array();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    double scale = 0.0;
    if (k > 0) {
      const Eigen::ArrayXd lap = laplacian(fields[k - 1], kAlgebraicAccuracy);
      scale = max_over_interior_d(g, [&](Index i) { return lap(i); });
    }
    const double limit = 10.0 * c.tol.ode * std::max(1.0, scale);
    gates.check(fine[k] <= limit,
                describe(("transport residual a" + std::to_string(k)).c_str(), fine[k], "<=", limit));
    orders.push_back({{"order", k}, {"residual", fine[k]}, {"source_scale", scale}, {"limit", limit}});
  }

  // a0 against the product of the 1-D solutions
  const auto profiles = profiles_d(c);
  std::vector<Eigen::ArrayXXd> factors;
  for (int a = 0; a < g.dims(); ++a)
    factors.push_back(solve_a0(phase.axis(a), profiles[a], g.axis(a)).values());
  double sep = 0.0;
  for (Index n = 0; n < g.nt(); ++n) {
    for (Index p = 0; p < g.spatial_size(); ++p) {
      const auto idx = g.unflatten(p);
      double prod = factors[0](idx[0], n);
      for (int a = 1; a < g.dims(); ++a) prod *= factors[a](idx[a], n);
      sep = std::max(sep, std::abs(fields[0].values()(p + n * g.spatial_size()) - prod));
    }
  }
  gates.check(sep <= kSeparabilityGate, describe("product separability", sep, "<=", kSeparabilityGate));

  const double cont = continuity_residual_d(phase, fields.front());
  double h2 = g.ht() * g.ht();
  for (int a = 0; a < g.dims(); ++a) h2 += g.axis(a).hx() * g.axis(a).hx();

  const ResidualReport r = residual_order_sweep_d(phase, fields, c.hbars, c.tol.identity);
  return {{"dims", g.dims()},
          {"hj_residual", hj},
          {"orders", orders},
          {"separability", sep},
          {"continuity", {{"residual", cont}, {"h2", h2}, {"constant", cont / h2}}},
          {"sweep", report_json(r, gates)}};
}

json berry_block(const StateLoop& loop, const RunConfig& c, Gates& gates) {
  const double gamma = discrete_berry_phase(loop);
  const double reversed = discrete_berry_phase(loop.reversed());

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::vector<Eigen::VectorXcd> regauged;
  for (const auto& s : loop.states()) regauged.push_back(s * std::polar(1.0, angle(rng)));
  const double gauge = std::abs(wrap_angle(discrete_berry_phase(StateLoop(regauged)) - gamma));
  gates.check(gauge <= kGaugeGate, describe("gauge deviation", gauge, "<=", kGaugeGate));

  json j = {{"gamma", gamma},
            {"states", loop.size()},
            {"dimension", loop.dimension()},
            {"min_overlap", loop.min_overlap()},
            {"reversed_gamma", reversed},
            {"reversal_deviation", std::abs(wrap_angle(gamma + reversed))},
            {"gauge_deviation", gauge}};
  if (!c.berry.loop_file) {
    // ground state of v . sigma, azimuth increasing
    const double reference = wrap_angle(std::numbers::pi * (1.0 - std::cos(c.berry.theta)));
    const double dev = std::abs(wrap_angle(gamma - reference));
    gates.check(dev <= kBerryGate, describe("deviation from the two-level reference", dev, "<=", kBerryGate));
    j["theta"] = c.berry.theta;
    j["reference"] = reference;
    j["deviation"] = dev;
  }
  return j;
}

std::string versions_note() {
  std::ostringstream os;
  os << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ResolutionError*>(&e))
    return kExitConfig;
  if (dynamic_cast<const ToleranceFailure*>(&e)) return kExitTolerance;
  if (dynamic_cast<const DomainError*>(&e)) return kExitDomain;
  return kExitOther;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

json RunManifest::to_json() const {
  json stage_list = json::array();
  for (const auto& s : stages) {
    json j = {{"stage", s.stage}, {"status", s.status}};
    if (!s.message.empty()) j["message"] = s.message;
    stage_list.push_back(j);
  }
  json j = {{"config", config},
            {"files", files},
            {"versions",
             {{"wkbtd", kVersion},
              {"eigen", versions_note()},
              {"boost", BOOST_LIB_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}}},
            {"wall_clock_seconds", wall_seconds},
            {"stages", stage_list},
            {"status", exit_code == kExitOk ? "ok" : "failed"},
            {"exit_code", exit_code}};
  if (exit_code != kExitOk) j["failure"] = {{"kind", failure_kind}, {"message", failure_message}};
  return j;
}

RunManifest run(const RunConfig& c, const fs::path& out_dir, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.config = to_json(c);
  std::string stage = "setup";
  auto log = [&](const std::string& s) {
    if (options.verbose && options.log) *options.log << s << std::endl;
  };
  auto enter = [&](const std::string& s) {
    stage = s;
    log("[" + s + "]");
  };
  auto done = [&] { m.stages.push_back({stage, "ok", ""}); };
  auto write = [&](const std::string& name, const std::string& content) {
    write_file_atomic(out_dir / name, content);
    m.files.push_back(name);
  };

  Gates gates;
  json report = {{"kind", to_string(c.kind)}};
  try {
    fs::create_directories(out_dir);
    switch (c.kind) {
      case RunKind::Phase:
      case RunKind::Transport:
      case RunKind::Sweep: {
        enter("phase");
        const SpaceTimeGrid grid = c.grid.grid();
        const PhaseField phase = build_phase(c.potential, c.mass, c.beta, grid, c.anchor, c.margin);
        std::vector<double> xs;
        std::vector<double> sxs;
        std::string csv = "x,W,S_x,S_xx,V\n";
        for (Index i = 0; i < grid.nx(); ++i) {
          const double x = grid.x(i);
          xs.push_back(x);
          sxs.push_back(phase.sx(x));
          append_row(csv, {x, phase.w_grid()(i), phase.sx(x), phase.sxx(x),
                           eval_potential(c.potential, x)});
        }
        report["phase"] = phase_block(xs, sxs, c, &phase, gates);
        write("phase.csv", csv);
        done();
        if (c.kind == RunKind::Phase) break;

        enter("transport");
        const auto fields = solve_hierarchy(phase, c.profile, grid, c.order, c.transport);
        for (const auto& f : fields) write(field_name(f.order()), field_csv(f));
        report["transport"] = transport_block(phase, fields, c, gates);
        done();
        if (c.kind == RunKind::Transport) break;

        enter("sweep");
        report["sweep"] = sweep_block(phase, fields, c, gates);
        for (std::size_t h = 0; h < c.hbars.size(); ++h) {
          const SeriesWavefunction psi(phase, fields, c.hbars[h]);
          const ComplexField v = psi.values();
          std::string s = "x,t,re,im\n";
          const Index n = grid.nt() - 1;
          for (Index i = 0; i < grid.nx(); ++i)
            append_row(s, {grid.x(i), grid.t(n), v(i, n).real(), v(i, n).imag()});
          write("psi_final_" + std::to_string(h) + ".csv", s);
        }
        done();
        break;
      }
      case RunKind::Multidim: {
        enter("phase");
        const GridD grid = grid_d(c);
        const SeparablePhaseD phase = phase_d(c, grid);
        done();
        enter("transport");
        const auto fields = solve_hierarchy_d(phase, profiles_d(c), grid, c.order, c.transport);
        for (const auto& f : fields) write(field_name(f.order()), field_csv_d(f));
        done();
        enter("verify");
        report["multidim"] = multidim_block(phase, fields, c, gates);
        done();
        break;
      }
      case RunKind::Berry: {
        enter("berry");
        const StateLoop loop = c.berry.loop_file ? load_state_loop(*c.berry.loop_file)
                                                 : sample_two_level_loop(c.berry.theta, c.berry.count);
        write("loop.csv", loop_csv(loop));
        report["berry"] = berry_block(loop, c, gates);
        done();
        break;
      }
    }
    enter("report");
    report["checks"] = gates.lines();
    report["passed"] = gates.failures().empty();
    write("report.json", report.dump(2) + "\n");
    done();
    for (const auto& line : gates.lines()) log(line);
    if (!gates.failures().empty()) {
      m.exit_code = kExitTolerance;
      m.failure_kind = "tolerance";
      m.failure_message = join_lines(gates.failures(), "; ");
    }
  } catch (const std::exception& e) {
    m.stages.push_back({stage, "failed", e.what()});
    m.exit_code = exit_code_for(e);
    m.failure_kind = kind_of(e);
    m.failure_message = e.what();
    log(std::string("failed in stage ") + stage + ": " + e.what());
  }
  m.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_file_atomic(out_dir / "manifest.json", m.to_json().dump(2) + "\n");
  } catch (const std::exception& e) {
    if (m.exit_code == kExitOk) {
      m.exit_code = kExitOther;
      m.failure_kind = "io";
      m.failure_message = e.what();
    }
  }
  return m;
}

void write_config_failure(const fs::path& out_dir, const ConfigError& e) {
  RunManifest m;
  m.config = nullptr;
  m.stages.push_back({"config", "failed", e.what()});
  m.exit_code = kExitConfig;
  m.failure_kind = e.kind();
  m.failure_message = e.what();
  fs::create_directories(out_dir);
  json j = m.to_json();
  j["failure"]["items"] = e.items();
  write_file_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
}

CheckResult check_run(const fs::path& out_dir, const RunOptions& options) {
  CheckResult result;
  auto fail = [&](int code, const std::string& line) {
    result.lines.push_back("FAIL " + line);
    if (result.exit_code == kExitOk) result.exit_code = code;
  };

  json manifest;
  {
    std::ifstream in(out_dir / "manifest.json");
    if (!in) {
      fail(kExitOther, "no manifest.json in " + out_dir.string());
      return result;
    }
    try {
      manifest = json::parse(in);
    } catch (const json::exception& e) {
      fail(kExitOther, std::string("manifest.json is malformed: ") + e.what());
      return result;
    }
  }
  if (manifest.value("exit_code", kExitOther) != kExitOk) {
    fail(manifest.value("exit_code", kExitOther), "the run itself did not succeed");
    return result;
  }
  for (const auto& name : manifest.at("files")) {
    const fs::path p = out_dir / name.get<std::string>();
    std::error_code ec;
    const auto size = fs::file_size(p, ec);
    if (ec || size == 0) {
      fail(kExitOther, "listed file missing or empty: " + p.string());
    } else {
      result.lines.push_back("PASS file present: " + name.get<std::string>());
    }
  }
  if (result.exit_code != kExitOk) return result;

  try {
    const RunConfig c = parse_config(manifest.at("config"));
    if (options.verbose && options.log) *options.log << "[check " << to_string(c.kind) << "]\n";
    Gates gates;
    json report = {{"kind", to_string(c.kind)}};
    switch (c.kind) {
      case RunKind::Phase:
      case RunKind::Transport:
      case RunKind::Sweep: {
        const CsvTable t = read_csv(out_dir / "phase.csv");
        std::vector<double> xs;
        std::vector<double> sxs;
        for (const auto& row : t.rows) {
          xs.push_back(row.at(0));
          sxs.push_back(row.at(2));
        }
        const SpaceTimeGrid grid = c.grid.grid();
        // analytic S_x, S_xx and W are cheap to rebuild; the amplitudes come from disk
        const PhaseField phase = build_phase(c.potential, c.mass, c.beta, grid, c.anchor, c.margin);
        report["phase"] = phase_block(xs, sxs, c, &phase, gates);
        if (c.kind == RunKind::Phase) break;
        std::vector<AmplitudeField> fields;
        for (int k = 0; k <= c.order; ++k) fields.push_back(read_field(out_dir / field_name(k), grid, k));
        report["transport"] = transport_block(phase, fields, c, gates);
        if (c.kind == RunKind::Sweep) report["sweep"] = sweep_block(phase, fields, c, gates);
        break;
      }
      case RunKind::Multidim: {
        const GridD grid = grid_d(c);
        const SeparablePhaseD phase = phase_d(c, grid);
        std::vector<AmplitudeFieldD> fields;
        for (int k = 0; k <= c.order; ++k)
          fields.push_back(read_field_d(out_dir / field_name(k), grid, k));
        report["multidim"] = multidim_block(phase, fields, c, gates);
        break;
      }
      case RunKind::Berry: {
        report["berry"] = berry_block(read_loop(out_dir / "loop.csv"), c, gates);
        break;
      }
    }
    report["checks"] = gates.lines();
    report["passed"] = gates.failures().empty();
    for (const auto& line : gates.lines()) result.lines.push_back(line);
    if (!gates.failures().empty()) result.exit_code = kExitTolerance;

    std::ifstream in(out_dir / "report.json");
    const json stored = json::parse(in);
    if (stored == report) {
      result.lines.push_back("PASS recomputed report matches report.json");
    } else {
      fail(kExitTolerance, "recomputed report differs from report.json");
    }
    result.report = std::move(report);
  } catch (const std::exception& e) {
    fail(exit_code_for(e), std::string(kind_of(e)) + ": " + e.what());
  }
  return result;
}

}  // namespace wkbtd
