#include "wkbtd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "wkbtd/multidim.hpp"

namespace wkbtd {

using nlohmann::json;

std::string to_string(RunKind kind) {
  switch (kind) {
    case RunKind::Phase: return "phase";
    case RunKind::Transport: return "transport";
    case RunKind::Sweep: return "sweep";
    case RunKind::Multidim: return "multidim";
    case RunKind::Berry: return "berry";
  }
  return "unknown";
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back((path.empty() ? std::string("<root>") : path) + ": " + msg);
  }

  bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (!allowed.contains(key)) fail(join(path, key), "unknown key");
    }
    return true;
  }

  std::optional<double> number(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    const json& v = j[key];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(join(path, key), "expected a finite number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<long> integer(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    const json& v = j[key];
    if (!v.is_number_integer()) {
      fail(join(path, key), "expected an integer");
      return std::nullopt;
    }
    return v.get<long>();
  }

  std::optional<std::string> text(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) {
      fail(join(path, key), "expected a string");
      return std::nullopt;
    }
    return j[key].get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& j, const std::string& key,
                                             const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    const json& v = j[key];
    if (!v.is_array()) {
      fail(join(path, key), "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a finite number");
        return std::nullopt;
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void positive(const std::optional<double>& v, const std::string& path) {
    if (v && !(*v > 0.0)) fail(path, "must be > 0");
  }

  // Factory calls may throw their own itemized ConfigError.
  template <typename F>
  auto build(const std::string& path, F&& f) -> std::optional<decltype(f())> {
    try {
      return f();
    } catch (const ConfigError& e) {
      for (const auto& item : e.items()) fail(path, item);
    } catch (const Error& e) {
      fail(path, e.what());
    }
    return std::nullopt;
  }
};

std::optional<PotentialSpec> parse_potential(Reader& r, const json& j, const std::string& path) {
  if (!r.object(j, path, {"family", "params", "x", "v"})) return std::nullopt;
  const auto family = r.text(j, "family", path);
  if (!family) {
    if (!j.contains("family")) r.fail(join(path, "family"), "required");
    return std::nullopt;
  }
  const auto params = r.numbers(j, "params", path);
  if (*family == "free") {
    return PotentialSpec::free();
  } else if (*family == "harmonic") {
    double kappa = 1.0;
    if (params) {
      if (params->size() != 1) {
        r.fail(join(path, "params"), "harmonic takes one parameter [kappa]");
        return std::nullopt;
      }
      kappa = params->front();
    }
    return r.build(path, [&] { return PotentialSpec::harmonic(kappa); });
  } else if (*family == "polynomial") {
    if (!params) {
      r.fail(join(path, "params"), "polynomial needs ascending coefficients");
      return std::nullopt;
    }
    return r.build(path, [&] { return PotentialSpec::polynomial(*params); });
  } else if (*family == "tabulated") {
    const auto x = r.numbers(j, "x", path);
    const auto v = r.numbers(j, "v", path);
    if (!x || !v) {
      r.fail(path, "tabulated potential needs arrays x and v");
      return std::nullopt;
    }
    return r.build(path, [&] { return PotentialSpec::tabulated(*x, *v); });
  }
  r.fail(join(path, "family"), "unknown potential family '" + *family +
                                   "' (free, harmonic, polynomial, tabulated)");
  return std::nullopt;
}

std::optional<InitialProfile> parse_profile(Reader& r, const json& j, const std::string& path) {
  if (!r.object(j, path, {"family", "value", "center", "width", "u", "phi"}))
    return std::nullopt;
  const std::string family = r.text(j, "family", path).value_or("gaussian");
  if (family == "constant") {
    const double v = r.number(j, "value", path).value_or(1.0);
    return r.build(path, [&] { return InitialProfile::constant(v); });
  } else if (family == "gaussian") {
    const double c = r.number(j, "center", path).value_or(0.0);
    const auto w = r.number(j, "width", path);
    r.positive(w, join(path, "width"));
    return r.build(path, [&] { return InitialProfile::gaussian(c, w.value_or(1.0)); });
  } else if (family == "tabulated") {
    const auto u = r.numbers(j, "u", path);
    const auto phi = r.numbers(j, "phi", path);
    if (!u || !phi) {
      r.fail(path, "tabulated profile needs arrays u and phi");
      return std::nullopt;
    }
    return r.build(path, [&] { return InitialProfile::tabulated(*u, *phi); });
  }
  r.fail(join(path, "family"),
         "unknown profile family '" + family + "' (constant, gaussian, tabulated)");
  return std::nullopt;
}

void parse_time(Reader& r, const json& j, const std::string& path, GridConfig& g) {
  if (const auto t = r.number(j, "t_hi", path)) {
    if (!(*t > 0.0)) r.fail(join(path, "t_hi"), "must be > 0");
    g.t_hi = *t;
  } else if (!j.contains("t_hi")) {
    r.fail(join(path, "t_hi"), "required");
  }
  if (const auto n = r.integer(j, "nt", path)) {
    if (*n < 5) r.fail(join(path, "nt"), "must be >= 5");
    g.nt = *n;
  }
}

void parse_space(Reader& r, const json& j, const std::string& path, double& lo, double& hi,
                 Index& n) {
  const auto a = r.number(j, "x_lo", path);
  const auto b = r.number(j, "x_hi", path);
  if (!j.contains("x_lo")) r.fail(join(path, "x_lo"), "required");
  if (!j.contains("x_hi")) r.fail(join(path, "x_hi"), "required");
  if (a && b && !(*b > *a)) r.fail(path, "x_hi must exceed x_lo");
  lo = a.value_or(lo);
  hi = b.value_or(hi);
  if (const auto m = r.integer(j, "nx", path)) {
    if (*m < 5) r.fail(join(path, "nx"), "must be >= 5");
    n = *m;
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  Reader r;
  RunConfig c;
  if (!r.object(doc, "", {"kind", "potential", "mass", "beta", "anchor", "margin", "grid",
                          "profile", "order", "hbar", "tolerances", "transport", "axes",
                          "berry", "output"})) {
    throw ConfigError(std::move(r.errors));
  }

  const auto kind = r.text(doc, "kind", "");
  if (!kind) {
    if (!doc.contains("kind")) r.fail("kind", "required");
  } else if (*kind == "phase") {
    c.kind = RunKind::Phase;
  } else if (*kind == "transport") {
    c.kind = RunKind::Transport;
  } else if (*kind == "sweep") {
    c.kind = RunKind::Sweep;
  } else if (*kind == "multidim") {
    c.kind = RunKind::Multidim;
  } else if (*kind == "berry") {
    c.kind = RunKind::Berry;
  } else {
    r.fail("kind", "unknown run kind '" + *kind + "' (phase, transport, sweep, multidim, berry)");
  }
  const bool multi = c.kind == RunKind::Multidim;
  const bool one_d = !multi && c.kind != RunKind::Berry;

  if (const auto m = r.number(doc, "mass", "")) {
    r.positive(m, "mass");
    c.mass = *m;
  }
  if (const auto d = r.number(doc, "margin", "")) {
    r.positive(d, "margin");
    c.margin = *d;
  }
  if (const auto o = r.text(doc, "output", "")) c.output = *o;

  if (one_d) {
    if (doc.contains("potential")) {
      if (auto p = parse_potential(r, doc["potential"], "potential")) c.potential = *p;
    } else {
      r.fail("potential", "required");
    }
    if (const auto b = r.number(doc, "beta", "")) {
      c.beta = *b;
    } else if (doc.contains("beta") && doc["beta"].is_array()) {
      r.fail("beta", "per-axis beta lists belong to multidim runs");
    }
    if (doc.contains("anchor")) c.anchor = r.number(doc, "anchor", "");
    if (doc.contains("grid")) {
      const json& g = doc["grid"];
      if (r.object(g, "grid", {"x_lo", "x_hi", "nx", "t_hi", "nt"})) {
        parse_space(r, g, "grid", c.grid.x_lo, c.grid.x_hi, c.grid.nx);
        parse_time(r, g, "grid", c.grid);
      }
    } else {
      r.fail("grid", "required");
    }
    if (doc.contains("profile")) {
      if (auto p = parse_profile(r, doc["profile"], "profile")) c.profile = *p;
    }
    if (doc.contains("axes")) r.fail("axes", "only multidim runs take per-axis blocks");
  } else if (multi) {
    for (const char* key : {"potential", "profile", "anchor"}) {
      if (doc.contains(key))
        r.fail(key, "multidim runs take this per axis (axes[i]." + std::string(key) + ")");
    }
    if (doc.contains("grid")) {
      const json& g = doc["grid"];
      if (r.object(g, "grid", {"t_hi", "nt"})) parse_time(r, g, "grid", c.grid);
    } else {
      r.fail("grid", "required (t_hi, nt)");
    }
    std::optional<std::vector<double>> betas;
    if (doc.contains("beta")) betas = r.numbers(doc, "beta", "");
    if (!doc.contains("axes") || !doc["axes"].is_array() || doc["axes"].empty()) {
      r.fail("axes", "multidim runs need a non-empty array of axis blocks");
    } else {
      const json& axes = doc["axes"];
      if (axes.size() > static_cast<std::size_t>(3))
        r.fail("axes", "at most 3 axes are supported");
      for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::string path = "axes[" + std::to_string(i) + "]";
        const json& a = axes[i];
        if (!r.object(a, path,
                      {"potential", "beta", "x_lo", "x_hi", "nx", "profile", "anchor"}))
          continue;
        AxisConfig ax;
        if (a.contains("potential")) {
          if (auto p = parse_potential(r, a["potential"], join(path, "potential")))
            ax.potential = *p;
        } else {
          r.fail(join(path, "potential"), "required");
        }
        if (const auto b = r.number(a, "beta", path)) {
          ax.beta = *b;
        } else if (betas && i < betas->size()) {
          ax.beta = (*betas)[i];
        } else if (!a.contains("beta")) {
          r.fail(join(path, "beta"), "required (or a top-level beta list)");
        }
        parse_space(r, a, path, ax.x_lo, ax.x_hi, ax.nx);
        if (a.contains("profile")) {
          if (auto p = parse_profile(r, a["profile"], join(path, "profile"))) ax.profile = *p;
        }
        if (a.contains("anchor")) ax.anchor = r.number(a, "anchor", path);
        c.axes.push_back(std::move(ax));
      }
      if (betas && betas->size() != axes.size())
        r.fail("beta", "per-axis beta list must have one entry per axis");
    }
  } else {
    for (const char* key : {"potential", "grid", "profile", "axes", "anchor", "beta"}) {
      if (doc.contains(key)) r.fail(key, "not used by berry runs");
    }
  }

  if (const auto n = r.integer(doc, "order", "")) {
    const int limit = multi ? kMaxOrderMultiD : kMaxOrder1D;
    if (*n < 0 || *n > limit) {
      r.fail("order", "N = " + std::to_string(*n) + " violates 0 <= N <= " +
                          std::to_string(limit) + (multi ? " (multi-D)" : " (1-D)"));
    }
    c.order = static_cast<int>(*n);
  }

  if (doc.contains("hbar")) {
    if (const auto h = r.numbers(doc, "hbar", "")) {
      c.hbars = *h;
      if (h->size() < 3) r.fail("hbar", "needs at least 3 values");
      for (std::size_t i = 0; i < h->size(); ++i) {
        if (!((*h)[i] > 0.0)) r.fail("hbar[" + std::to_string(i) + "]", "must be > 0");
        if (i > 0 && !((*h)[i] < (*h)[i - 1]))
          r.fail("hbar[" + std::to_string(i) + "]", "hbar list must be strictly decreasing");
      }
    }
  }

  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (r.object(t, "tolerances", {"ode", "identity"})) {
      if (const auto v = r.number(t, "ode", "tolerances")) {
        r.positive(v, "tolerances.ode");
        c.tol.ode = *v;
      }
      if (const auto v = r.number(t, "identity", "tolerances")) {
        r.positive(v, "tolerances.identity");
        c.tol.identity = *v;
      }
    }
  }

  if (doc.contains("transport")) {
    const json& t = doc["transport"];
    if (r.object(t, "transport",
                 {"difference_accuracy", "interpolation_points", "steps_per_cell"})) {
      if (const auto v = r.integer(t, "difference_accuracy", "transport")) {
        if (*v < 2 || *v > 8 || *v % 2 != 0)
          r.fail("transport.difference_accuracy", "must be one of 2, 4, 6, 8");
        c.transport.difference_accuracy = static_cast<int>(*v);
      }
      if (const auto v = r.integer(t, "interpolation_points", "transport")) {
        if (*v < 2 || *v > 10) r.fail("transport.interpolation_points", "must be in 2..10");
        c.transport.interpolation_points = static_cast<int>(*v);
      }
      if (const auto v = r.integer(t, "steps_per_cell", "transport")) {
        if (*v < 1 || *v > 64) r.fail("transport.steps_per_cell", "must be in 1..64");
        c.transport.steps_per_cell = static_cast<int>(*v);
      }
    }
  }

  if (doc.contains("berry")) {
    if (c.kind != RunKind::Berry) r.fail("berry", "only berry runs take a berry block");
    const json& b = doc["berry"];
    if (r.object(b, "berry", {"theta", "count", "loop_file"})) {
      if (const auto v = r.number(b, "theta", "berry")) {
        if (!(*v > 0.0 && *v < std::numbers::pi)) r.fail("berry.theta", "must lie in (0, pi)");
        c.berry.theta = *v;
      }
      if (const auto v = r.integer(b, "count", "berry")) {
        if (*v < 8) r.fail("berry.count", "must be >= 8");
        c.berry.count = static_cast<int>(*v);
      }
      if (const auto v = r.text(b, "loop_file", "berry")) c.berry.loop_file = *v;
    }
  }

  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": malformed JSON: " + e.what()});
  }
  return parse_config(doc);
}

json to_json(const PotentialSpec& spec) {
  switch (spec.family()) {
    case PotentialFamily::Free: return {{"family", "free"}};
    case PotentialFamily::Harmonic: return {{"family", "harmonic"}, {"params", spec.params()}};
    case PotentialFamily::Polynomial:
      return {{"family", "polynomial"}, {"params", spec.params()}};
    case PotentialFamily::Tabulated:
      return {{"family", "tabulated"},
              {"x", spec.table().knots()},
              {"v", spec.table().values()}};
  }
  return {};
}

json to_json(const InitialProfile& p) {
  switch (p.family()) {
    case ProfileFamily::Constant: return {{"family", "constant"}, {"value", p.constant_value()}};
    case ProfileFamily::Gaussian:
      return {{"family", "gaussian"}, {"center", p.center()}, {"width", p.width()}};
    case ProfileFamily::TabulatedC2:
      return {{"family", "tabulated"}, {"u", p.table().knots()}, {"phi", p.table().values()}};
  }
  return {};
}

json to_json(const RunConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["output"] = c.output;
  if (c.kind == RunKind::Berry) {
    json b = {{"theta", c.berry.theta}, {"count", c.berry.count}};
    if (c.berry.loop_file) b["loop_file"] = *c.berry.loop_file;
    j["berry"] = b;
    return j;
  }
  j["mass"] = c.mass;
  j["margin"] = c.margin;
  j["order"] = c.order;
  j["hbar"] = c.hbars;
  j["tolerances"] = {{"ode", c.tol.ode}, {"identity", c.tol.identity}};
  j["transport"] = {{"difference_accuracy", c.transport.difference_accuracy},
                    {"interpolation_points", c.transport.interpolation_points},
                    {"steps_per_cell", c.transport.steps_per_cell}};
  if (c.kind == RunKind::Multidim) {
    j["grid"] = {{"t_hi", c.grid.t_hi}, {"nt", c.grid.nt}};
    json axes = json::array();
    for (const auto& a : c.axes) {
      json ja = {{"potential", to_json(a.potential)}, {"beta", a.beta},
                 {"x_lo", a.x_lo},                    {"x_hi", a.x_hi},
                 {"nx", a.nx},                        {"profile", to_json(a.profile)}};
      if (a.anchor) ja["anchor"] = *a.anchor;
      axes.push_back(ja);
    }
    j["axes"] = axes;
    return j;
  }
  j["potential"] = to_json(c.potential);
  j["beta"] = c.beta;
  if (c.anchor) j["anchor"] = *c.anchor;
  j["grid"] = {{"x_lo", c.grid.x_lo}, {"x_hi", c.grid.x_hi}, {"nx", c.grid.nx},
               {"t_hi", c.grid.t_hi}, {"nt", c.grid.nt}};
  j["profile"] = to_json(c.profile);
  return j;
}

}  // namespace wkbtd
