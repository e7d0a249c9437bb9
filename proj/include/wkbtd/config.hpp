#pragma once

#include <json.hpp>

#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wkbtd/hj.hpp"
#include "wkbtd/transport.hpp"

namespace wkbtd {

enum class RunKind { Phase, Transport, Sweep, Multidim, Berry };

std::string to_string(RunKind kind);

struct GridConfig {
  double x_lo = 0.0;
  double x_hi = 1.0;
  Index nx = 201;
  double t_hi = 0.1;
  Index nt = 201;

  SpaceTimeGrid grid() const { return {x_lo, x_hi, nx, t_hi, nt}; }
};

struct AxisConfig {
  PotentialSpec potential = PotentialSpec::free();
  double beta = 1.0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  Index nx = 41;
  InitialProfile profile = InitialProfile::gaussian();
  std::optional<double> anchor;
};

struct Tolerances {
  /// Transport equations: max|T_k| <= 10 tol_ode max(1, max|a_{k-1,xx}|).
  double ode = 1e-6;
  /// Remainder identity, relative max-norm.
  double identity = 1e-6;
};

struct BerryConfig {
  double theta = std::numbers::pi / 2.0;
  int count = 2000;
  /// When set, the loop is read from this CSV or JSON file instead.
  std::optional<std::string> loop_file;
};

struct RunConfig {
  RunKind kind = RunKind::Sweep;
  PotentialSpec potential = PotentialSpec::free();
  double mass = 1.0;
  double beta = 1.0;
  std::optional<double> anchor;
  double margin = kDefaultMargin;
  GridConfig grid;
  InitialProfile profile = InitialProfile::gaussian();
  int order = 0;
  std::vector<double> hbars{0.2, 0.1, 0.05, 0.025};
  Tolerances tol;
  TransportOptions transport;
  std::vector<AxisConfig> axes;  // multidim only; grid.x_* unused there
  BerryConfig berry;
  std::string output = "out";
};

/// Strict parse: unknown keys and every schema violation are collected into
/// one ConfigError, each item prefixed with its JSON path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Normalized config with every default filled in.
nlohmann::json to_json(const RunConfig& config);

nlohmann::json to_json(const PotentialSpec& spec);
nlohmann::json to_json(const InitialProfile& profile);

}  // namespace wkbtd
