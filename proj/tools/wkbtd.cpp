#include <CLI11.hpp>

#include <iostream>

#include "wkbtd/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent WKB series: phase, transport hierarchy, residual checks"};
  std::string config_path;
  std::string out_dir;
  bool check = false;
  bool verbose = false;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--out", out_dir, "output directory (overrides the config's output)");
  app.add_flag("--check", check, "re-verify a finished run from its stored files");
  app.add_flag("--verbose", verbose, "print stage progress to stderr");
  app.footer(
      "Exit codes: 0 ok, 1 other failure, 2 config error, 3 tolerance failure,\n"
      "4 domain or horizon error. WKBTD_THREADS sets the worker count.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wkbtd::kExitConfig;
  }

  wkbtd::RunOptions options{verbose, &std::cerr};

  if (check) {
    if (out_dir.empty() && config_path.empty()) {
      std::cerr << "--check needs --out or --config to locate the run\n";
      return wkbtd::kExitConfig;
    }
    if (out_dir.empty()) {
      try {
        out_dir = wkbtd::load_config(config_path).output;
      } catch (const wkbtd::ConfigError& e) {
        std::cerr << "config error:\n";
        for (const auto& item : e.items()) std::cerr << "  " << item << '\n';
        return wkbtd::kExitConfig;
      }
    }
    const auto result = wkbtd::check_run(out_dir, options);
    for (const auto& line : result.lines) std::cout << line << '\n';
    return result.exit_code;
  }

  if (config_path.empty()) {
    std::cerr << "--config is required\n" << app.help();
    return wkbtd::kExitConfig;
  }
  wkbtd::RunConfig config;
  try {
    config = wkbtd::load_config(config_path);
  } catch (const wkbtd::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& item : e.items()) std::cerr << "  " << item << '\n';
    if (!out_dir.empty()) {
      try {
        wkbtd::write_config_failure(out_dir, e);
      } catch (const std::exception&) {
      }
    }
    return wkbtd::kExitConfig;
  }
  if (out_dir.empty()) out_dir = config.output;
  config.output = out_dir;

  const auto manifest = wkbtd::run(config, out_dir, options);
  if (manifest.exit_code != wkbtd::kExitOk) {
    std::cerr << manifest.failure_kind << ": " << manifest.failure_message << '\n';
  } else {
    std::cout << "ok: " << manifest.files.size() << " files in " << out_dir << '\n';
  }
  return manifest.exit_code;
}
