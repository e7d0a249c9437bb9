#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wkbtd/config.hpp"

namespace wkbtd {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitTolerance = 3,
  kExitDomain = 4,
};

int exit_code_for(const std::exception& e);

struct StageRecord {
  std::string stage;
  std::string status;  // "ok" or "failed"
  std::string message;
};

struct RunManifest {
  nlohmann::json config;
  std::vector<std::string> files;  // relative to the output directory
  std::vector<StageRecord> stages;
  double wall_seconds = 0.0;
  int exit_code = kExitOk;
  std::string failure_kind;
  std::string failure_message;

  nlohmann::json to_json() const;
};

struct RunOptions {
  bool verbose = false;
  std::ostream* log = nullptr;  // progress lines when verbose
};

/// Executes the configured pipeline and writes fields (CSV), report.json and
/// manifest.json into `out_dir`. Failures are recorded in the manifest with
/// the stage that raised them; nothing is thrown for module errors.
RunManifest run(const RunConfig& config, const std::filesystem::path& out_dir,
                const RunOptions& options = {});

struct CheckResult {
  int exit_code = kExitOk;
  std::vector<std::string> lines;  // one line per verified item
  nlohmann::json report;           // report recomputed from stored fields
};

/// Re-verifies every threshold of a finished run from the files it stored,
/// without solving the hierarchy again.
CheckResult check_run(const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Writes via a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Manifest written when the config itself cannot be read.
void write_config_failure(const std::filesystem::path& out_dir, const ConfigError& e);

}  // namespace wkbtd
