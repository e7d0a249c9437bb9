#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "wkbtd/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "wkbtd_cli_test";

int cli(const std::string& args) {
  const std::string cmd = std::string(WKBTD_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& doc) {
  fs::create_directories(kRoot);
  const auto path = kRoot / (name + ".json");
  std::ofstream(path) << doc.dump(2);
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json small_sweep() {
  return {{"kind", "sweep"},
          {"potential", {{"family", "harmonic"}}},
          {"margin", 0.19},
          {"grid", {{"x_lo", 0.1}, {"x_hi", 0.8}, {"nx", 61}, {"t_hi", 0.15}, {"nt", 61}}},
          {"order", 1}};
}

std::string run_into(const fs::path& config, const fs::path& out) {
  return "--config " + config.string() + " --out " + out.string();
}

}  // namespace

TEST_CASE("exit codes") {
  const auto ok = write_config("ok", small_sweep());
  CHECK(cli(run_into(ok, kRoot / "ok")) == 0);
  CHECK(fs::file_size(kRoot / "ok" / "report.json") > 0);
  CHECK(fs::exists(kRoot / "ok" / "a1.csv"));

  auto bad = small_sweep();
  bad["order"] = 5;
  CHECK(cli(run_into(write_config("bad", bad), kRoot / "bad")) == 2);

  auto turning = small_sweep();
  turning["grid"]["x_lo"] = -1.0;
  CHECK(cli(run_into(write_config("turning", turning), kRoot / "turning")) == 4);
  const auto manifest = json::parse(slurp(kRoot / "turning" / "manifest.json"));
  CHECK(manifest["status"] == "failed");

  auto strict = small_sweep();
  strict["tolerances"] = {{"identity", 1e-16}};
  CHECK(cli(run_into(write_config("strict", strict), kRoot / "strict")) == 3);

  CHECK(cli("--config " + (kRoot / "missing.json").string()) == 2);
}

TEST_CASE("check re-verifies a finished run") {
  const auto cfg = write_config("check", small_sweep());
  REQUIRE(cli(run_into(cfg, kRoot / "check")) == 0);
  CHECK(cli("--check --out " + (kRoot / "check").string()) == 0);

  // a corrupted interior value no longer reproduces the stored report
  const auto a1 = kRoot / "check" / "a1.csv";
  std::string text = slurp(a1);
  auto eol = text.find('\n', text.size() / 2);
  const auto start = text.rfind(',', eol) + 1;
  text.replace(start, eol - start, "1.0");
  std::ofstream(a1, std::ios::binary) << text;
  CHECK(cli("--check --out " + (kRoot / "check").string()) != 0);
}

TEST_CASE("repeated runs write identical reports") {
  const auto cfg = write_config("det", small_sweep());
  REQUIRE(cli(run_into(cfg, kRoot / "det1")) == 0);
  REQUIRE(cli(run_into(cfg, kRoot / "det2")) == 0);
  for (const char* file : {"report.json", "a0.csv", "a1.csv", "psi_final_0.csv"})
    CHECK(slurp(kRoot / "det1" / file) == slurp(kRoot / "det2" / file));
}

TEST_CASE("phase-only free run writes a linear W") {
  const json doc = {{"kind", "phase"},
                    {"potential", {{"family", "free"}}},
                    {"beta", 2.0},
                    {"anchor", 0.0},
                    {"grid", {{"x_lo", 0.0}, {"x_hi", 1.0}, {"nx", 11}, {"t_hi", 0.1}}}};
  REQUIRE(cli(run_into(write_config("phase", doc), kRoot / "phase")) == 0);
  std::ifstream in(kRoot / "phase" / "phase.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("x,W", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    double x = 0.0, w = 0.0;
    char comma = 0;
    row >> x >> comma >> w;
    CHECK(w == doctest::Approx(2.0 * x).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 11);
}

TEST_CASE("shipped experiment configs pass validation") {
  for (const auto& entry : fs::directory_iterator(WKBTD_EXPERIMENTS)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(wkbtd::load_config(entry.path()));
  }
}
