#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace plapcli;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = PLAP_CONFIG_DIR;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("plap_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_rows(const fs::path& p, std::string& header) {
  std::ifstream in(p);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

struct Run {
  int code = -1;
  std::string log;
  std::string err;
};

Run run_command(const std::string& command, const std::string& config, const fs::path& out, bool force = false) {
  CommandOptions o;
  o.out_dir = out.string();
  o.force = force;
  std::ostringstream log;
  std::ostringstream err;
  Run r;
  r.code = run(command, config, o, log, err);
  r.log = log.str();
  r.err = err.str();
  return r;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "config.ini";
  std::ofstream(p) << text;
  return p.string();
}

const char* kBase = R"([problem]
dimension = 3
p = 2
inner = 1
outer = 2
)";

}  // namespace

TEST_CASE("config parsing is strict") {
  auto good = parse_config(std::string(kBase) + "[nonlinearity]\nfamily = power\ncoefficient = 3\nexponent = 2\n");
  CHECK(good.problem.p == 2.0);
  CHECK(good.nonlinearity.family == Family::Power);
  CHECK(good.nonlinearity.coefficient == 3.0);

  auto bad_key = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(text);
      FAIL("accepted: " << text);
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, std::string(e.what()));
    }
  };
  bad_key(std::string(kBase) + "[solver]\nsampels = 10\n", "sampels");
  bad_key(std::string(kBase) + "[solvr]\nsamples = 10\n", "solvr");
  bad_key("[problem]\ndimension = 3\ncolour = 1\n", "colour");
  bad_key(std::string(kBase) + "[solver]\nsamples = ten\n", "samples");
  bad_key(std::string(kBase) + "[nonlinearity]\nfamily = cubic\n", "family");
  bad_key(std::string(kBase) + "[solver]\ndedupe_tolerance = 0\n", "dedupe_tolerance");
  bad_key(std::string(kBase) + "[solver]\nnonneg_tolerance = -1\n", "nonneg_tolerance");
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"annulus_infinity.ini", "annulus_zero.ini", "critical_p3.ini", "zero_f.ini"}) {
    CHECK_NOTHROW(load_config(kConfigs + "/" + name));
  }
  CHECK_THROWS_AS(load_config(kConfigs + "/missing.ini"), ConfigError);
}

TEST_CASE("map writes the coordinate table") {
  TempDir tmp("map");
  auto r = run_command("map", kConfigs + "/annulus_infinity.ini", tmp.path);
  REQUIRE(r.code == kSuccess);
  std::string header;
  auto rows = read_rows(tmp.path / "map.csv", header);
  CHECK(header == "r,t,q");
  REQUIRE(rows.size() == 1001);
  CHECK(rows.front()[0] == 1.0);
  CHECK(rows.front()[1] == 0.0);
  CHECK(rows.front()[2] == doctest::Approx(0.25));
  CHECK(rows.back()[0] == 2.0);
  CHECK(rows.back()[1] == doctest::Approx(1.0));
  CHECK(r.log.find("q0") != std::string::npos);

  const std::string first = read_file(tmp.path / "map.csv");
  REQUIRE(run_command("map", kConfigs + "/annulus_infinity.ini", tmp.path).code == kSuccess);
  CHECK(read_file(tmp.path / "map.csv") == first);

  TempDir crit("map_crit");
  REQUIRE(run_command("map", kConfigs + "/critical_p3.ini", crit.path).code == kSuccess);
  rows = read_rows(crit.path / "map.csv", header);
  CHECK(rows.back()[1] == doctest::Approx(1.0));
}

TEST_CASE("check exit codes") {
  TempDir tmp("check");
  auto pass = run_command("check", kConfigs + "/annulus_infinity.ini", tmp.path);
  CHECK(pass.code == kSuccess);
  auto report = nlohmann::json::parse(read_file(tmp.path / "hypotheses.json"));
  CHECK(report["all_hold"] == true);

  CHECK(run_command("check", kConfigs + "/annulus_zero.ini", tmp.path).code == kSuccess);

  auto fail = run_command("check", kConfigs + "/zero_f.ini", tmp.path);
  CHECK(fail.code == kVerdictFailed);
  report = nlohmann::json::parse(read_file(tmp.path / "hypotheses.json"));
  CHECK(report["growth"]["holds"] == false);
  CHECK(report["plateaus"]["holds"] == true);

  auto power = write_config(tmp.path, std::string(kBase) + "[nonlinearity]\nfamily = power\n");
  CHECK(run_command("check", power, tmp.path).code == kInvalidInput);
}

TEST_CASE("certify") {
  TempDir tmp("certify");
  REQUIRE(run_command("certify", kConfigs + "/annulus_infinity.ini", tmp.path).code == kSuccess);
  for (const char* file : {"certificate_phi_bound.json", "certificate_energy_unbounded.json"}) {
    auto cert = nlohmann::json::parse(read_file(tmp.path / file));
    CHECK(cert["verdict"] == true);
    CHECK(cert["rows"].size() == 5);
    CHECK(cert.contains("provenance"));
  }

  TempDir zero("certify_zero");
  REQUIRE(run_command("certify", kConfigs + "/annulus_zero.ini", zero.path).code == kSuccess);
  auto small = nlohmann::json::parse(read_file(zero.path / "certificate_energy_negative_small.json"));
  CHECK(small["verdict"] == true);

  auto k1 = write_config(tmp.path, std::string(kBase) + "[certificate]\ncount = 1\n");
  auto r = run_command("certify", k1, tmp.path);
  CHECK(r.code == kInvalidInput);
  CHECK(!r.err.empty());

  CHECK(run_command("certify", kConfigs + "/zero_f.ini", tmp.path).code == kVerdictFailed);
}

TEST_CASE("solve writes solutions") {
  TempDir tmp("solve");
  auto r = run_command("solve", kConfigs + "/annulus_infinity.ini", tmp.path);
  REQUIRE(r.code == kSuccess);
  auto summary = nlohmann::json::parse(read_file(tmp.path / "summary.json"));
  const auto& list = summary["solutions"];
  REQUIRE(list.size() >= 3);
  double prev = 0.0;
  for (const auto& s : list) {
    CHECK(s["sup"].get<double>() > prev);
    prev = s["sup"].get<double>();
    CHECK(s["weak_residual"].get<double>() < 1e-6);
    CHECK(s["min_value"].get<double>() >= -1e-8);

    std::string header;
    auto tv = read_rows(tmp.path / s["file_tv"].get<std::string>(), header);
    CHECK(header == "t,v");
    CHECK(tv.front()[1] == 0.0);
    CHECK(tv.back()[1] == 0.0);
    auto ru = read_rows(tmp.path / s["file_ru"].get<std::string>(), header);
    CHECK(header == "r,u");
    CHECK(ru.front()[0] == 1.0);
    CHECK(ru.back()[0] == 2.0);
    CHECK(ru.front()[1] == 0.0);
    CHECK(ru.back()[1] == 0.0);
  }
}

TEST_CASE("solve on the small branch") {
  TempDir tmp("solve_zero");
  REQUIRE(run_command("solve", kConfigs + "/annulus_zero.ini", tmp.path).code == kSuccess);
  auto summary = nlohmann::json::parse(read_file(tmp.path / "summary.json"));
  const auto& list = summary["solutions"];
  REQUIRE(list.size() >= 3);
  CHECK(list[0]["sup"].get<double>() < 1e-2);
}

TEST_CASE("solve without nontrivial solutions") {
  TempDir tmp("solve_none");
  auto r = run_command("solve", kConfigs + "/zero_f.ini", tmp.path);
  CHECK(r.code == kNoSolutions);
  CHECK(r.log.find("swept") != std::string::npos);
}

TEST_CASE("invalid input") {
  TempDir tmp("invalid");
  CHECK(run_command("map", (tmp.path / "nope.ini").string(), tmp.path).code == kInvalidInput);
  auto bad = write_config(tmp.path, "[problem]\ndimension = 3\np = 5\ninner = 1\nouter = 2\n");
  CHECK(run_command("map", bad, tmp.path).code == kInvalidInput);
  CHECK(run_command("frobnicate", kConfigs + "/annulus_infinity.ini", tmp.path).code == kInvalidInput);
  CommandOptions o;
  o.threads = 0;
  std::ostringstream log;
  std::ostringstream err;
  CHECK(run("map", kConfigs + "/annulus_infinity.ini", o, log, err) == kInvalidInput);
}
