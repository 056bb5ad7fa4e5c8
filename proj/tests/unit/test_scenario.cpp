#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dplab/errors.hpp"
#include "dplab/experiments.hpp"
#include "dplab/report.hpp"
#include "dplab/scenario.hpp"

using namespace dplab;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[market]
mu = 0.06
rho = 0.01
sigma = 0.2
kappa = 0.5

[model]
name = "cox"
a = 0.4

[mc]
paths = 300
seed = 3
)";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dplab_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("every shipped scenario round-trips through emit") {
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(fs::path(DPLAB_SOURCE_DIR) / "scenarios")) {
    if (e.path().extension() != ".toml" || e.path().parent_path().filename() == "errors") continue;
    const ScenarioConfig c = load_scenario(e.path().string());
    const std::string once = emit_toml(c);
    const std::string twice = emit_toml(parse_scenario_text(once, false));
    CHECK_MESSAGE(once == twice, e.path().string());
    ++n;
  }
  CHECK(n >= 10);
}

TEST_CASE("json and toml give the same scenario") {
  const ScenarioConfig t = parse_scenario_text(kMinimal, false);
  const std::string j = R"({"market": {"mu": 0.06, "rho": 0.01, "sigma": 0.2, "kappa": 0.5},
                            "model": {"name": "cox", "a": 0.4}, "mc": {"paths": 300, "seed": 3}})";
  CHECK(emit_toml(parse_scenario_text(j, true)) == emit_toml(t));
}

TEST_CASE("config errors") {
  auto err = [](const std::string& text) {
    try {
      parse_scenario_text(text, false);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string base = kMinimal;
  CHECK(err(base + "\n[verify]\nbukets = 3\n").find("verify.bukets") != std::string::npos);
  std::string k0 = base;
  k0.replace(k0.find("kappa = 0.5"), 11, "kappa = 0.0");
  CHECK(err(k0).find("κ ≠ 0") != std::string::npos);
  std::string bad = base;
  bad.replace(bad.find("\"cox\""), 5, "\"coxx\"");
  CHECK(err(bad).find("model.name") != std::string::npos);
  std::string noseed = base;
  noseed.replace(noseed.find("seed = 3"), 8, "");
  CHECK(err(noseed).find("seed") != std::string::npos);
  CHECK(err("[market\n").find("TOML parse error") != std::string::npos);
  CHECK(err(base + "\n[strategy]\nname = \"constant\"\n").find("strategy.pi") != std::string::npos);
  CHECK_THROWS_AS(parse_scenario_text("{\"mc\": ", true), ConfigError);
}

TEST_CASE("scenario hash ignores output location and threads") {
  ScenarioConfig a = parse_scenario_text(kMinimal, false), b = a;
  b.outputs.dir = "elsewhere";
  b.mc.threads = 4;
  CHECK(scenario_hash(a) == scenario_hash(b));
  b.mc.seed = 4;
  CHECK(scenario_hash(a) != scenario_hash(b));
}

}  // TEST_SUITE

TEST_SUITE("report") {

TEST_CASE("sha256 test vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("doubles print in shortest round-trip form") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5e17}) CHECK(std::stod(fmt(x)) == x);
  CHECK(fmt(0.1) == "0.1");
  CHECK(num(std::numeric_limits<double>::infinity(), 0)["value"] == "inf");
}

TEST_CASE("atomic write leaves no temp file") {
  const fs::path d = scratch("atomic");
  write_atomic((d / "x.txt").string(), "hello");
  CHECK(slurp(d / "x.txt") == "hello");
  CHECK_FALSE(fs::exists(d / "x.txt.tmp"));
  fs::remove_all(d);
}

TEST_CASE("manifest: rerun, seed change, directory change") {
  ScenarioConfig c = parse_scenario_text(kMinimal, false);
  c.outputs.dir = scratch("m1").string();
  run_subcommand(c, "simulate", {}, true);
  ScenarioConfig again = c;
  again.outputs.dir = scratch("m2").string();
  again.mc.threads = 3;
  run_subcommand(again, "simulate", {}, true);
  const std::string m1 = slurp(fs::path(c.outputs.dir) / "manifest.json");
  CHECK(m1 == slurp(fs::path(again.outputs.dir) / "manifest.json"));
  CHECK(slurp(fs::path(c.outputs.dir) / "paths.csv") == slurp(fs::path(again.outputs.dir) / "paths.csv"));
  ScenarioConfig seeded = c;
  seeded.outputs.dir = scratch("m3").string();
  seeded.mc.seed = 99;
  run_subcommand(seeded, "simulate", {}, true);
  CHECK(m1 != slurp(fs::path(seeded.outputs.dir) / "manifest.json"));
  CHECK(fs::exists(fs::path(c.outputs.dir) / "runtime_seconds.txt"));
  CHECK(m1.find("runtime") == std::string::npos);
  for (const auto* d : {&c, &again, &seeded}) fs::remove_all(d->outputs.dir);
}

TEST_CASE("csv has a header row") {
  ScenarioConfig c = parse_scenario_text(kMinimal, false);
  c.outputs.dir = scratch("csv").string();
  c.outputs.path_rows = 2;
  const RunOutcome o = run_subcommand(c, "simulate", {}, true);
  CHECK(o.exit_code == 0);
  std::istringstream is(slurp(fs::path(c.outputs.dir) / "paths.csv"));
  std::string head;
  std::getline(is, head);
  CHECK(head.rfind("model,path,i,t,W", 0) == 0);
  int rows = 0;
  for (std::string l; std::getline(is, l);) ++rows;
  CHECK(rows == 2 * (c.steps + 1));
  fs::remove_all(c.outputs.dir);
}

TEST_CASE("expectations") {
  ScenarioConfig c = parse_scenario_text(kMinimal, false);
  c.models = {ModelBlock{"argmax"}};
  c.outputs.dir = scratch("expect").string();
  CHECK(run_subcommand(c, "solve", {}, true).exit_code == 2);
  c.experiment.expect = "no-optimum";
  CHECK(run_subcommand(c, "solve", {}, true).exit_code == 0);
  CHECK_THROWS_AS(run_subcommand(c, "verify", {}, true), ConfigError);  // nothing selected
  fs::remove_all(c.outputs.dir);
}

}  // TEST_SUITE
