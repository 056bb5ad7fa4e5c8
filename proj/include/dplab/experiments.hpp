#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dplab/report.hpp"
#include "dplab/scenario.hpp"

namespace dplab {

struct TestResult {
  TestResult() = default;
  explicit TestResult(std::string n) : name(std::move(n)) {}

  std::string name;
  bool pass = false;
  nlohmann::json body;
  std::vector<std::pair<std::string, Csv>> tables;
};

using TestFn = std::function<TestResult(const ScenarioConfig&)>;

// gateaux, martingale, drift, singularity, forward, ito, azema, doob-meyer, exactness
const std::map<std::string, TestFn>& verify_tests();

TestResult run_simulate(const ScenarioConfig& c);
// no_optimum: every model ended in NoAdmissibleOptimum
TestResult run_solve(const ScenarioConfig& c, bool& no_optimum);
TestResult run_chaos(const ScenarioConfig& c);

struct RunOutcome {
  int exit_code = 0;  // 0 expectation met, 2 not met
  bool met = false;
  std::vector<TestResult> results;
};

// Writes one JSON per test, the CSV tables, report.json and manifest.json
// into c.outputs.dir. Runtime goes to runtime_seconds.txt, outside the manifest.
RunOutcome write_report(const ScenarioConfig& c, const std::string& sub, std::vector<TestResult> results,
                        bool no_optimum, double seconds, bool quiet = false);

// sub: simulate | solve | verify | chaos-check | drift-scan. tests: verify
// selection, falling back to verify.tests.
RunOutcome run_subcommand(const ScenarioConfig& c, const std::string& sub, std::vector<std::string> tests = {},
                          bool quiet = false);

}  // namespace dplab
