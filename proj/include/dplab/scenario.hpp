#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dplab/chaos.hpp"
#include "dplab/market.hpp"
#include "dplab/optimizer.hpp"
#include "dplab/random_times.hpp"

namespace dplab {

// expect: "pass" (default), "fail" (some assertion must fail), "no-optimum"
// (solve must end in NoAdmissibleOptimum).
struct ExperimentBlock {
  std::string name;
  std::string expect = "pass";
};

struct ModelBlock {
  std::string name = "half_final";  // half_final | argmax | cox
  std::string crossing = "bridge";  // half_final only
  std::string intensity = "constant";  // cox only: constant | affine_abs_w
  double a = 0.0, b = 0.0;

  RandomTimeModel model() const;
};

struct StrategyBlock {
  std::string name = "optimal";  // optimal | constant
  double pi = 0.0;               // constant only
  double shift = 0.0;
  std::string trace = "consistent";
  bool info_drift_after = true;
  double eps = 1e-6;
};

struct UtilityBlock {
  std::string kind = "log";
  double gamma = 0.5;
  UtilitySpec spec() const;
};

struct McBlock {
  long paths = 10000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  double delta = 1e-3;
  long inner = 10000;
};

struct VerifyBlock {
  std::vector<std::string> tests;  // default selection for `verify`
  int buckets = 8;
  long min_support = 50;
  double singular_k = 2.0;
  double compare_shift = 0.0;   // gateaux: J(pi) - J(pi + shift) > 2SE
  double negative_shift = 0.0;  // martingale: shifted strategy must be rejected
  std::vector<double> eps;      // forward; empty = dt * 2^k, k = 0..6
  std::vector<std::string> forward_presets{"constant", "brownian", "sine", "terminal"};
  std::vector<std::string> ito_presets{"square"};
  int ito_refinements = 3;
  std::vector<double> azema_times{0.25, 0.5, 0.75};
  double azema_tol = 0.02;
  std::vector<int> lt_steps{64, 128, 256, 512, 1024};
  double doob_meyer_tol = 0.10;
  long solve_paths = 100;
  double solve_tol = 1e-10;
  double exact_tol = 1e-12;
  double exact_pi = 0.5;
};

struct ChaosBlock {
  int K = 50, Q = 4;
  int nodes = 0;
  std::vector<std::string> wick{"W_T", "W_T^2", "W_T^3", "h2(theta1)", "theta1*theta2", "2.5"};
  std::vector<double> wick_interval{0.25, 0.75};
  std::vector<std::string> forward{"W_T", "theta1", "adapted_step"};
  std::vector<int> poisson_degrees{0, 1, 2, 3};
  std::vector<double> poisson_interval{0.25, 0.75};
  double poisson_z = 1.0, poisson_rate = 2.0;
  std::vector<std::string> norms{"W_T", "h2(theta1)", "theta1*theta2", "W_T^2"};
  long norm_paths = 20000;
  int norm_steps = 4800;
  double norm_half_width = 12.0;
};

struct OutputsBlock {
  std::string dir = "out";
  std::vector<std::string> formats{"json", "csv"};
  long path_rows = 16;  // paths written to the simulate CSV
};

struct ScenarioConfig {
  ExperimentBlock experiment;
  double T = 1.0;
  int steps = 256;
  MarketSpec market;
  std::vector<ModelBlock> models;  // first is primary; others run alongside
  StrategyBlock strategy;
  UtilityBlock utility;
  McBlock mc;
  VerifyBlock verify;
  ChaosBlock chaos;
  OutputsBlock outputs;

  McConfig mc_config() const;
  BasisConfig basis() const;
  BuildOptions build_options() const;
  // named builder for one model, with the configured shift applied
  Strategy strategy_for(const RandomTimeModel& model) const;
};

// Throws ConfigError; unknown keys are errors.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig parse_scenario_text(const std::string& text, bool json);
ScenarioConfig load_scenario(const std::string& path);

// Canonical TOML; emit(parse(emit(c))) == emit(c).
std::string emit_toml(const ScenarioConfig& c);
// Hash of the canonical form with output location and threads blanked.
std::string scenario_hash(const ScenarioConfig& c);

nlohmann::json toml_to_json(const std::string& text);

}  // namespace dplab
