#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dplab/path_engine.hpp"
#include "dplab/random_times.hpp"

namespace dplab {

// value + slope*t
struct Coef {
  double value = 0.0;
  double slope = 0.0;
  double at(double t) const { return value + slope * t; }
};

// Coefficient that may switch to an after-default law at tau.
struct Switching {
  Coef before;
  std::optional<Coef> after;

  Switching() = default;
  Switching(double v) : before{v, 0.0} {}
  Switching(Coef b, std::optional<Coef> a = std::nullopt) : before(b), after(a) {}
  double at(double t, bool defaulted) const { return defaulted && after ? after->at(t) : before.at(t); }
};

struct MarketSpec {
  double s0 = 1.0;
  double x0 = 1.0;
  Switching rho, mu, sigma;
  std::vector<Switching> theta;  // one per Lévy atom
  Switching kappa{0.5};
  LevySpec levy;
};

// Throws ConfigError naming the violated coefficient bound.
void validate(const MarketSpec& spec);

struct PathState {
  const PathBundle* bundle = nullptr;
  int i = 0;
  double t = 0.0;
  bool defaulted = false;
  double tau = 0.0;

  double W() const { return bundle->brownian.W[i]; }
};

using Rule = std::function<double(const PathState&)>;

struct Strategy {
  std::string name;
  Rule before;
  Rule after;
  double eps = 1e-6;
};

Strategy constant_strategy(double pi, double eps = 1e-6);
// pi + delta*beta on both legs
Strategy perturbed(const Strategy& s, const Rule& beta, double delta);
Strategy shifted(const Strategy& s, double delta);

struct WealthPath {
  std::vector<double> logX;  // ln X_{t_i}, i = 0..n
  std::vector<double> pi;    // pi on step i (left point)
  int default_step = 0;
  bool defaulted = false;
  double default_pi = 0.0;   // pi^F at tau-
  double XT = 0.0;
};

std::vector<double> simulate_asset(const MarketSpec& spec, const PathBundle& bundle, const DefaultTime& tau);
WealthPath simulate_wealth(const MarketSpec& spec, const Strategy& strategy, const PathBundle& bundle,
                           const DefaultTime& tau);

struct AdmissibilityReport {
  double min_jump_margin = 1.0;     // min over steps, atoms of 1 + pi*theta
  double min_default_margin = 1.0;  // min over pre-default steps of 1 + pi*kappa
  double integrand = 0.0;           // sampled integrand of the integrability condition
  int failing_step = -1;
  std::string failing_bound;
  bool pass = true;
};

AdmissibilityReport check_admissibility(const Strategy& strategy, const MarketSpec& spec,
                                        const PathBundle& bundle, const DefaultTime& tau);

struct UtilitySpec {
  enum class Kind { log, power };
  Kind kind = Kind::log;
  double gamma = 0.5;

  static UtilitySpec log_utility() { return {}; }
  static UtilitySpec power(double gamma);
};

double utility_value(double x, const UtilitySpec& u);
double utility_of_log(double log_x, const UtilitySpec& u);
// U'(x)*x, the Q-measure density before normalisation.
double marginal_times_wealth(double x, const UtilitySpec& u);

struct McConfig {
  double T = 1.0;
  int steps = 256;
  long paths = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct ObjectiveEstimate {
  double J = 0.0;
  double se = 0.0;
  double alive_term = 0.0;    // mean U*1{tau > T}
  double default_term = 0.0;  // mean U*1{tau <= T}
  double default_rate = 0.0;
  double default_rate_se = 0.0;
  long paths = 0;
  long inadmissible = 0;
};

ObjectiveEstimate estimate_objective(const MarketSpec& spec, const RandomTimeModel& model,
                                     const Strategy& strategy, const UtilitySpec& u, const McConfig& mc);

}  // namespace dplab
