#pragma once

#include <vector>

#include "dplab/market.hpp"
#include "dplab/random_times.hpp"

namespace dplab {

struct JumpAtom {
  double theta = 0.0;
  double lambda = 0.0;
};

struct OptimalityInputs {
  double excess = 0.0;  // mu - rho
  double sigma = 0.0;
  std::vector<JumpAtom> atoms;
  double kappa = 0.5;
  double Z = 1.0;       // Z_{s-}
  double trace = 0.0;   // E[D_{s+} 1{tau>s} | F_s]
  double lambda = 0.0;  // F-intensity lambda_s of the default compensator
  // After default only: G-drift of W that the Wick terms leave behind for
  // honest times (zero for adapted / immersed models).
  double info_drift = 0.0;
  bool intensity_hypothesis = true;
};

struct SolverConfig {
  int expansion_limit = 60;
  double tol = 1e-12;
  int max_iter = 200;
  double eps = 1e-6;  // admissibility margin
};

struct Solution {
  double pi = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

double after_default_residual(const OptimalityInputs& in, double pi);
double before_default_residual(const OptimalityInputs& in, double pi);
// residual of pi = a + b*kappa/(1 + pi*kappa)
double quadratic_residual(double a, double b, double kappa, double pi);

Solution solve_after_default(const OptimalityInputs& in, const SolverConfig& cfg = {});
Solution solve_before_default(const OptimalityInputs& in, const SolverConfig& cfg = {});
double solve_quadratic_closed_form(double a, double b, double kappa);

struct BuildOptions {
  TraceConvention trace = TraceConvention::consistent;
  // false: Merton-type after-default rule even for honest times
  bool info_drift_after = true;
  SolverConfig solver;
};

// Inputs at grid index i of a bundle; used by build_strategy and the CLI tables.
OptimalityInputs before_inputs(const RandomTimeModel& model, const MarketSpec& spec, const PathState& st,
                               TraceConvention conv);
OptimalityInputs after_inputs(const RandomTimeModel& model, const MarketSpec& spec, const PathState& st,
                              bool info_drift);

Strategy build_strategy(const RandomTimeModel& model, const MarketSpec& spec, const BuildOptions& opt = {});

}  // namespace dplab
