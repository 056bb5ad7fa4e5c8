#pragma once

#include <string>
#include <vector>

#include "dplab/path_engine.hpp"

namespace dplab {

enum class TimeKind { cox, argmax, half_final };

// How the half-final last crossing is read off a discrete path.
//   grid:   sign change of W - W_T/2 between grid points
//   bridge: grid sign changes plus, in steps without one, a Brownian-bridge
//           crossing drawn with its exact probability
enum class CrossingRule { grid, bridge };

// Which expression the half-final Malliavin trace returns.
//   displayed:  the two-term closed form quoted for the example
//   consistent: d/dw Z(w, T-s), whose time integral has mean E[W_tau] = 0
enum class TraceConvention { displayed, consistent };

struct CoxIntensity {
  enum class Preset { constant, affine_abs_w };
  Preset preset = Preset::constant;
  double a = 0.0;  // level
  double b = 0.0;  // slope in |W| (affine preset)

  double operator()(double t, double w) const;
};

struct RandomTimeModel {
  TimeKind kind = TimeKind::half_final;
  CoxIntensity intensity;
  CrossingRule crossing = CrossingRule::grid;

  static RandomTimeModel cox(CoxIntensity intensity);
  static RandomTimeModel argmax();
  static RandomTimeModel half_final(CrossingRule rule = CrossingRule::grid);
  std::string name() const;
};

struct TimeClassification {
  bool intensity_hypothesis = false;
  bool density_hypothesis = false;
  bool honest = false;
  bool f_measurable_at_T = false;
};

struct CompensatorPart {
  enum class Singular { none, proportional_to_dM };
  double ac_density = 0.0;  // density of the F-dual predictable projection
  Singular singular = Singular::none;
  double singular_coeff = 0.0;
  bool has_jump_part = false;
};

// Default in step `step`, i.e. tau in (t_step, t_step+1]; step = -1 means tau = 0.
struct DefaultTime {
  double tau = 0.0;
  int step = 0;
  bool defaulted = false;

  bool alive_at(int i) const { return !defaulted || i <= step; }  // tau > t_i
};

struct DriftValue {
  double value = 0.0;
  bool singular = false;
};

DefaultTime sample_default_time(const RandomTimeModel& model, const PathBundle& bundle);

// State functions at grid index i (0 <= i < n).
double azema_Z(const RandomTimeModel& model, const PathBundle& bundle, int i);
double azema_Z_at(const RandomTimeModel& model, const PathBundle& bundle, double t);
double malliavin_trace_indicator(const RandomTimeModel& model, const PathBundle& bundle, int i,
                                 TraceConvention conv = TraceConvention::displayed);
CompensatorPart compensator(const RandomTimeModel& model, const PathBundle& bundle, int i);
TimeClassification classify(const RandomTimeModel& model);
DriftValue g_drift(const RandomTimeModel& model, const PathBundle& bundle, int i, bool defaulted);

// Cumulated left-point Cox intensity at every grid index.
std::vector<double> cox_cumulative(const RandomTimeModel& model, const PathBundle& bundle);

namespace half_final {

// h(x) = sqrt(2/pi) * int_0^x y^2 exp(-y^2/2) dy, adaptive quadrature.
double h(double x);
// Z = 1 - h(|w|/sqrt(r)), computed as the upper tail integral.
double Z(double w, double r);
// S(x) = int_0^inf (x+u)^2 exp(-xu - u^2/2) du, so Z = sqrt(2/pi) e^{-x^2/2} S(x).
double scaled_tail(double x);
double Z_fast(double w, double r);
double intensity(double w, double r);
double intensity_over_Z(double w, double r);
double trace_displayed(double w, double r);
double trace_consistent(double w, double r);
// trace / Z without forming either factor
double trace_over_Z(double w, double r, TraceConvention conv);
double drift_before(double w, double r);
DriftValue drift_after(double w, double wT, double r);
// P(bridge of duration dt from d0 to d1 touches 0), d0*d1 >= 0.
double bridge_crossing_probability(double d0, double d1, double dt);

}  // namespace half_final

namespace argmax {

double Z(double k, double r);
double trace(double k, double r);
double singular_coeff(double r);

}  // namespace argmax

}  // namespace dplab
