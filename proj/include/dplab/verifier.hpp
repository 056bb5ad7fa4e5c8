#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dplab/market.hpp"
#include "dplab/random_times.hpp"
#include "dplab/regression.hpp"
#include "dplab/stats.hpp"

namespace dplab {

// ---- perturbation derivatives

struct GateauxEstimate {
  Estimate psi;      // E[U'(X)X Psi_T]
  Estimate central;  // CRN (J(pi+d) - J(pi-d)) / 2d
  Estimate second;   // CRN second difference
  Estimate J;
  double delta = 0.0;
  double agreement_z = 0.0;  // (psi - central) / joint SE
  long paths = 0;
  std::uint64_t seed = 0;
};

GateauxEstimate gateaux_derivative(const MarketSpec& spec, const RandomTimeModel& model, const Strategy& pi,
                                   const Rule& beta, const UtilitySpec& u, const McConfig& mc,
                                   double delta = 1e-3);

// Paired comparison J(a) - J(b) on common paths.
struct PairedComparison {
  Estimate Ja, Jb, diff;
  long paths = 0;
};
PairedComparison compare_strategies(const MarketSpec& spec, const RandomTimeModel& model, const Strategy& a,
                                    const Strategy& b, const UtilitySpec& u, const McConfig& mc);

// ---- Q-martingale residuals

struct MartingaleBucket {
  double t0 = 0.0, t1 = 0.0;
  OlsResult fit;
  double max_abs_t = 0.0;
  bool pass = true;
};

struct MartingaleResidual {
  std::vector<std::string> features;  // const, W_t, M_t, 1{tau<=t}, (t-tau)+
  std::vector<MartingaleBucket> buckets;
  double max_abs_t = 0.0;
  bool pass = true;
  double weight_max = 0.0, weight_q999 = 0.0;  // sampled U'(X)X / mean
  long paths = 0;
  std::uint64_t seed = 0;
};

MartingaleResidual martingale_residual(const MarketSpec& spec, const RandomTimeModel& model, const Strategy& pi,
                                       const UtilitySpec& u, const McConfig& mc, int buckets = 8,
                                       long min_support = 50);

// ---- G-drift of W

struct DriftRegression {
  std::string sample;  // "before" / "after"
  OlsResult fit;       // columns: intercept, predictor
  long excluded = 0;   // singular states removed
  bool pass = false;
};

struct DriftScan {
  std::vector<DriftRegression> regressions;
  bool control = false;  // Cox control: slope must vanish
  bool pass = false;
  long paths = 0;
  std::uint64_t seed = 0;
};

// Half-final: before/after regressions of dW/h on the closed-form drift.
// Cox: the half-final before-default formula as predictor, slope must be 0.
DriftScan g_drift_regression(const RandomTimeModel& model, const McConfig& mc, double singular_k = 2.0);

// ---- argmax compensator probe

struct SingularityProbe {
  long windows = 0, defaults = 0, violations = 0;
  OlsResult joint;        // columns: intercept, dt, dM/sqrt(T-t)
  OlsResult flat;         // rows with dM = 0; columns: intercept, dt
  double dM_t = 0.0, dt_t_given_flat = 0.0;
  double predicted_coef = 0.0;  // sqrt(2/pi) * mean(1/Z) over windows
  std::vector<double> lt_dt, lt_proxy;  // local-time proxy per resolution
  double lt_slope = 0.0;
  bool pass = false;
  long paths = 0;
  std::uint64_t seed = 0;
};

SingularityProbe compensator_singularity_probe(const RandomTimeModel& model, const McConfig& mc,
                                               const std::vector<int>& lt_steps = {64, 128, 256, 512, 1024});

// ---- forward vs Ito

enum class ForwardPreset { constant, brownian, sine, terminal };
std::string to_string(ForwardPreset p);

struct ForwardRow {
  double eps = 0.0;
  int multiple = 0;
  double rms = 0.0;                // RMS of forward - Ito (adapted presets)
  Estimate skorohod_gap;           // forward - Skorohod (terminal preset)
};

struct ForwardSeries {
  ForwardPreset preset;
  std::vector<ForwardRow> rows;
  double slope = 0.0;
  bool pass = false;
};

struct ForwardReport {
  std::vector<ForwardSeries> series;
  std::vector<double> skipped;  // eps below grid resolution or off the grid
  bool pass = false;
  long paths = 0;
  std::uint64_t seed = 0;
};

ForwardReport forward_vs_ito(const McConfig& mc, const std::vector<double>& eps,
                             const std::vector<ForwardPreset>& presets);

// ---- Ito formula along S

enum class ItoPreset { square, log1p_square, exp };
std::string to_string(ItoPreset p);

struct ItoRow {
  int steps = 0;
  double max_dev = 0.0;
  double mean_dev = 0.0;
};

struct ItoCheck {
  std::vector<ItoRow> rows;
  bool shrinks = false;
};

ItoCheck ito_formula_check(const MarketSpec& spec, const RandomTimeModel& model, ItoPreset f, const McConfig& mc,
                           int refinements = 3);

// ---- Azema supermartingale by nested simulation

struct AzemaRow {
  double t = 0.0;
  double max_err = 0.0, mean_err = 0.0;
};

struct AzemaCheck {
  std::vector<AzemaRow> rows;
  double max_err = 0.0;
  long outer = 0, inner = 0;
};

AzemaCheck azema_nested_check(const RandomTimeModel& model, const McConfig& outer, long inner,
                              const std::vector<double>& times);

// ---- Doob-Meyer: default frequency vs integrated intensity

struct DoobMeyerBucket {
  double t0 = 0.0, t1 = 0.0;
  Estimate frequency, compensator;
  double rel_err = 0.0;
};

struct DoobMeyerCheck {
  std::vector<DoobMeyerBucket> buckets;
  double max_rel_err = 0.0;
  long paths = 0;
};

DoobMeyerCheck doob_meyer_check(const RandomTimeModel& model, const McConfig& mc, int buckets = 8);

// ---- sigma = theta = 0 closed form

struct ExactnessCheck {
  double max_abs_err = 0.0;
  long paths = 0;
  long defaults = 0;
};

ExactnessCheck wealth_exactness(const MarketSpec& spec, const RandomTimeModel& model, double pi, const McConfig& mc);

}  // namespace dplab
