#include "dplab/random_times.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dplab/errors.hpp"
#include "dplab/quadrature.hpp"
#include "dplab/rng.hpp"

namespace dplab {

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);
const double kSqrtPiOver2 = std::sqrt(std::numbers::pi / 2.0);

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

double remaining(const PathBundle& b, int i) {
  if (i < 0 || i >= b.grid.n) throw std::domain_error("state functions need 0 <= t < T");
  return b.grid.T - b.grid.t(i);
}

int index_of(const PathBundle& b, double t) {
  if (!(t >= 0.0) || t >= b.grid.T) throw std::domain_error("state functions need 0 <= t < T");
  int i = static_cast<int>(std::floor(t / b.grid.dt + 1e-9));
  return std::min(i, b.grid.n - 1);
}

}  // namespace

double CoxIntensity::operator()(double, double w) const {
  switch (preset) {
    case Preset::constant:
      return a;
    case Preset::affine_abs_w:
      return a + b * std::abs(w);
  }
  return a;
}

RandomTimeModel RandomTimeModel::cox(CoxIntensity intensity) {
  if (intensity.a < 0.0 || intensity.b < 0.0) throw ConfigError("Cox intensity must be nonnegative");
  RandomTimeModel m;
  m.kind = TimeKind::cox;
  m.intensity = intensity;
  return m;
}

RandomTimeModel RandomTimeModel::argmax() {
  RandomTimeModel m;
  m.kind = TimeKind::argmax;
  return m;
}

RandomTimeModel RandomTimeModel::half_final(CrossingRule rule) {
  RandomTimeModel m;
  m.kind = TimeKind::half_final;
  m.crossing = rule;
  return m;
}

std::string RandomTimeModel::name() const {
  switch (kind) {
    case TimeKind::cox:
      return "cox";
    case TimeKind::argmax:
      return "argmax";
    case TimeKind::half_final:
      return "half_final";
  }
  return "?";
}

// ---------------------------------------------------------------- half-final

namespace half_final {

double h(double x) {
  x = std::abs(x);
  if (x == 0.0) return 0.0;
  auto f = [](double y) { return y * y * std::exp(-0.5 * y * y); };
  return kSqrt2OverPi * integrate_adaptive(f, 0.0, x, 1e-12);
}

double Z(double w, double r) {
  if (!(r > 0.0)) throw std::domain_error("Z needs t < T");
  const double x = std::abs(w) / std::sqrt(r);
  if (x == 0.0) return 1.0;
  auto f = [](double y) { return y * y * std::exp(-0.5 * y * y); };
  return kSqrt2OverPi * integrate_adaptive(f, x, std::numeric_limits<double>::infinity(), 1e-12);
}

double scaled_tail(double x) {
  x = std::abs(x);
  if (x <= 26.0) return x + kSqrtPiOver2 * std::exp(0.5 * x * x) * std::erfc(x / std::numbers::sqrt2);
  auto f = [x](double u) { return (x + u) * (x + u) * std::exp(-x * u - 0.5 * u * u); };
  return integrate_adaptive(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

double Z_fast(double w, double r) {
  const double x = std::abs(w) / std::sqrt(r);
  return kSqrt2OverPi * std::exp(-0.5 * x * x) * scaled_tail(x);
}

double intensity(double w, double r) {
  return kSqrt2OverPi * std::abs(w) * std::exp(-0.5 * w * w / r) / (r * std::sqrt(r));
}

double intensity_over_Z(double w, double r) {
  const double x = std::abs(w) / std::sqrt(r);
  return x / (r * scaled_tail(x));
}

double trace_displayed(double w, double r) {
  return kSqrt2OverPi * (-sgn(w) * w * w + std::abs(w)) / (r * std::sqrt(r)) * std::exp(-0.5 * w * w / r);
}

double trace_consistent(double w, double r) {
  const double x2 = w * w / r;
  return -sgn(w) * kSqrt2OverPi * x2 * std::exp(-0.5 * x2) / std::sqrt(r);
}

double trace_over_Z(double w, double r, TraceConvention conv) {
  if (conv == TraceConvention::consistent) return drift_before(w, r);
  const double x = std::abs(w) / std::sqrt(r);
  return (-sgn(w) * w * w + std::abs(w)) / (r * std::sqrt(r) * scaled_tail(x));
}

double drift_before(double w, double r) {
  const double x = std::abs(w) / std::sqrt(r);
  return -sgn(w) * x * x / (std::sqrt(r) * scaled_tail(x));
}

DriftValue drift_after(double w, double wT, double r) {
  const double bridge = (wT - w) / r;
  if (wT == 0.0) {
    // phi ~ -w*wT/r as wT -> 0, so -wT/(r*phi) -> 1/w
    if (w == 0.0) return {std::numeric_limits<double>::quiet_NaN(), true};
    return {bridge + 1.0 / w, false};
  }
  const double phi = -std::expm1((2.0 * w * wT - wT * wT) / (2.0 * r));
  if (phi == 0.0) return {std::numeric_limits<double>::quiet_NaN(), true};
  return {bridge - wT / (r * phi), false};
}

double bridge_crossing_probability(double d0, double d1, double dt) {
  if (d0 * d1 <= 0.0) return 1.0;
  return std::exp(-2.0 * d0 * d1 / dt);
}

}  // namespace half_final

// ---------------------------------------------------------------- argmax

namespace argmax {

double Z(double k, double r) { return std::erfc(k / std::sqrt(2.0 * r)); }

double trace(double k, double r) {
  return 2.0 * std::exp(-k * k / (2.0 * r)) / std::sqrt(2.0 * std::numbers::pi * r);
}

double singular_coeff(double r) { return kSqrt2OverPi / std::sqrt(r); }

}  // namespace argmax

// ---------------------------------------------------------------- dispatch

std::vector<double> cox_cumulative(const RandomTimeModel& model, const PathBundle& b) {
  std::vector<double> L(b.grid.n + 1, 0.0);
  for (int i = 0; i < b.grid.n; ++i)
    L[i + 1] = L[i] + model.intensity(b.grid.t(i), b.brownian.W[i]) * b.grid.dt;
  return L;
}

DefaultTime sample_default_time(const RandomTimeModel& model, const PathBundle& b) {
  const auto& W = b.brownian.W;
  const int n = b.grid.n;
  DefaultTime d;
  switch (model.kind) {
    case TimeKind::cox: {
      CounterRng rng(b.seed, StreamTag::barrier);
      const double E = rng.exponential();
      double L = 0.0;
      d.step = n;
      d.tau = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        const double lam = model.intensity(b.grid.t(i), W[i]);
        const double next = L + lam * b.grid.dt;
        if (lam > 0.0 && next >= E) {
          d.defaulted = true;
          d.step = i;
          d.tau = std::min(b.grid.t(i) + (E - L) / lam, b.grid.t(i + 1));
          if (d.tau <= b.grid.t(i)) d.tau = std::nextafter(b.grid.t(i), b.grid.T);
          break;
        }
        L = next;
      }
      return d;
    }
    case TimeKind::argmax: {
      int j = 0;
      for (int i = 1; i <= n; ++i)
        if (W[i] > W[j]) j = i;
      d.defaulted = true;
      d.step = j - 1;
      d.tau = b.grid.t(j);
      return d;
    }
    case TimeKind::half_final: {
      const double level = 0.5 * W[n];
      CounterRng rng(b.seed, StreamTag::crossing);
      d.defaulted = true;
      d.step = -1;
      d.tau = 0.0;
      for (int i = n - 1; i >= 0; --i) {
        const double d0 = W[i] - level, d1 = W[i + 1] - level;
        bool cross = d0 * d1 < 0.0 || (d1 == 0.0 && i + 1 < n);
        if (!cross && model.crossing == CrossingRule::bridge && d0 != 0.0 && d1 != 0.0)
          cross = rng.uniform_at(static_cast<std::uint64_t>(i)) <
                  half_final::bridge_crossing_probability(d0, d1, b.grid.dt);
        if (cross) {
          d.step = i;
          d.tau = b.grid.t(i + 1);
          break;
        }
      }
      return d;
    }
  }
  return d;
}

double azema_Z(const RandomTimeModel& model, const PathBundle& b, int i) {
  const double r = remaining(b, i);
  const double w = b.brownian.W[i];
  switch (model.kind) {
    case TimeKind::cox:
      return std::exp(-cox_cumulative(model, b)[i]);
    case TimeKind::argmax:
      return argmax::Z(b.brownian.M[i] - w, r);
    case TimeKind::half_final:
      return half_final::Z(w, r);
  }
  return 1.0;
}

double azema_Z_at(const RandomTimeModel& model, const PathBundle& b, double t) {
  return azema_Z(model, b, index_of(b, t));
}

double malliavin_trace_indicator(const RandomTimeModel& model, const PathBundle& b, int i,
                                 TraceConvention conv) {
  const double r = remaining(b, i);
  const double w = b.brownian.W[i];
  switch (model.kind) {
    case TimeKind::cox:
      throw Unsupported("Malliavin trace is not available for Cox times (tau is not F_T-measurable)");
    case TimeKind::argmax:
      return argmax::trace(b.brownian.M[i] - w, r);
    case TimeKind::half_final:
      return conv == TraceConvention::displayed ? half_final::trace_displayed(w, r)
                                                : half_final::trace_consistent(w, r);
  }
  return 0.0;
}

CompensatorPart compensator(const RandomTimeModel& model, const PathBundle& b, int i) {
  const double r = remaining(b, i);
  const double w = b.brownian.W[i];
  CompensatorPart c;
  switch (model.kind) {
    case TimeKind::cox:
      c.ac_density = std::exp(-cox_cumulative(model, b)[i]) * model.intensity(b.grid.t(i), w);
      break;
    case TimeKind::argmax:
      c.singular = CompensatorPart::Singular::proportional_to_dM;
      c.singular_coeff = argmax::singular_coeff(r);
      break;
    case TimeKind::half_final:
      c.ac_density = half_final::intensity(w, r);
      break;
  }
  return c;
}

TimeClassification classify(const RandomTimeModel& model) {
  switch (model.kind) {
    case TimeKind::cox:
      return {true, true, false, false};
    case TimeKind::half_final:
      return {true, false, true, true};
    case TimeKind::argmax:
      return {false, false, true, true};
  }
  return {};
}

DriftValue g_drift(const RandomTimeModel& model, const PathBundle& b, int i, bool defaulted) {
  if (model.kind != TimeKind::half_final)
    throw Unsupported("closed-form G-drift is only available for the half-final time");
  const double r = remaining(b, i);
  const double w = b.brownian.W[i];
  if (!defaulted) return {half_final::drift_before(w, r), false};
  return half_final::drift_after(w, b.brownian.W[b.grid.n], r);
}

}  // namespace dplab
