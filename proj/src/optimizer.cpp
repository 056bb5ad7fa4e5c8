#include "dplab/optimizer.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dplab/errors.hpp"

namespace dplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf, hi = kInf;
};

void restrict(Interval& I, double coef, double eps) {
  if (coef > 0.0) I.lo = std::max(I.lo, (eps - 1.0) / coef);
  if (coef < 0.0) I.hi = std::min(I.hi, (eps - 1.0) / coef);
}

Interval admissible(const OptimalityInputs& in, bool with_kappa, double eps) {
  Interval I;
  for (const auto& a : in.atoms) restrict(I, a.theta, eps);
  if (with_kappa) restrict(I, in.kappa, eps);
  if (!(I.lo < I.hi)) throw NoAdmissibleOptimum("admissible interval for pi is empty");
  return I;
}

double jump_part(const OptimalityInputs& in, double pi) {
  double s = 0.0;
  for (const auto& a : in.atoms) s += a.lambda * pi * a.theta * a.theta / (1.0 + pi * a.theta);
  return s;
}

double jump_slope(const OptimalityInputs& in, double pi) {
  double s = 0.0;
  for (const auto& a : in.atoms) {
    const double d = 1.0 + pi * a.theta;
    s += a.lambda * a.theta * a.theta / (d * d);
  }
  return s;
}

template <class F, class DF>
Solution bracket_solve(F f, DF df, Interval I, double guess, const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  guess = std::clamp(std::isfinite(guess) ? guess : 0.0, std::isfinite(I.lo) ? I.lo : -1e300,
                     std::isfinite(I.hi) ? I.hi : 1e300);
  double a, b, fa, fb;
  if (std::isfinite(I.lo)) {
    a = I.lo;
    fa = f(a);
    if (!(fa > 0.0)) {
      std::ostringstream os;
      os << "no interior optimum: residual " << fa << " <= 0 at the lower admissibility bound " << a;
      throw NoAdmissibleOptimum(os.str());
    }
  } else {
    double step = 1.0;
    a = std::min(guess, I.hi) - step;
    fa = f(a);
    for (int k = 0; !(fa > 0.0); ++k) {
      if (k >= cfg.expansion_limit) throw NoAdmissibleOptimum("no interior optimum: residual stays <= 0 as pi -> -inf");
      step *= 2.0;
      a -= step;
      fa = f(a);
    }
  }
  if (std::isfinite(I.hi)) {
    b = I.hi;
    fb = f(b);
    if (!(fb < 0.0)) {
      std::ostringstream os;
      os << "no interior optimum: residual " << fb << " >= 0 at the upper admissibility bound " << b;
      throw NoAdmissibleOptimum(os.str());
    }
  } else {
    double step = 1.0;
    b = std::max(guess, a) + step;
    fb = f(b);
    for (int k = 0; !(fb < 0.0); ++k) {
      if (k >= cfg.expansion_limit) throw NoAdmissibleOptimum("no interior optimum: residual stays >= 0 as pi -> +inf");
      step *= 2.0;
      b += step;
      fb = f(b);
    }
  }
  double x = std::clamp(guess, a, b);
  if (x == a || x == b) x = 0.5 * (a + b);
  double fx = f(x);
  Solution s;
  for (s.iterations = 1; s.iterations <= cfg.max_iter; ++s.iterations) {
    if (std::abs(fx) < cfg.tol) break;
    if (fx > 0.0) a = x; else b = x;
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    const double d = df(x);
    double nx = (d < 0.0) ? x - fx / d : a - 1.0;
    if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
    x = nx;
    fx = f(x);
  }
  s.pi = x;
  s.residual = fx;
  return s;
}

}  // namespace

double after_default_residual(const OptimalityInputs& in, double pi) {
  return in.excess + in.sigma * in.info_drift - pi * in.sigma * in.sigma - jump_part(in, pi);
}

double before_default_residual(const OptimalityInputs& in, double pi) {
  if (!(in.Z > 0.0)) throw std::domain_error("Z_{s-} must be positive before default");
  const double tz = in.trace / in.Z;
  double jumps = 0.0;
  for (const auto& a : in.atoms) jumps += a.lambda * a.theta / (1.0 + pi * a.theta);
  return in.excess - pi * in.sigma * in.sigma - jump_part(in, pi) + tz * in.sigma + tz * jumps +
         in.kappa / (1.0 + pi * in.kappa) * in.lambda / in.Z;
}

double quadratic_residual(double a, double b, double kappa, double pi) {
  return pi - a - b * kappa / (1.0 + pi * kappa);
}

Solution solve_after_default(const OptimalityInputs& in, const SolverConfig& cfg) {
  if (in.sigma == 0.0 && in.atoms.empty()) throw std::domain_error("degenerate first-order condition: no sigma, no atoms");
  const Interval I = admissible(in, false, cfg.eps);
  const double s2 = in.sigma * in.sigma;
  const double guess = s2 > 0.0 ? (in.excess + in.sigma * in.info_drift) / s2 : 0.0;
  return bracket_solve([&](double p) { return after_default_residual(in, p); },
                       [&](double p) { return -s2 - jump_slope(in, p); }, I, guess, cfg);
}

Solution solve_before_default(const OptimalityInputs& in, const SolverConfig& cfg) {
  if (!in.intensity_hypothesis)
    throw NoAdmissibleOptimum(
        "intensity hypothesis fails for this random time; the log-utility before-default condition has no "
        "solution (necessity direction)");
  if (in.sigma == 0.0 && in.atoms.empty()) throw std::domain_error("degenerate first-order condition: no sigma, no atoms");
  const Interval I = admissible(in, true, cfg.eps);
  const double s2 = in.sigma * in.sigma;
  const double tz = in.trace / in.Z, lz = in.lambda / in.Z;
  double guess = 0.0;
  if (s2 > 0.0 && in.atoms.empty()) guess = solve_quadratic_closed_form(in.excess / s2 + tz / in.sigma, lz / s2, in.kappa);
  auto df = [&](double p) {
    const double qk = 1.0 + p * in.kappa;
    return -s2 - (1.0 + tz) * jump_slope(in, p) - in.kappa * in.kappa / (qk * qk) * lz;
  };
  return bracket_solve([&](double p) { return before_default_residual(in, p); }, df, I, guess, cfg);
}

double solve_quadratic_closed_form(double a, double b, double kappa) {
  if (kappa == 0.0) throw std::domain_error("quadratic closed form needs kappa != 0");
  if (b < 0.0) throw std::domain_error("quadratic closed form needs b >= 0");
  const double ak = a * kappa;
  const double root = std::sqrt((1.0 + ak) * (1.0 + ak) + 4.0 * b * kappa * kappa);
  if (1.0 - ak > 0.0) return 2.0 * (a + b * kappa) / (1.0 - ak + root);
  return (ak - 1.0 + root) / (2.0 * kappa);
}

OptimalityInputs before_inputs(const RandomTimeModel& model, const MarketSpec& spec, const PathState& st,
                               TraceConvention conv) {
  OptimalityInputs in;
  const double t = st.t;
  in.excess = spec.mu.at(t, false) - spec.rho.at(t, false);
  in.sigma = spec.sigma.at(t, false);
  for (std::size_t j = 0; j < spec.levy.size(); ++j) in.atoms.push_back({spec.theta[j].at(t, false), spec.levy[j].rate});
  in.kappa = spec.kappa.before.at(t);
  in.intensity_hypothesis = classify(model).intensity_hypothesis;
  const auto& b = *st.bundle;
  const double r = b.grid.T - t;
  switch (model.kind) {
    case TimeKind::cox:
      // immersion: trace 0, G-intensity lambda = F-density / Z
      in.lambda = model.intensity(t, st.W());
      break;
    case TimeKind::half_final:
      // Z is folded into the ratios for stability near T
      in.trace = half_final::trace_over_Z(st.W(), r, conv);
      in.lambda = half_final::intensity_over_Z(st.W(), r);
      break;
    case TimeKind::argmax:
      in.Z = argmax::Z(b.brownian.M[st.i] - st.W(), r);
      in.trace = argmax::trace(b.brownian.M[st.i] - st.W(), r);
      break;
  }
  return in;
}

OptimalityInputs after_inputs(const RandomTimeModel& model, const MarketSpec& spec, const PathState& st,
                              bool info_drift) {
  OptimalityInputs in;
  const double t = st.t;
  in.excess = spec.mu.at(t, true) - spec.rho.at(t, true);
  in.sigma = spec.sigma.at(t, true);
  for (std::size_t j = 0; j < spec.levy.size(); ++j) in.atoms.push_back({spec.theta[j].at(t, true), spec.levy[j].rate});
  in.kappa = spec.kappa.at(t, true);
  if (info_drift && model.kind == TimeKind::half_final) {
    const DriftValue d = g_drift(model, *st.bundle, st.i, true);
    if (!d.singular && std::isfinite(d.value)) in.info_drift = d.value;
  }
  return in;
}

Strategy build_strategy(const RandomTimeModel& model, const MarketSpec& spec, const BuildOptions& opt) {
  validate(spec);
  if (!classify(model).intensity_hypothesis)
    throw NoAdmissibleOptimum("no optimal strategy for the " + model.name() +
                              " time: the intensity hypothesis fails, so the before-default condition has no solution");
  Strategy s;
  s.name = "optimal:" + model.name();
  s.eps = opt.solver.eps;
  s.before = [model, spec, opt](const PathState& st) {
    return solve_before_default(before_inputs(model, spec, st, opt.trace), opt.solver).pi;
  };
  s.after = [model, spec, opt](const PathState& st) {
    return solve_after_default(after_inputs(model, spec, st, opt.info_drift_after), opt.solver).pi;
  };
  return s;
}

}  // namespace dplab
