#include "dplab/market.hpp"

#include <cmath>

#include "dplab/errors.hpp"
#include "dplab/parallel.hpp"
#include "dplab/rng.hpp"
#include "dplab/stats.hpp"

namespace dplab {

namespace {

void check_coef(const Switching& c, double lo, const std::string& what) {
  if (!(c.before.value > lo) || c.before.slope != 0.0) {
    // sloped jump coefficients would need a path-wise check; keep them constant
    if (c.before.slope != 0.0) throw ConfigError(what + " must be constant in t");
    throw ConfigError(what);
  }
  if (c.after && (!(c.after->value > lo) || c.after->slope != 0.0)) throw ConfigError(what + " (after default)");
}

}  // namespace

void validate(const MarketSpec& spec) {
  validate_levy(spec.levy);
  if (spec.theta.size() != spec.levy.size())
    throw ConfigError("one jump coefficient theta is required per jump atom");
  for (const auto& th : spec.theta) check_coef(th, -1.0, "jump coefficient theta must exceed -1");
  if (spec.kappa.before.value == 0.0 || spec.kappa.before.slope != 0.0)
    throw ConfigError("default jump coefficient kappa must be a nonzero constant (κ ≠ 0)");
  check_coef(spec.kappa, -1.0, "default jump coefficient kappa must exceed -1");
  if (!(spec.s0 > 0.0) || !(spec.x0 > 0.0)) throw ConfigError("initial price and wealth must be positive");
  for (const Switching* s : {&spec.sigma}) {
    if (s->before.value < 0.0 || (s->after && s->after->value < 0.0))
      throw ConfigError("volatility must be nonnegative");
  }
}

Strategy constant_strategy(double pi, double eps) {
  Strategy s;
  s.name = "constant";
  s.before = [pi](const PathState&) { return pi; };
  s.after = s.before;
  s.eps = eps;
  return s;
}

Strategy perturbed(const Strategy& s, const Rule& beta, double delta) {
  Strategy p = s;
  auto b = s.before, a = s.after;
  p.before = [b, beta, delta](const PathState& st) { return b(st) + delta * beta(st); };
  p.after = [a, beta, delta](const PathState& st) { return a(st) + delta * beta(st); };
  return p;
}

Strategy shifted(const Strategy& s, double delta) {
  auto p = perturbed(s, [](const PathState&) { return 1.0; }, delta);
  p.name = s.name + "+shift";
  return p;
}

std::vector<double> simulate_asset(const MarketSpec& spec, const PathBundle& b, const DefaultTime& tau) {
  const int n = b.grid.n;
  const double dt = b.grid.dt;
  std::vector<double> S(n + 1);
  double lnS = std::log(spec.s0);
  S[0] = spec.s0;
  std::size_t ev = 0;
  const auto& events = b.jumps.events;
  if (tau.defaulted && tau.step < 0) {
    const double k = spec.kappa.before.at(tau.tau);
    if (!(1.0 + k > 0.0)) throw AdmissibilityError("1 + kappa must be positive", -1, "kappa");
    lnS += std::log1p(k);
    S[0] = std::exp(lnS);
  }
  for (int i = 0; i < n; ++i) {
    const double t = b.grid.t(i);
    const bool dead = !tau.alive_at(i);
    const double mu = spec.mu.at(t, dead), sig = spec.sigma.at(t, dead);
    double drift = mu - 0.5 * sig * sig;
    for (std::size_t j = 0; j < spec.levy.size(); ++j) drift -= spec.levy[j].rate * spec.theta[j].at(t, dead);
    double inc = drift * dt + sig * b.brownian.dW[i];
    for (; ev < events.size() && events[ev].step == i; ++ev) {
      const double th = spec.theta[events[ev].atom].at(t, dead);
      if (!(1.0 + th > 0.0)) throw AdmissibilityError("1 + theta must be positive", i, "theta");
      inc += std::log1p(th);
    }
    if (tau.defaulted && tau.step == i) {
      const double k = spec.kappa.before.at(tau.tau);
      if (!(1.0 + k > 0.0)) throw AdmissibilityError("1 + kappa must be positive", i, "kappa");
      inc += std::log1p(k);
    }
    lnS += inc;
    S[i + 1] = std::exp(lnS);
  }
  return S;
}

WealthPath simulate_wealth(const MarketSpec& spec, const Strategy& strategy, const PathBundle& b,
                           const DefaultTime& tau) {
  const int n = b.grid.n;
  const double dt = b.grid.dt;
  const double eps = strategy.eps;
  WealthPath w;
  w.logX.assign(n + 1, 0.0);
  w.pi.assign(n, 0.0);
  w.defaulted = tau.defaulted;
  w.default_step = tau.step;
  double lnX = std::log(spec.x0);

  PathState st;
  st.bundle = &b;
  st.tau = tau.tau;

  auto default_jump = [&](double pi, int step) {
    const double k = spec.kappa.before.at(tau.tau);
    const double one = 1.0 + pi * k;
    if (!(one > eps))
      throw AdmissibilityError("1 + pi*kappa <= eps at step " + std::to_string(step), step, "1+pi*kappa>eps");
    w.default_pi = pi;
    return std::log(one);
  };

  if (tau.defaulted && tau.step < 0) {
    st.i = 0;
    st.t = 0.0;
    st.defaulted = false;
    lnX += default_jump(strategy.before(st), -1);
  }
  w.logX[0] = lnX;

  const auto& events = b.jumps.events;
  std::size_t ev = 0;
  for (int i = 0; i < n; ++i) {
    const double t = b.grid.t(i);
    const bool dead = !tau.alive_at(i);
    st.i = i;
    st.t = t;
    st.defaulted = dead;
    const double pi = dead ? strategy.after(st) : strategy.before(st);
    if (!std::isfinite(pi)) throw AdmissibilityError("non-finite strategy at step " + std::to_string(i), i, "finite");
    const double rho = spec.rho.at(t, dead), mu = spec.mu.at(t, dead), sig = spec.sigma.at(t, dead);
    double drift = rho + pi * (mu - rho) - 0.5 * pi * pi * sig * sig;
    for (std::size_t j = 0; j < spec.levy.size(); ++j) {
      const double th = spec.theta[j].at(t, dead);
      if (!(1.0 + pi * th > eps))
        throw AdmissibilityError("1 + pi*theta <= eps at step " + std::to_string(i), i, "1+pi*theta>eps");
      drift -= spec.levy[j].rate * pi * th;
    }
    double inc = drift * dt + pi * sig * b.brownian.dW[i];
    for (; ev < events.size() && events[ev].step == i; ++ev)
      inc += std::log1p(pi * spec.theta[events[ev].atom].at(t, dead));
    if (tau.defaulted && tau.step == i) inc += default_jump(pi, i);
    lnX += inc;
    w.logX[i + 1] = lnX;
    w.pi[i] = pi;
  }
  w.XT = std::exp(lnX);
  return w;
}

AdmissibilityReport check_admissibility(const Strategy& strategy, const MarketSpec& spec, const PathBundle& b,
                                        const DefaultTime& tau) {
  AdmissibilityReport rep;
  const int n = b.grid.n;
  PathState st;
  st.bundle = &b;
  st.tau = tau.tau;
  auto fail = [&](int step, const std::string& bound) {
    if (rep.pass) {
      rep.pass = false;
      rep.failing_step = step;
      rep.failing_bound = bound;
    }
  };
  // tau may be +inf on surviving paths; kappa is read at the step time
  if (tau.defaulted && tau.step < 0) {
    st.i = 0;
    st.defaulted = false;
    const double m = 1.0 + strategy.before(st) * spec.kappa.before.at(tau.tau);
    rep.min_default_margin = std::min(rep.min_default_margin, m);
    if (!(m > strategy.eps)) fail(-1, "1+pi*kappa>eps");
  }
  for (int i = 0; i < n; ++i) {
    const double t = b.grid.t(i);
    const bool dead = !tau.alive_at(i);
    st.i = i;
    st.t = t;
    st.defaulted = dead;
    const double pi = dead ? strategy.after(st) : strategy.before(st);
    const double rho = spec.rho.at(t, dead), mu = spec.mu.at(t, dead), sig = spec.sigma.at(t, dead);
    double integrand = std::abs(pi * (mu - rho)) + pi * pi * sig * sig;
    for (std::size_t j = 0; j < spec.levy.size(); ++j) {
      const double th = spec.theta[j].at(t, dead);
      const double m = 1.0 + pi * th;
      rep.min_jump_margin = std::min(rep.min_jump_margin, m);
      if (!(m > strategy.eps)) fail(i, "1+pi*theta>eps");
      integrand += spec.levy[j].rate * pi * pi * th * th;
    }
    if (!dead) {
      const double m = 1.0 + pi * spec.kappa.before.at(t);
      rep.min_default_margin = std::min(rep.min_default_margin, m);
      if (!(m > strategy.eps)) fail(i, "1+pi*kappa>eps");
    }
    rep.integrand += integrand * b.grid.dt;
  }
  return rep;
}

UtilitySpec UtilitySpec::power(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("power utility needs gamma in (0,1)");
  UtilitySpec u;
  u.kind = Kind::power;
  u.gamma = gamma;
  return u;
}

double utility_value(double x, const UtilitySpec& u) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  if (u.kind == UtilitySpec::Kind::log) return x > 0.0 ? std::log(x) : ninf;
  if (x < 0.0) return ninf;
  return std::pow(x, u.gamma) / u.gamma;
}

double marginal_times_wealth(double x, const UtilitySpec& u) {
  if (u.kind == UtilitySpec::Kind::log) return 1.0;
  return std::pow(x, u.gamma);
}

double utility_of_log(double lnx, const UtilitySpec& u) {
  if (u.kind == UtilitySpec::Kind::log) return lnx;
  return std::exp(u.gamma * lnx) / u.gamma;
}

namespace {

struct ObjectiveAcc {
  MeanAcc U, alive, dead, rate;
  long bad = 0;
  std::string first;  // earliest violation, for the message
  int first_step = -1;
  void merge(const ObjectiveAcc& o) {
    U.merge(o.U);
    alive.merge(o.alive);
    dead.merge(o.dead);
    rate.merge(o.rate);
    if (first.empty()) {
      first = o.first;
      first_step = o.first_step;
    }
    bad += o.bad;
  }
};

}  // namespace

ObjectiveEstimate estimate_objective(const MarketSpec& spec, const RandomTimeModel& model, const Strategy& strategy,
                                     const UtilitySpec& u, const McConfig& mc) {
  if (mc.paths < 2) throw ConfigError("need at least two paths");
  validate(spec);
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  auto parts = run_chunks<ObjectiveAcc>(mc.paths, mc.threads, [&](long p, ObjectiveAcc& acc) {
    PathBundle b = make_bundle(grid, spec.levy, path_seed(mc.seed, static_cast<std::uint64_t>(p)));
    const DefaultTime tau = sample_default_time(model, b);
    if (tau.defaulted) separate_from_default(b.jumps, grid, tau.tau, b.seed);
    try {
      const WealthPath w = simulate_wealth(spec, strategy, b, tau);
      const double U = utility_of_log(w.logX.back(), u);
      const bool dead = tau.defaulted;
      acc.U.add(U);
      acc.alive.add(dead ? 0.0 : U);
      acc.dead.add(dead ? U : 0.0);
      acc.rate.add(dead ? 1.0 : 0.0);
    } catch (const AdmissibilityError& e) {
      if (acc.first.empty()) {
        acc.first = "path " + std::to_string(p) + ": " + e.what() + " (bound " + e.bound() + ")";
        acc.first_step = e.step();
      }
      ++acc.bad;
    }
  });
  const ObjectiveAcc tot = fold(parts);
  if (tot.bad > 0)
    throw AdmissibilityError(std::to_string(tot.bad) + " of " + std::to_string(mc.paths) +
                                 " paths violate admissibility; first at " + tot.first,
                             tot.first_step, "aggregate");
  ObjectiveEstimate e;
  e.paths = mc.paths;
  e.alive_term = tot.alive.mean();
  e.default_term = tot.dead.mean();
  e.J = e.alive_term + e.default_term;
  e.se = tot.U.se();
  e.default_rate = tot.rate.mean();
  e.default_rate_se = tot.rate.se();
  return e;
}

}  // namespace dplab
