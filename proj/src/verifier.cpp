#include "dplab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dplab/errors.hpp"
#include "dplab/parallel.hpp"
#include "dplab/rng.hpp"

namespace dplab {

namespace {

struct Sample {
  PathBundle b;
  DefaultTime tau;
};

Sample sample_path(const TimeGrid& grid, const LevySpec& levy, const RandomTimeModel& model, std::uint64_t seed,
                   long p) {
  Sample s;
  s.b = make_bundle(grid, levy, path_seed(seed, static_cast<std::uint64_t>(p)));
  s.tau = sample_default_time(model, s.b);
  if (s.tau.defaulted) separate_from_default(s.b.jumps, grid, s.tau.tau, s.b.seed);
  return s;
}

// d/dpi of every log-wealth increment; the default jump sits in its step.
struct PsiPath {
  std::vector<double> d;
  double at_zero = 0.0;  // default at t = 0
};

PsiPath psi_increments(const MarketSpec& spec, const WealthPath& w, const PathBundle& b, const DefaultTime& tau) {
  const int n = b.grid.n;
  const double dt = b.grid.dt;
  PsiPath out;
  out.d.assign(n, 0.0);
  const double k = spec.kappa.before.at(tau.tau);
  const double jump = tau.defaulted ? k / (1.0 + w.default_pi * k) : 0.0;
  if (tau.defaulted && tau.step < 0) out.at_zero = jump;
  std::size_t ev = 0;
  for (int i = 0; i < n; ++i) {
    const double t = b.grid.t(i);
    const bool dead = !tau.alive_at(i);
    const double pi = w.pi[i];
    const double rho = spec.rho.at(t, dead), mu = spec.mu.at(t, dead), sig = spec.sigma.at(t, dead);
    double drift = mu - rho - pi * sig * sig;
    for (std::size_t j = 0; j < spec.levy.size(); ++j) drift -= spec.levy[j].rate * spec.theta[j].at(t, dead);
    double v = drift * dt + sig * b.brownian.dW[i];
    for (; ev < b.jumps.events.size() && b.jumps.events[ev].step == i; ++ev) {
      const double th = spec.theta[b.jumps.events[ev].atom].at(t, dead);
      v += th / (1.0 + pi * th);
    }
    if (tau.defaulted && tau.step == i) v += jump;
    out.d[i] = v;
  }
  return out;
}

PathState state_at(const PathBundle& b, const DefaultTime& tau, int i, bool defaulted) {
  PathState st;
  st.bundle = &b;
  st.i = i;
  st.t = b.grid.t(i);
  st.defaulted = defaulted;
  st.tau = tau.tau;
  return st;
}

// pi along an already simulated path, plus d*beta
Strategy replay(const WealthPath& w, const DefaultTime& tau, const Rule& beta, double d, double eps) {
  Strategy s;
  s.eps = eps;
  s.before = [&w, &tau, beta, d](const PathState& st) {
    return (tau.defaulted && tau.step < 0 ? w.default_pi : w.pi[st.i]) + d * beta(st);
  };
  s.after = [&w, beta, d](const PathState& st) { return w.pi[st.i] + d * beta(st); };
  return s;
}

struct GateauxAcc {
  MeanAcc psi, central, second, J, gap;
  long bad = 0;
  void merge(const GateauxAcc& o) {
    psi.merge(o.psi);
    central.merge(o.central);
    second.merge(o.second);
    J.merge(o.J);
    gap.merge(o.gap);
    bad += o.bad;
  }
};

Estimate est(const MeanAcc& a) { return {a.mean(), a.se()}; }

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

// ------------------------------------------------------------------ Gateaux

GateauxEstimate gateaux_derivative(const MarketSpec& spec, const RandomTimeModel& model, const Strategy& pi,
                                   const Rule& beta, const UtilitySpec& u, const McConfig& mc, double delta) {
  validate(spec);
  if (mc.paths < 2) throw ConfigError("need at least two paths");
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  for (int attempt = 0; attempt < 40; ++attempt, delta *= 0.5) {
    auto parts = run_chunks<GateauxAcc>(mc.paths, mc.threads, [&](long p, GateauxAcc& acc) {
      const Sample s = sample_path(grid, spec.levy, model, mc.seed, p);
      const WealthPath w0 = simulate_wealth(spec, pi, s.b, s.tau);
      const PsiPath d = psi_increments(spec, w0, s.b, s.tau);
      double Psi = 0.0;
      if (s.tau.defaulted && s.tau.step < 0) Psi += beta(state_at(s.b, s.tau, 0, false)) * d.at_zero;
      for (int i = 0; i < grid.n; ++i) Psi += beta(state_at(s.b, s.tau, i, !s.tau.alive_at(i))) * d.d[i];
      double Up, Um;
      try {
        Up = utility_of_log(simulate_wealth(spec, replay(w0, s.tau, beta, delta, pi.eps), s.b, s.tau).logX.back(), u);
        Um = utility_of_log(simulate_wealth(spec, replay(w0, s.tau, beta, -delta, pi.eps), s.b, s.tau).logX.back(), u);
      } catch (const AdmissibilityError&) {
        ++acc.bad;
        return;
      }
      const double U0 = utility_of_log(w0.logX.back(), u);
      const double weighted = marginal_times_wealth(w0.XT, u) * Psi;
      const double c = (Up - Um) / (2.0 * delta);
      acc.psi.add(weighted);
      acc.central.add(c);
      acc.second.add((Up - 2.0 * U0 + Um) / (delta * delta));
      acc.J.add(U0);
      acc.gap.add(weighted - c);
    });
    const GateauxAcc tot = fold(parts);
    if (tot.bad > 0) continue;  // shrink delta until the perturbation is admissible on every path
    GateauxEstimate g;
    g.psi = est(tot.psi);
    g.central = est(tot.central);
    g.second = est(tot.second);
    g.J = est(tot.J);
    g.delta = delta;
    // joint SE of the two estimators; the paired gap carries an O(delta^2)
    // difference bias whose own SE is far smaller, so it is not the yardstick
    const double jse = std::hypot(g.psi.se, g.central.se);
    g.agreement_z = jse > 0 ? (g.psi.value - g.central.value) / jse : 0.0;
    g.paths = mc.paths;
    g.seed = mc.seed;
    return g;
  }
  throw AdmissibilityError("no admissible perturbation size found", -1, "1+pi*theta>eps");
}

PairedComparison compare_strategies(const MarketSpec& spec, const RandomTimeModel& model, const Strategy& a,
                                    const Strategy& b, const UtilitySpec& u, const McConfig& mc) {
  validate(spec);
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  struct Acc {
    MeanAcc a, b, d;
    void merge(const Acc& o) {
      a.merge(o.a);
      b.merge(o.b);
      d.merge(o.d);
    }
  };
  auto parts = run_chunks<Acc>(mc.paths, mc.threads, [&](long p, Acc& acc) {
    const Sample s = sample_path(grid, spec.levy, model, mc.seed, p);
    const double Ua = utility_of_log(simulate_wealth(spec, a, s.b, s.tau).logX.back(), u);
    const double Ub = utility_of_log(simulate_wealth(spec, b, s.b, s.tau).logX.back(), u);
    acc.a.add(Ua);
    acc.b.add(Ub);
    acc.d.add(Ua - Ub);
  });
  const Acc tot = fold(parts);
  return {est(tot.a), est(tot.b), est(tot.d), mc.paths};
}

// ------------------------------------------------------------------ Q-martingale

MartingaleResidual martingale_residual(const MarketSpec& spec, const RandomTimeModel& model, const Strategy& pi,
                                       const UtilitySpec& u, const McConfig& mc, int buckets, long min_support) {
  validate(spec);
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  if (buckets < 1 || buckets > grid.n) throw ConfigError("bucket count must lie in [1, steps]");
  constexpr int F = 5;
  const int stride = 1 + buckets * (1 + F);
  struct Rows {
    std::vector<double> v;
    void merge(const Rows& o) { v.insert(v.end(), o.v.begin(), o.v.end()); }
  };
  std::vector<int> start(buckets + 1);
  for (int k = 0; k <= buckets; ++k) start[k] = static_cast<int>(static_cast<long>(k) * grid.n / buckets);

  auto parts = run_chunks<Rows>(mc.paths, mc.threads, [&](long p, Rows& acc) {
    const Sample s = sample_path(grid, spec.levy, model, mc.seed, p);
    const WealthPath w = simulate_wealth(spec, pi, s.b, s.tau);
    const PsiPath d = psi_increments(spec, w, s.b, s.tau);
    acc.v.push_back(marginal_times_wealth(w.XT, u));
    for (int k = 0; k < buckets; ++k) {
      double y = 0.0;
      for (int i = start[k]; i < start[k + 1]; ++i) y += d.d[i];
      const int i0 = start[k];
      const double t = grid.t(i0);
      const bool hit = s.tau.defaulted && s.tau.step + 1 <= i0;  // tau <= t
      acc.v.push_back(y);
      acc.v.push_back(1.0);
      acc.v.push_back(s.b.brownian.W[i0]);
      acc.v.push_back(s.b.brownian.M[i0]);
      acc.v.push_back(hit ? 1.0 : 0.0);
      acc.v.push_back(hit ? t - s.tau.tau : 0.0);
    }
  });
  const Rows all = fold(parts);
  const long P = mc.paths;
  MartingaleResidual out;
  out.features = {"const", "W_t", "M_t", "1{tau<=t}", "(t-tau)+"};
  out.paths = P;
  out.seed = mc.seed;
  std::vector<double> weights(P);
  double wsum = 0.0;
  for (long p = 0; p < P; ++p) wsum += weights[p] = all.v[p * stride];
  const double wmean = wsum / static_cast<double>(P);
  for (auto& x : weights) x /= wmean;
  {
    std::vector<double> sorted = weights;
    std::sort(sorted.begin(), sorted.end());
    out.weight_max = sorted.back();
    out.weight_q999 = sorted[static_cast<std::size_t>(0.999 * (P - 1))];
  }
  OlsOptions opt;
  opt.min_support = min_support;
  for (int k = 0; k < buckets; ++k) {
    Eigen::MatrixXd X(P, F);
    Eigen::VectorXd y(P);
    for (long p = 0; p < P; ++p) {
      const double* row = &all.v[p * stride + 1 + k * (1 + F)];
      y[p] = weights[p] * row[0];
      for (int j = 0; j < F; ++j) X(p, j) = row[1 + j];
    }
    MartingaleBucket bk;
    bk.t0 = grid.t(start[k]);
    bk.t1 = grid.t(start[k + 1]);
    bk.fit = ols_hc0(X, y, opt);
    for (int j = 0; j < F; ++j)
      if (bk.fit.kept[j]) bk.max_abs_t = std::max(bk.max_abs_t, std::abs(bk.fit.tstat(j)));
    bk.pass = bk.max_abs_t < 3.0;
    out.max_abs_t = std::max(out.max_abs_t, bk.max_abs_t);
    out.pass = out.pass && bk.pass;
    out.buckets.push_back(std::move(bk));
  }
  return out;
}

// ------------------------------------------------------------------ G-drift

namespace {

struct MeatAcc {
  Eigen::MatrixXd m;
  explicit MeatAcc(int p = 0) : m(Eigen::MatrixXd::Zero(p, p)) {}
  void merge(const MeatAcc& o) {
    if (m.size() == 0) m = Eigen::MatrixXd::Zero(o.m.rows(), o.m.cols());
    if (o.m.size()) m += o.m;
  }
};

// Two-pass streaming OLS over several row sets at once.
// rows(p, emit) calls emit(set, x, y) for every row of path p.
template <class Rows>
std::vector<OlsResult> streaming_fit(long paths, unsigned threads, int sets, int width, Rows rows,
                                     std::vector<long>* counts = nullptr) {
  struct NeAcc {
    std::vector<NormalEquations> ne;
    void merge(const NeAcc& o) {
      if (ne.empty()) ne = o.ne;
      else
        for (std::size_t k = 0; k < ne.size(); ++k) ne[k].merge(o.ne[k]);
    }
  };
  auto pass1 = run_chunks<NeAcc>(paths, threads, [&](long p, NeAcc& acc) {
    if (acc.ne.empty()) acc.ne.assign(sets, NormalEquations(width));
    rows(p, [&](int k, const Eigen::VectorXd& x, double y) { acc.ne[k].add(x, y); });
  });
  NeAcc tot;
  tot.ne.assign(sets, NormalEquations(width));
  for (const auto& part : pass1)
    if (!part.ne.empty())
      for (int k = 0; k < sets; ++k) tot.ne[k].merge(part.ne[k]);
  std::vector<StreamingOls> fits;
  for (int k = 0; k < sets; ++k) fits.push_back(StreamingOls::fit(tot.ne[k]));

  struct MAccM {
    std::vector<MeatAcc> m;
    void merge(const MAccM& o) {
      if (m.empty()) m = o.m;
      else
        for (std::size_t k = 0; k < m.size(); ++k) m[k].merge(o.m[k]);
    }
  };
  auto pass2 = run_chunks<MAccM>(paths, threads, [&](long p, MAccM& acc) {
    if (acc.m.empty())
      for (int k = 0; k < sets; ++k) acc.m.emplace_back(static_cast<int>(fits[k].cols.size()));
    rows(p, [&](int k, const Eigen::VectorXd& x, double y) {
      const double e = fits[k].residual(x, y);
      acc.m[k].m.template selfadjointView<Eigen::Lower>().rankUpdate(fits[k].reduced(x), e * e);
    });
  });
  std::vector<OlsResult> out;
  for (int k = 0; k < sets; ++k) {
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(fits[k].cols.size(), fits[k].cols.size());
    for (const auto& part : pass2)
      if (!part.m.empty()) meat += part.m[k].m;
    out.push_back(fits[k].finish(meat));
    if (counts) counts->push_back(static_cast<long>(tot.ne[k].n));
  }
  return out;
}

}  // namespace

DriftScan g_drift_regression(const RandomTimeModel& model, const McConfig& mc, double singular_k) {
  if (model.kind == TimeKind::argmax) throw Unsupported("G-drift regression needs the half-final time or a Cox control");
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  const double h = grid.dt, sh = std::sqrt(h);
  const bool control = model.kind == TimeKind::cox;
  struct Excl {
    long n = 0;
    void merge(const Excl& o) { n += o.n; }
  };
  auto rows = [&](long p, auto emit) {
    const Sample s = sample_path(grid, {}, model, mc.seed, p);
    const auto& W = s.b.brownian.W;
    const double WT = W[grid.n];
    Eigen::VectorXd x(2);
    x[0] = 1.0;
    for (int i = 0; i + 1 < grid.n; ++i) {
      const double y = s.b.brownian.dW[i] / h;
      const double r = grid.T - grid.t(i);
      if (s.tau.alive_at(i + 1)) {  // tau > t + h
        x[1] = half_final::drift_before(W[i], r);
        emit(0, x, y);
      } else if (!control && !s.tau.alive_at(i)) {  // tau <= t
        const DriftValue a = half_final::drift_after(W[i], WT, r);
        if (a.singular || !std::isfinite(a.value) || std::abs(W[i] - 0.5 * WT) <= singular_k * sh ||
            std::abs(a.value) * sh >= singular_k)
          continue;
        x[1] = a.value;
        emit(1, x, y);
      }
    }
  };
  std::vector<long> counts;
  auto fits = streaming_fit(mc.paths, mc.threads, control ? 1 : 2, 2, rows, &counts);
  // excluded singular states, counted in a separate sweep
  long excluded = 0;
  if (!control) {
    auto parts = run_chunks<Excl>(mc.paths, mc.threads, [&](long p, Excl& acc) {
      const Sample s = sample_path(grid, {}, model, mc.seed, p);
      const auto& W = s.b.brownian.W;
      for (int i = 0; i + 1 < grid.n; ++i) {
        if (s.tau.alive_at(i)) continue;
        const DriftValue a = half_final::drift_after(W[i], W[grid.n], grid.T - grid.t(i));
        if (a.singular || !std::isfinite(a.value) || std::abs(W[i] - 0.5 * W[grid.n]) <= singular_k * sh ||
            std::abs(a.value) * sh >= singular_k)
          ++acc.n;
      }
    });
    excluded = fold(parts).n;
  }
  DriftScan out;
  out.control = control;
  out.paths = mc.paths;
  out.seed = mc.seed;
  out.pass = true;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    DriftRegression r;
    r.sample = k == 0 ? "before" : "after";
    r.fit = fits[k];
    r.excluded = k == 1 ? excluded : 0;
    if (control)
      r.pass = std::abs(r.fit.tstat(1)) < 3.0 && std::abs(r.fit.tstat(0)) < 3.0;
    else
      r.pass = r.fit.beta[1] >= 0.9 && r.fit.beta[1] <= 1.1 && std::abs(r.fit.tstat(0)) < 3.0;
    out.pass = out.pass && r.pass;
    out.regressions.push_back(std::move(r));
  }
  return out;
}

// ------------------------------------------------------------------ argmax probe

SingularityProbe compensator_singularity_probe(const RandomTimeModel& model, const McConfig& mc,
                                               const std::vector<int>& lt_steps) {
  if (model.kind != TimeKind::argmax) throw Unsupported("singularity probe is defined for the argmax time");
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  static constexpr int lengths[3] = {1, 2, 4};
  struct Counts {
    long windows = 0, defaults = 0, violations = 0;
    MeanAcc invZ;
    void merge(const Counts& o) {
      windows += o.windows;
      defaults += o.defaults;
      violations += o.violations;
      invZ.merge(o.invZ);
    }
  };
  // windows (t_i, t_i + L dt], L cycling through 1,2,4 with a per-path offset
  auto visit = [&](long p, auto on_window) {
    const Sample s = sample_path(grid, {}, model, mc.seed, p);
    const auto& W = s.b.brownian.W;
    const auto& M = s.b.brownian.M;
    int c = static_cast<int>(p % 3);
    for (int i = 0; i < grid.n;) {
      const int L = std::min(lengths[c], grid.n - i);
      c = (c + 1) % 3;
      if (s.tau.alive_at(i)) {  // tau > t_i
        const int j = s.tau.step + 1;
        const bool hit = j > i && j <= i + L;
        on_window(i, L, hit, M[i + L] - M[i], M[i] - W[i]);
      }
      i += L;
    }
  };
  auto cparts = run_chunks<Counts>(mc.paths, mc.threads, [&](long p, Counts& acc) {
    visit(p, [&](int i, int, bool hit, double dM, double k) {
      ++acc.windows;
      acc.defaults += hit;
      if (hit && !(dM > 0.0)) ++acc.violations;
      acc.invZ.add(1.0 / argmax::Z(k, grid.T - grid.t(i)));
    });
  });
  const Counts cnt = fold(cparts);

  auto rows = [&](long p, auto emit) {
    Eigen::VectorXd x(3), xf(2);
    visit(p, [&](int i, int L, bool hit, double dM, double) {
      const double dt = L * grid.dt;
      x << 1.0, dt, dM / std::sqrt(grid.T - grid.t(i));
      emit(0, x, hit ? 1.0 : 0.0);
      if (dM == 0.0) {
        xf << 1.0, dt;
        emit(1, xf, hit ? 1.0 : 0.0);
      }
    });
  };
  // two row sets of different width: fit separately
  auto joint = streaming_fit(mc.paths, mc.threads, 1, 3,
                             [&](long p, auto emit) {
                               rows(p, [&](int k, const Eigen::VectorXd& x, double y) {
                                 if (k == 0) emit(0, x, y);
                               });
                             });
  auto flat = streaming_fit(mc.paths, mc.threads, 1, 2,
                            [&](long p, auto emit) {
                              rows(p, [&](int k, const Eigen::VectorXd& x, double y) {
                                if (k == 1) emit(0, x, y);
                              });
                            });
  SingularityProbe out;
  out.windows = cnt.windows;
  out.defaults = cnt.defaults;
  out.violations = cnt.violations;
  out.joint = joint[0];
  out.flat = flat[0];
  out.dM_t = out.joint.tstat(2);
  out.dt_t_given_flat = out.flat.tstat(1);
  out.predicted_coef = std::sqrt(2.0 / std::numbers::pi) * cnt.invZ.mean();
  out.paths = mc.paths;
  out.seed = mc.seed;

  // local-time proxy: E[M_{t+dt} - M_t | W_t = M_t] / dt across resolutions
  const long lt_paths = std::min<long>(mc.paths, 20000);
  std::vector<double> lx, ly;
  for (int n : lt_steps) {
    const TimeGrid g = make_grid(mc.T, n);
    auto parts = run_chunks<MeanAcc>(lt_paths, mc.threads, [&](long p, MeanAcc& acc) {
      const BrownianPath bp = sample_brownian(g, path_seed(mc.seed ^ 0x6c74ULL, static_cast<std::uint64_t>(p) * 4096 + n));
      for (int i = 1; i < n; ++i)
        if (bp.W[i] == bp.M[i]) acc.add((bp.M[i + 1] - bp.M[i]) / g.dt);
    });
    const double proxy = fold(parts).mean();
    out.lt_dt.push_back(g.dt);
    out.lt_proxy.push_back(proxy);
    lx.push_back(std::log(g.dt));
    ly.push_back(std::log(proxy));
  }
  out.lt_slope = lx.size() >= 2 ? ols_slope(lx, ly) : 0.0;
  out.pass = out.violations == 0 && out.dM_t > 3.0 && std::abs(out.dt_t_given_flat) < 3.0 &&
             (lx.size() < 2 || (out.lt_slope >= -0.65 && out.lt_slope <= -0.35));
  return out;
}

// ------------------------------------------------------------------ forward vs Ito

std::string to_string(ForwardPreset p) {
  switch (p) {
    case ForwardPreset::constant:
      return "constant";
    case ForwardPreset::brownian:
      return "W_t";
    case ForwardPreset::sine:
      return "sin(W_t)";
    case ForwardPreset::terminal:
      return "W_T";
  }
  return "?";
}

ForwardReport forward_vs_ito(const McConfig& mc, const std::vector<double>& eps,
                             const std::vector<ForwardPreset>& presets) {
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  ForwardReport out;
  out.paths = mc.paths;
  out.seed = mc.seed;
  std::vector<int> ms;
  std::vector<double> es;
  for (double e : eps) {
    const double m = e / grid.dt;
    const long mr = std::lround(m);
    if (mr < 1 || std::abs(m - mr) > 1e-9 * std::max(1.0, m)) {
      out.skipped.push_back(e);
      continue;
    }
    ms.push_back(static_cast<int>(mr));
    es.push_back(mr * grid.dt);
  }
  if (ms.empty()) throw ConfigError("no eps aligned to the grid");
  const int mmax = *std::max_element(ms.begin(), ms.end());
  const std::size_t np = presets.size(), nm = ms.size();
  struct Acc {
    std::vector<MeanAcc> a;
    void merge(const Acc& o) {
      if (a.empty()) a = o.a;
      else
        for (std::size_t k = 0; k < a.size(); ++k) a[k].merge(o.a[k]);
    }
  };
  auto parts = run_chunks<Acc>(mc.paths, mc.threads, [&](long p, Acc& acc) {
    if (acc.a.empty()) acc.a.resize(np * nm);
    const std::uint64_t seed = path_seed(mc.seed, static_cast<std::uint64_t>(p));
    const BrownianPath bp = sample_brownian(grid, seed);
    std::vector<double> W(bp.W);
    CounterRng ext(seed, StreamTag::extension);
    const double sd = std::sqrt(grid.dt);
    for (int k = 0; k < mmax; ++k) W.push_back(W.back() + sd * ext.normal());
    const int n = grid.n;
    const double WT = W[n];
    for (std::size_t q = 0; q < np; ++q) {
      auto Y = [&](int i) {
        switch (presets[q]) {
          case ForwardPreset::constant:
            return 1.0;
          case ForwardPreset::brownian:
            return W[i];
          case ForwardPreset::sine:
            return std::sin(W[i]);
          case ForwardPreset::terminal:
            return WT;
        }
        return 0.0;
      };
      double ito = 0.0;
      for (int i = 0; i < n; ++i) ito += Y(i) * (W[i + 1] - W[i]);
      for (std::size_t k = 0; k < nm; ++k) {
        const int m = ms[k];
        double fwd = 0.0;
        for (int i = 0; i < n; ++i) fwd += Y(i) * (W[i + m] - W[i]);
        fwd /= m;
        if (presets[q] == ForwardPreset::terminal)
          acc.a[q * nm + k].add(fwd - (WT * WT - grid.T));
        else
          acc.a[q * nm + k].add((fwd - ito) * (fwd - ito));
      }
    }
  });
  const Acc tot = fold(parts);
  out.pass = true;
  for (std::size_t q = 0; q < np; ++q) {
    ForwardSeries s;
    s.preset = presets[q];
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < nm; ++k) {
      ForwardRow r;
      r.eps = es[k];
      r.multiple = ms[k];
      const MeanAcc& a = tot.a[q * nm + k];
      if (presets[q] == ForwardPreset::terminal) {
        r.skorohod_gap = est(a);
      } else {
        r.rms = std::sqrt(a.mean());
        if (r.rms > 1e-12) {
          lx.push_back(std::log(r.eps));
          ly.push_back(std::log(r.rms));
        }
      }
      s.rows.push_back(r);
    }
    if (presets[q] == ForwardPreset::terminal) {
      // smallest eps: the forward sum is W_T * W_T, exact up to rounding
      const auto it = std::min_element(s.rows.begin(), s.rows.end(),
                                       [](const ForwardRow& a, const ForwardRow& b) { return a.eps < b.eps; });
      const Estimate g = it->skorohod_gap;
      s.pass = std::abs(g.value - grid.T) <= 3.0 * g.se + 1e-12;
    } else {
      s.slope = ols_slope(lx, ly);
      s.pass = lx.size() >= 2 && s.slope >= 0.3 && s.slope <= 0.7;
    }
    out.pass = out.pass && s.pass;
    out.series.push_back(std::move(s));
  }
  return out;
}

// ------------------------------------------------------------------ Ito formula

std::string to_string(ItoPreset p) {
  switch (p) {
    case ItoPreset::square:
      return "x^2";
    case ItoPreset::log1p_square:
      return "ln(1+x^2)";
    case ItoPreset::exp:
      return "exp";
  }
  return "?";
}

namespace {

struct Fn {
  double f, d1, d2;
};

Fn eval(ItoPreset p, double x) {
  switch (p) {
    case ItoPreset::square:
      return {x * x, 2 * x, 2.0};
    case ItoPreset::log1p_square: {
      const double q = 1 + x * x;
      return {std::log1p(x * x), 2 * x / q, 2 * (1 - x * x) / (q * q)};
    }
    case ItoPreset::exp: {
      const double e = std::exp(x);
      return {e, e, e};
    }
  }
  return {0, 0, 0};
}

// |f(S_T) - (f(S_0) + accumulated right-hand side)| on one path
double ito_deviation(const MarketSpec& spec, const PathBundle& b, const DefaultTime& tau, ItoPreset f) {
  const int n = b.grid.n;
  const double dt = b.grid.dt;
  double S = spec.s0;
  double rhs = eval(f, S).f;
  auto jump = [&](double factor) {
    const double pre = S;
    S = pre * factor;
    rhs += eval(f, S).f - eval(f, pre).f;
  };
  const double k = spec.kappa.before.at(tau.tau);
  if (tau.defaulted && tau.step < 0) jump(1.0 + k);
  std::size_t ev = 0;
  for (int i = 0; i < n; ++i) {
    const double t = b.grid.t(i);
    const bool dead = !tau.alive_at(i);
    const double mu = spec.mu.at(t, dead), sig = spec.sigma.at(t, dead);
    double comp = 0.0;
    for (std::size_t j = 0; j < spec.levy.size(); ++j) comp += spec.levy[j].rate * spec.theta[j].at(t, dead);
    const Fn v = eval(f, S);
    const double dX = (mu - comp) * dt + sig * b.brownian.dW[i];
    rhs += v.d1 * S * dX + 0.5 * v.d2 * S * S * sig * sig * dt;
    S *= std::exp((mu - comp - 0.5 * sig * sig) * dt + sig * b.brownian.dW[i]);
    for (; ev < b.jumps.events.size() && b.jumps.events[ev].step == i; ++ev)
      jump(1.0 + spec.theta[b.jumps.events[ev].atom].at(t, dead));
    if (tau.defaulted && tau.step == i) jump(1.0 + k);
  }
  return std::abs(eval(f, S).f - rhs);
}

}  // namespace

ItoCheck ito_formula_check(const MarketSpec& spec, const RandomTimeModel& model, ItoPreset f, const McConfig& mc,
                           int refinements) {
  validate(spec);
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  struct Acc {
    std::vector<double> mx;
    std::vector<MeanAcc> mean;
    void merge(const Acc& o) {
      if (mx.empty()) {
        mx = o.mx;
        mean = o.mean;
        return;
      }
      for (std::size_t k = 0; k < mx.size() && k < o.mx.size(); ++k) {
        mx[k] = std::max(mx[k], o.mx[k]);
        mean[k].merge(o.mean[k]);
      }
    }
  };
  const int L = refinements + 1;
  auto parts = run_chunks<Acc>(mc.paths, mc.threads, [&](long p, Acc& acc) {
    if (acc.mx.empty()) {
      acc.mx.assign(L, 0.0);
      acc.mean.resize(L);
    }
    Sample s = sample_path(grid, spec.levy, model, mc.seed, p);
    PathBundle b = s.b;
    for (int l = 0; l < L; ++l) {
      if (l > 0) b = refine(b, 2, b.seed);
      DefaultTime tau = s.tau;
      if (tau.defaulted && tau.step >= 0) tau.step = b.grid.step_of(tau.tau);
      const double d = ito_deviation(spec, b, tau, f);
      acc.mx[l] = std::max(acc.mx[l], d);
      acc.mean[l].add(d);
    }
  });
  const Acc tot = fold(parts);
  ItoCheck out;
  out.shrinks = true;
  for (int l = 0; l < L; ++l) {
    out.rows.push_back({grid.n << l, tot.mx[l], tot.mean[l].mean()});
    if (l > 0 && !(out.rows[l].mean_dev < out.rows[l - 1].mean_dev || out.rows[l - 1].mean_dev < 1e-13))
      out.shrinks = false;
  }
  return out;
}

// ------------------------------------------------------------------ nested Azema

AzemaCheck azema_nested_check(const RandomTimeModel& model, const McConfig& outer, long inner,
                              const std::vector<double>& times) {
  if (model.kind == TimeKind::cox) throw Unsupported("nested Azema check is for honest times");
  const TimeGrid grid = make_grid(outer.T, outer.steps);
  std::vector<int> idx;
  for (double t : times) {
    const long i = std::lround(t / grid.dt);
    if (i <= 0 || i >= grid.n || std::abs(i * grid.dt - t) > 1e-9) throw ConfigError("Azema times must be interior grid points");
    idx.push_back(static_cast<int>(i));
  }
  struct Acc {
    std::vector<double> mx;
    std::vector<MeanAcc> mean;
    void merge(const Acc& o) {
      if (mx.empty()) {
        mx = o.mx;
        mean = o.mean;
        return;
      }
      for (std::size_t k = 0; k < mx.size(); ++k) {
        mx[k] = std::max(mx[k], o.mx[k]);
        mean[k].merge(o.mean[k]);
      }
    }
  };
  auto parts = run_chunks<Acc>(outer.paths, outer.threads, [&](long p, Acc& acc) {
    if (acc.mx.empty()) {
      acc.mx.assign(idx.size(), 0.0);
      acc.mean.resize(idx.size());
    }
    const std::uint64_t seed = path_seed(outer.seed, static_cast<std::uint64_t>(p));
    const BrownianPath bp = sample_brownian(grid, seed);
    for (std::size_t q = 0; q < idx.size(); ++q) {
      const int i = idx[q];
      const double w = bp.W[i], M = bp.M[i], r = grid.T - grid.t(i), sr = std::sqrt(r);
      CounterRng rng(seed, StreamTag::inner, static_cast<std::uint64_t>(i));
      // exact endpoint, then the bridge event given the endpoint
      double sum = 0.0;
      for (long j = 0; j < inner; ++j) {
        const double y = w + sr * rng.normal();
        if (model.kind == TimeKind::half_final) {
          const double d0 = w - 0.5 * y, d1 = 0.5 * y;
          sum += d0 * d1 <= 0.0 ? 1.0 : std::exp(-2.0 * d0 * d1 / r);
        } else {
          sum += y >= M ? 1.0 : std::exp(-2.0 * (M - w) * (M - y) / r);
        }
      }
      const double mc_z = sum / static_cast<double>(inner);
      const double z = model.kind == TimeKind::half_final ? half_final::Z(w, r) : argmax::Z(M - w, r);
      const double err = std::abs(mc_z - z);
      acc.mx[q] = std::max(acc.mx[q], err);
      acc.mean[q].add(err);
    }
  });
  const Acc tot = fold(parts);
  AzemaCheck out;
  out.outer = outer.paths;
  out.inner = inner;
  for (std::size_t q = 0; q < idx.size(); ++q) {
    out.rows.push_back({grid.t(idx[q]), tot.mx[q], tot.mean[q].mean()});
    out.max_err = std::max(out.max_err, tot.mx[q]);
  }
  return out;
}

// ------------------------------------------------------------------ Doob-Meyer

DoobMeyerCheck doob_meyer_check(const RandomTimeModel& model, const McConfig& mc, int buckets) {
  if (model.kind == TimeKind::argmax) throw Unsupported("the argmax time has no absolutely continuous compensator");
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  std::vector<int> start(buckets + 1);
  for (int k = 0; k <= buckets; ++k) start[k] = static_cast<int>(static_cast<long>(k) * grid.n / buckets);
  struct Acc {
    std::vector<MeanAcc> f, c;
    void merge(const Acc& o) {
      if (f.empty()) {
        f = o.f;
        c = o.c;
        return;
      }
      for (std::size_t k = 0; k < f.size(); ++k) {
        f[k].merge(o.f[k]);
        c[k].merge(o.c[k]);
      }
    }
  };
  auto parts = run_chunks<Acc>(mc.paths, mc.threads, [&](long p, Acc& acc) {
    if (acc.f.empty()) {
      acc.f.resize(buckets);
      acc.c.resize(buckets);
    }
    const Sample s = sample_path(grid, {}, model, mc.seed, p);
    const auto& W = s.b.brownian.W;
    const int j = s.tau.defaulted ? s.tau.step + 1 : -1;  // tau = t_j for grid-valued times
    for (int k = 0; k < buckets; ++k) {
      double integral = 0.0;
      for (int i = start[k]; i < start[k + 1] && s.tau.alive_at(i); ++i) {
        const double lz = model.kind == TimeKind::half_final
                              ? half_final::intensity_over_Z(W[i], grid.T - grid.t(i))
                              : model.intensity(grid.t(i), W[i]);
        integral += lz * grid.dt;
      }
      bool hit;
      if (model.kind == TimeKind::cox)
        hit = s.tau.defaulted && s.tau.tau > grid.t(start[k]) && s.tau.tau <= grid.t(start[k + 1]);
      else
        hit = j > start[k] && j <= start[k + 1];
      acc.f[k].add(hit ? 1.0 : 0.0);
      acc.c[k].add(integral);
    }
  });
  const Acc tot = fold(parts);
  DoobMeyerCheck out;
  out.paths = mc.paths;
  for (int k = 0; k < buckets; ++k) {
    DoobMeyerBucket b;
    b.t0 = grid.t(start[k]);
    b.t1 = grid.t(start[k + 1]);
    b.frequency = est(tot.f[k]);
    b.compensator = est(tot.c[k]);
    b.rel_err = std::abs(b.frequency.value - b.compensator.value) / std::max(b.compensator.value, 1e-300);
    out.max_rel_err = std::max(out.max_rel_err, b.rel_err);
    out.buckets.push_back(b);
  }
  return out;
}

// ------------------------------------------------------------------ exactness

ExactnessCheck wealth_exactness(const MarketSpec& spec, const RandomTimeModel& model, double pi, const McConfig& mc) {
  validate(spec);
  auto constant = [](const Switching& c) { return c.before.slope == 0.0 && !c.after; };
  if (spec.sigma.before.value != 0.0 || !constant(spec.sigma) || !constant(spec.mu) || !constant(spec.rho) ||
      !constant(spec.kappa))
    throw ConfigError("exactness check needs sigma = 0 and constant, non-switching coefficients");
  for (const auto& th : spec.theta)
    if (th.before.value != 0.0 || !constant(th)) throw ConfigError("exactness check needs theta = 0");
  const TimeGrid grid = make_grid(mc.T, mc.steps);
  const Strategy s = constant_strategy(pi);
  const double growth = spec.rho.before.value + pi * (spec.mu.before.value - spec.rho.before.value);
  const double k = spec.kappa.before.value;
  struct Acc {
    double mx = 0.0;
    long defaults = 0;
    void merge(const Acc& o) {
      mx = std::max(mx, o.mx);
      defaults += o.defaults;
    }
  };
  auto parts = run_chunks<Acc>(mc.paths, mc.threads, [&](long p, Acc& acc) {
    const Sample sm = sample_path(grid, spec.levy, model, mc.seed, p);
    const WealthPath w = simulate_wealth(spec, s, sm.b, sm.tau);
    const double closed = spec.x0 * std::exp(growth * grid.T) * (sm.tau.defaulted ? 1.0 + pi * k : 1.0);
    acc.mx = std::max(acc.mx, std::abs(w.XT - closed));
    acc.defaults += sm.tau.defaulted;
  });
  const Acc tot = fold(parts);
  return {tot.mx, mc.paths, tot.defaults};
}

}  // namespace dplab
