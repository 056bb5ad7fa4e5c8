#include "dplab/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "dplab/errors.hpp"
#include "dplab/rng.hpp"

namespace dplab {

int TimeGrid::step_of(double s) const {
  int k = static_cast<int>(std::ceil(s / dt)) - 1;
  return std::clamp(k, 0, n - 1);
}

TimeGrid make_grid(double T, int n) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("horizon T must be positive");
  if (n < 1) throw ConfigError("number of steps must be at least 1");
  return TimeGrid{T, n, T / n};
}

BrownianPath brownian_from_increments(std::vector<double> dW) {
  BrownianPath p;
  const std::size_t n = dW.size();
  p.dW = std::move(dW);
  p.W.assign(n + 1, 0.0);
  p.M.assign(n + 1, 0.0);
  p.m.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    p.W[i + 1] = p.W[i] + p.dW[i];
    p.M[i + 1] = std::max(p.M[i], p.W[i + 1]);
    p.m[i + 1] = std::min(p.m[i], p.W[i + 1]);
  }
  return p;
}

BrownianPath brownian_from_levels(std::vector<double> W) {
  BrownianPath p;
  const std::size_t n = W.size() - 1;
  p.dW.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.dW[i] = W[i + 1] - W[i];
  p.W = std::move(W);
  auto ex = running_extrema(p);
  p.M = std::move(ex.max);
  p.m = std::move(ex.min);
  return p;
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed) {
  CounterRng rng(seed, StreamTag::brownian);
  const double sd = std::sqrt(grid.dt);
  std::vector<double> dW(grid.n);
  for (auto& x : dW) x = sd * rng.normal();
  return brownian_from_increments(std::move(dW));
}

void validate_levy(const LevySpec& levy) {
  for (const auto& a : levy) {
    if (!(a.rate > 0.0)) throw ConfigError("jump atom rate must be positive");
    if (a.z == 0.0) throw ConfigError("jump atom mark must be nonzero");
  }
}

JumpField sample_jumps(const TimeGrid& grid, const LevySpec& levy, std::uint64_t seed) {
  validate_levy(levy);
  JumpField f;
  f.levy = levy;
  for (std::size_t j = 0; j < levy.size(); ++j) {
    CounterRng rng(seed, StreamTag::jumps, j);
    const int count = rng.poisson(levy[j].rate * grid.T);
    for (int k = 0; k < count; ++k) {
      const double t = grid.T * rng.uniform();
      f.events.push_back({t, static_cast<int>(j), levy[j].z, grid.step_of(t)});
    }
  }
  std::sort(f.events.begin(), f.events.end(),
            [](const JumpEvent& a, const JumpEvent& b) { return a.t < b.t; });
  return f;
}

void separate_from_default(JumpField& jumps, const TimeGrid& grid, double tau, std::uint64_t seed) {
  CounterRng rng(seed, StreamTag::jitter);
  bool moved = false;
  for (auto& e : jumps.events) {
    while (e.t == tau) {
      e.t = grid.T * rng.uniform();
      e.step = grid.step_of(e.t);
      moved = true;
    }
  }
  if (moved)
    std::sort(jumps.events.begin(), jumps.events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.t < b.t; });
}

Extrema running_extrema(const BrownianPath& path) {
  const auto& W = path.W;
  const std::size_t len = W.size();
  Extrema e;
  e.max.resize(len);
  e.min.resize(len);
  e.fwd_max.resize(len);
  e.fwd_min.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    e.max[i] = i == 0 ? W[0] : std::max(e.max[i - 1], W[i]);
    e.min[i] = i == 0 ? W[0] : std::min(e.min[i - 1], W[i]);
  }
  for (std::size_t k = len; k-- > 0;) {
    e.fwd_max[k] = k + 1 == len ? W[k] : std::max(e.fwd_max[k + 1], W[k]);
    e.fwd_min[k] = k + 1 == len ? W[k] : std::min(e.fwd_min[k + 1], W[k]);
  }
  return e;
}

PathBundle make_bundle(const TimeGrid& grid, const LevySpec& levy, std::uint64_t seed) {
  PathBundle b;
  b.grid = grid;
  b.seed = seed;
  b.brownian = sample_brownian(grid, seed);
  b.jumps = levy.empty() ? JumpField{} : sample_jumps(grid, levy, seed);
  return b;
}

PathBundle refine(const PathBundle& bundle, int factor, std::uint64_t seed) {
  if (factor < 2) throw ConfigError("refine factor must be at least 2");
  const TimeGrid fine = make_grid(bundle.grid.T, bundle.grid.n * factor);
  CounterRng rng(seed, StreamTag::refine, static_cast<std::uint64_t>(fine.n));
  const auto& Wc = bundle.brownian.W;
  std::vector<double> W(fine.n + 1);
  for (int i = 0; i < bundle.grid.n; ++i) {
    const double a = Wc[i], b = Wc[i + 1];
    W[i * factor] = a;
    double w = a;
    for (int k = 1; k < factor; ++k) {
      // bridge from w at (k-1)·h to b at factor·h
      const double left = factor - k + 1;
      const double mean = w + (b - w) / left;
      const double var = fine.dt * (left - 1.0) / left;
      w = mean + std::sqrt(var) * rng.normal();
      W[i * factor + k] = w;
    }
  }
  W[fine.n] = Wc.back();

  PathBundle out;
  out.grid = fine;
  out.seed = bundle.seed;
  out.brownian = brownian_from_levels(std::move(W));
  out.jumps = bundle.jumps;
  for (auto& e : out.jumps.events) e.step = fine.step_of(e.t);
  return out;
}

PathBundle subsample(const PathBundle& bundle, int factor) {
  if (factor < 1 || bundle.grid.n % factor != 0)
    throw ConfigError("subsample factor must divide the number of steps");
  const TimeGrid coarse = make_grid(bundle.grid.T, bundle.grid.n / factor);
  std::vector<double> W(coarse.n + 1);
  for (int i = 0; i <= coarse.n; ++i) W[i] = bundle.brownian.W[i * factor];
  PathBundle out;
  out.grid = coarse;
  out.seed = bundle.seed;
  out.brownian = brownian_from_levels(std::move(W));
  out.jumps = bundle.jumps;
  for (auto& e : out.jumps.events) e.step = coarse.step_of(e.t);
  return out;
}

void write_csv(std::ostream& os, const PathBundle& b) {
  os << "# seed=" << b.seed << "\n";
  os << "t,W,M,m\n";
  os << std::setprecision(17);
  for (int i = 0; i <= b.grid.n; ++i)
    os << b.grid.t(i) << ',' << b.brownian.W[i] << ',' << b.brownian.M[i] << ',' << b.brownian.m[i] << '\n';
}

nlohmann::json to_json(const PathBundle& b) {
  nlohmann::json j;
  j["seed"] = b.seed;
  j["T"] = b.grid.T;
  j["n"] = b.grid.n;
  j["W"] = b.brownian.W;
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : b.jumps.levy) atoms.push_back({{"z", a.z}, {"rate", a.rate}});
  j["levy"] = atoms;
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : b.jumps.events) ev.push_back({{"t", e.t}, {"atom", e.atom}});
  j["events"] = ev;
  return j;
}

PathBundle bundle_from_json(const nlohmann::json& j) {
  PathBundle b;
  b.seed = j.at("seed").get<std::uint64_t>();
  b.grid = make_grid(j.at("T").get<double>(), j.at("n").get<int>());
  auto W = j.at("W").get<std::vector<double>>();
  if (static_cast<int>(W.size()) != b.grid.n + 1) throw ConfigError("bundle W has wrong length");
  b.brownian = brownian_from_levels(std::move(W));
  for (const auto& a : j.at("levy")) b.jumps.levy.push_back({a.at("z").get<double>(), a.at("rate").get<double>()});
  for (const auto& e : j.at("events")) {
    const int atom = e.at("atom").get<int>();
    const double t = e.at("t").get<double>();
    b.jumps.events.push_back({t, atom, b.jumps.levy.at(atom).z, b.grid.step_of(t)});
  }
  return b;
}

}  // namespace dplab
