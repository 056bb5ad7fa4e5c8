#include "dplab/chaos.hpp"

#include <cmath>
#include <numbers>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "dplab/errors.hpp"
#include "dplab/parallel.hpp"
#include "dplab/rng.hpp"
#include "dplab/stats.hpp"

namespace dplab {

// ------------------------------------------------------------------ indices

int order(const MultiIndex& a) {
  int s = 0;
  for (const auto& [k, n] : a) s += n;
  return s;
}

double factorial(const MultiIndex& a) {
  double f = 1.0;
  for (const auto& [k, n] : a) f *= std::tgamma(n + 1.0);
  return f;
}

int power_of(const MultiIndex& a, int k) {
  for (const auto& [j, n] : a)
    if (j == k) return n;
  return 0;
}

MultiIndex add_unit(const MultiIndex& a, int k, int by) {
  MultiIndex r;
  r.reserve(a.size() + 1);
  bool done = false;
  for (const auto& [j, n] : a) {
    if (!done && j > k) {
      if (by < 0) throw std::logic_error("negative multi-index");
      r.emplace_back(k, by);
      done = true;
    }
    if (j == k) {
      done = true;
      if (n + by < 0) throw std::logic_error("negative multi-index");
      if (n + by > 0) r.emplace_back(j, n + by);
      continue;
    }
    r.emplace_back(j, n);
  }
  if (!done) {
    if (by < 0) throw std::logic_error("negative multi-index");
    r.emplace_back(k, by);
  }
  return r;
}

MultiIndex unit(int k, int n) { return n == 0 ? MultiIndex{} : MultiIndex{{k, n}}; }

std::string to_string(const MultiIndex& a) {
  if (a.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "+" : "") << a[i].second << "e" << a[i].first;
  return os.str();
}

// ------------------------------------------------------------------ vectors

ChaosVector ChaosVector::constant(double v, int K, int Q) {
  ChaosVector c(K, Q);
  c.add({}, v);
  return c;
}

void ChaosVector::add(const MultiIndex& a, double v) {
  if (v == 0.0) return;
  if (order(a) > Q || (!a.empty() && a.back().first > K)) {
    // each call adds a separate contribution; exact mass needs the sum, so
    // spill terms are accumulated and squared when the operation finishes
    spill_[a] += v;
    return;
  }
  c[a] += v;
}

double ChaosVector::at(const MultiIndex& a) const {
  auto it = c.find(a);
  return it == c.end() ? 0.0 : it->second;
}

double ChaosVector::norm2() const {
  double s = 0.0;
  for (const auto& [a, v] : c) s += factorial(a) * v * v;
  return s;
}

void ChaosVector::settle() {
  for (const auto& [a, v] : spill_) truncated += factorial(a) * v * v;
  spill_.clear();
}

ChaosVector& ChaosVector::operator+=(const ChaosVector& o) {
  for (const auto& [a, v] : o.c) c[a] += v;
  truncated += o.truncated;
  return *this;
}

ChaosVector& ChaosVector::operator-=(const ChaosVector& o) {
  for (const auto& [a, v] : o.c) c[a] -= v;
  truncated += o.truncated;
  return *this;
}

ChaosVector& ChaosVector::operator*=(double s) {
  for (auto& [a, v] : c) v *= s;
  truncated *= s * s;
  return *this;
}

double ChaosVector::max_abs() const {
  double m = 0.0;
  for (const auto& [a, v] : c) m = std::max(m, std::abs(v));
  return m;
}

ChaosVector operator+(ChaosVector a, const ChaosVector& b) { return a += b; }
ChaosVector operator-(ChaosVector a, const ChaosVector& b) { return a -= b; }
ChaosVector operator*(double s, ChaosVector a) { return a *= s; }

// ------------------------------------------------------------------ basis

double hermite_poly(int n, double x) {
  if (n < 0) throw std::domain_error("Hermite polynomial order must be >= 0");
  double h0 = 1.0, h1 = x;
  if (n == 0) return h0;
  for (int k = 1; k < n; ++k) {
    const double h2 = x * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

Eigen::VectorXd hermite_functions(int K, double t) {
  // normalised recurrence; same values as pi^{-1/4}/sqrt(k!) e^{-t^2/2} h_k(sqrt2 t)
  Eigen::VectorXd e(K);
  if (K == 0) return e;
  e[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * t * t);
  if (K > 1) e[1] = std::numbers::sqrt2 * t * e[0];
  for (int n = 1; n + 1 < K; ++n) e[n + 1] = std::sqrt(2.0 / (n + 1)) * t * e[n] - std::sqrt(double(n) / (n + 1)) * e[n - 1];
  return e;
}

double hermite_function(int k, double t) {
  if (k < 1) throw std::domain_error("Hermite function index must be >= 1");
  return hermite_functions(k, t)[k - 1];
}

Eigen::VectorXd hermite_integrals(const BasisConfig& cfg, double a, double b) {
  const QuadratureRule q = gauss_legendre(cfg.node_count(), a, b);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(cfg.K);
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) s += q.weights[j] * hermite_functions(cfg.K, q.nodes[j]);
  return s;
}

// ------------------------------------------------------------------ algebra

namespace {

ChaosVector like(const ChaosVector& F, const ChaosVector& G) {
  ChaosVector r(std::max(F.K, G.K), std::min(F.Q, G.Q));
  r.truncated = F.truncated + G.truncated;
  return r;
}

MultiIndex merge_add(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) r.push_back(a[i++]);
    else if (i == a.size() || b[j].first < a[i].first) r.push_back(b[j++]);
    else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    }
  }
  return r;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

ChaosVector wick_product(const ChaosVector& F, const ChaosVector& G) {
  ChaosVector r = like(F, G);
  for (const auto& [a, u] : F.c)
    for (const auto& [b, v] : G.c) r.add(merge_add(a, b), u * v);
  r.settle();
  return r;
}

ChaosVector ordinary_product(const ChaosVector& F, const ChaosVector& G) {
  ChaosVector r = like(F, G);
  for (const auto& [a, u] : F.c) {
    for (const auto& [b, v] : G.c) {
      // coordinates of a and b; shared ones expand by h_m h_n = sum r! C(m,r) C(n,r) h_{m+n-2r}
      std::vector<std::pair<int, std::pair<int, int>>> coords;
      std::size_t i = 0, j = 0;
      while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
          coords.push_back({a[i].first, {a[i].second, 0}});
          ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
          coords.push_back({b[j].first, {0, b[j].second}});
          ++j;
        } else {
          coords.push_back({a[i].first, {a[i].second, b[j].second}});
          ++i, ++j;
        }
      }
      MultiIndex idx;
      std::function<void(std::size_t, double)> rec = [&](std::size_t p, double w) {
        if (p == coords.size()) {
          r.add(idx, u * v * w);
          return;
        }
        const int k = coords[p].first, m = coords[p].second.first, n = coords[p].second.second;
        for (int q = 0; q <= std::min(m, n); ++q) {
          const int pw = m + n - 2 * q;
          const double c = std::tgamma(q + 1.0) * binom(m, q) * binom(n, q);
          if (pw > 0) idx.emplace_back(k, pw);
          rec(p + 1, w * c);
          if (pw > 0) idx.pop_back();
        }
      };
      rec(0, 1.0);
    }
  }
  r.settle();
  return r;
}

ChaosVector malliavin_derivative(const ChaosVector& F, double t) {
  const Eigen::VectorXd e = hermite_functions(F.K, t);
  ChaosVector r(F.K, F.Q);
  for (const auto& [a, v] : F.c)
    for (const auto& [k, n] : a) r.add(add_unit(a, k, -1), v * n * e[k - 1]);
  return r;
}

ChaosVector white_noise(const BasisConfig& cfg, double t) {
  const Eigen::VectorXd e = hermite_functions(cfg.K, t);
  ChaosVector r(cfg.K, cfg.Q);
  for (int k = 1; k <= cfg.K; ++k) r.add(unit(k), e[k - 1]);
  return r;
}

ChaosVector brownian_increment(const BasisConfig& cfg, double a, double b) {
  const Eigen::VectorXd c = hermite_integrals(cfg, a, b);
  ChaosVector r(cfg.K, cfg.Q);
  for (int k = 1; k <= cfg.K; ++k) r.add(unit(k), c[k - 1]);
  return r;
}

ChaosVector skorohod_integral(const ChaosProcess& Y, const std::vector<double>& breaks, const BasisConfig& cfg) {
  const QuadratureRule q = composite_gauss_legendre(breaks, cfg.node_count());
  ChaosVector r(cfg.K, cfg.Q);
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) {
    const ChaosVector y = Y(q.nodes[j]);
    const Eigen::VectorXd e = hermite_functions(cfg.K, q.nodes[j]);
    for (const auto& [a, v] : y.c)
      for (int k = 1; k <= cfg.K; ++k) r.add(add_unit(a, k, 1), q.weights[j] * v * e[k - 1]);
    r.truncated += q.weights[j] * y.truncated;
  }
  r.settle();
  return r;
}

// ------------------------------------------------------------------ presets

namespace {

ChaosVector factor_of(const std::string& f, const BasisConfig& cfg) {
  static const std::regex wT(R"(W_T(\^([1-9]))?)");
  static const std::regex wt(R"(W_([0-9]*\.?[0-9]+))");
  static const std::regex th(R"(theta([1-9][0-9]*))");
  static const std::regex hn(R"(h([0-9]+)\(theta([1-9][0-9]*)\))");
  static const std::regex num(R"(-?[0-9]*\.?[0-9]+)");
  std::smatch m;
  if (std::regex_match(f, m, wT)) {
    const ChaosVector w = brownian_increment(cfg, 0.0, cfg.T);
    const int n = m[2].matched ? std::stoi(m[2]) : 1;
    ChaosVector r = w;
    for (int i = 1; i < n; ++i) r = ordinary_product(r, w);
    return r;
  }
  if (std::regex_match(f, m, wt)) {
    const double t = std::stod(m[1]);
    if (!(t > 0.0) || t > cfg.T) throw ConfigError("W_t preset needs 0 < t <= T");
    return brownian_increment(cfg, 0.0, t);
  }
  if (std::regex_match(f, m, th)) {
    const int k = std::stoi(m[1]);
    if (k > cfg.K) throw ConfigError("theta index beyond basis size K");
    ChaosVector r(cfg.K, cfg.Q);
    r.add(unit(k), 1.0);
    return r;
  }
  if (std::regex_match(f, m, hn)) {
    const int n = std::stoi(m[1]), k = std::stoi(m[2]);
    if (k > cfg.K) throw ConfigError("theta index beyond basis size K");
    ChaosVector r(cfg.K, cfg.Q);
    r.add(unit(k, n), 1.0);
    r.settle();
    return r;
  }
  if (std::regex_match(f, m, num)) return ChaosVector::constant(std::stod(f), cfg.K, cfg.Q);
  throw Unsupported("functional '" + f + "' is not in the preset library");
}

}  // namespace

ChaosVector chaos_of(const std::string& functional, const BasisConfig& cfg) {
  if (cfg.K < 1 || cfg.Q < 1) throw ConfigError("basis needs K, Q >= 1");
  std::string s;
  for (char ch : functional)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  ChaosVector r = ChaosVector::constant(1.0, cfg.K, cfg.Q);
  std::size_t pos = 0;
  bool first = true;
  while (pos <= s.size()) {
    const std::size_t next = s.find('*', pos);
    const std::string f = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (f.empty()) throw Unsupported("empty factor in functional '" + functional + "'");
    const ChaosVector g = factor_of(f, cfg);
    r = first ? g : ordinary_product(r, g);
    first = false;
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return r;
}

// ------------------------------------------------------------------ identity checks

namespace {

ChaosVector integrate_derivative(const ChaosVector& F, double s, double t, const BasisConfig& cfg) {
  const QuadratureRule q = gauss_legendre(cfg.node_count(), s, t);
  ChaosVector r(F.K, F.Q);
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) r += q.weights[j] * malliavin_derivative(F, q.nodes[j]);
  return r;
}

double basis_tail(const BasisConfig& cfg, double a, double b) {
  return (b - a) - hermite_integrals(cfg, a, b).squaredNorm();
}

}  // namespace

IdentityResidual wick_identity_check(const std::string& functional, double s, double t, const BasisConfig& cfg) {
  if (!(s < t)) throw ConfigError("wick identity needs s < t");
  const ChaosVector F = chaos_of(functional, cfg);
  const ChaosVector dW = brownian_increment(cfg, s, t);
  const ChaosVector lhs = wick_product(F, dW);
  const ChaosVector rhs = ordinary_product(F, dW) - integrate_derivative(F, s, t, cfg);
  IdentityResidual r;
  r.name = "wick[" + functional + "]";
  r.residual = (lhs - rhs).max_abs();
  r.truncation = lhs.truncated + rhs.truncated;
  r.basis_tail = basis_tail(cfg, s, t);
  r.pass = r.residual <= 1e-12 + r.truncation;
  return r;
}

IdentityResidual forward_decomposition_check(const std::string& process, const BasisConfig& cfg) {
  const double T = cfg.T;
  IdentityResidual r;
  r.name = "forward[" + process + "]";
  ChaosVector left, skor, trace(cfg.K, cfg.Q);
  if (process == "W_T" || process == "theta1") {
    // anticipating but constant in t: the grid forward sum telescopes to G * W_T
    const ChaosVector G = process == "W_T" ? brownian_increment(cfg, 0.0, T) : chaos_of("theta1", cfg);
    left = ordinary_product(G, brownian_increment(cfg, 0.0, T));
    skor = skorohod_integral([&](double) { return G; }, {0.0, T}, cfg);
    trace = integrate_derivative(G, 0.0, T, cfg);
    r.basis_tail = basis_tail(cfg, 0.0, T);
  } else if (process == "adapted_step") {
    const double a = 0.5 * T;
    const ChaosVector Wa = brownian_increment(cfg, 0.0, a);
    const ChaosVector zero(cfg.K, cfg.Q);
    left = ordinary_product(Wa, brownian_increment(cfg, a, T));
    skor = skorohod_integral([&](double t) { return t > a ? Wa : zero; }, {0.0, a, T}, cfg);
    // D_{t+} W_a = 1{t < a}: only the basis leakage survives on (a, T]
    trace = integrate_derivative(Wa, a, T, cfg);
    r.basis_tail = basis_tail(cfg, 0.0, a);
  } else if (process == "argmax_indicator") {
    throw Unsupported(
        "1{tau > t} for the argmax time has no chaos expansion in the preset library: its Malliavin trace is not "
        "square integrable");
  } else {
    throw Unsupported("process '" + process + "' is not in the preset library");
  }
  const ChaosVector res = left - skor - trace;
  r.residual = res.max_abs();
  r.truncation = left.truncated + skor.truncated + trace.truncated;
  r.pass = r.residual <= 1e-12 + r.truncation;
  return r;
}

// ------------------------------------------------------------------ MC norms

NormCheck chaos_norm_check(const std::string& functional, const BasisConfig& cfg, long paths, std::uint64_t seed,
                           unsigned threads, int steps, double half_width) {
  const ChaosVector F = chaos_of(functional, cfg);
  const TimeGrid grid = make_grid(2.0 * half_width, steps);
  // e_k at step midpoints, shifted so the sampled window is [-L, L]
  Eigen::MatrixXd E(cfg.K, steps);
  for (int i = 0; i < steps; ++i) E.col(i) = hermite_functions(cfg.K, -half_width + (i + 0.5) * grid.dt);
  int maxpow = 0;
  for (const auto& [a, v] : F.c)
    for (const auto& [k, n] : a) maxpow = std::max(maxpow, n);
  auto parts = run_chunks<MeanAcc>(paths, threads, [&](long p, MeanAcc& acc) {
    const BrownianPath bp = sample_brownian(grid, path_seed(seed, static_cast<std::uint64_t>(p)));
    const Eigen::Map<const Eigen::VectorXd> dW(bp.dW.data(), steps);
    const Eigen::VectorXd theta = E * dW;
    Eigen::MatrixXd H(cfg.K, maxpow + 1);
    for (int k = 0; k < cfg.K; ++k)
      for (int n = 0; n <= maxpow; ++n) H(k, n) = hermite_poly(n, theta[k]);
    double f = 0.0;
    for (const auto& [a, v] : F.c) {
      double term = v;
      for (const auto& [k, n] : a) term *= H(k - 1, n);
      f += term;
    }
    acc.add(f * f);
  });
  const MeanAcc tot = fold(parts);
  NormCheck c;
  c.name = functional;
  c.chaos_norm2 = F.norm2();
  c.mc_mean = tot.mean();
  c.mc_se = tot.se();
  c.pass = std::abs(c.mc_mean - c.chaos_norm2) < 3.0 * c.mc_se;
  return c;
}

}  // namespace dplab
