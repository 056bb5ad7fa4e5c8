#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dplab/path_engine.hpp"
#include "dplab/quadrature.hpp"

namespace dplab {

// Sorted (k, alpha_k) pairs with k >= 1 and alpha_k >= 1.
using MultiIndex = std::vector<std::pair<int, int>>;

int order(const MultiIndex& a);
double factorial(const MultiIndex& a);
int power_of(const MultiIndex& a, int k);
MultiIndex add_unit(const MultiIndex& a, int k, int by = 1);  // alpha + by*eps(k); by may be -1
MultiIndex unit(int k, int n = 1);
std::string to_string(const MultiIndex& a);

struct BasisConfig {
  int K = 50;
  int Q = 4;
  double T = 1.0;
  int nodes = 0;  // Gauss-Legendre nodes per time piece; 0 = 2K + 20
  int node_count() const { return nodes > 0 ? nodes : 2 * K + 20; }
};

// Coefficients on H_alpha (Brownian) or K_alpha (Poisson). Terms beyond
// order Q or outside 1..K are dropped and their alpha!*a^2 added to truncated.
struct ChaosVector {
  std::map<MultiIndex, double> c;
  int K = 50;
  int Q = 4;
  double truncated = 0.0;

  ChaosVector() = default;
  ChaosVector(int K_, int Q_) : K(K_), Q(Q_) {}
  static ChaosVector constant(double v, int K, int Q);

  void add(const MultiIndex& a, double v);
  double at(const MultiIndex& a) const;
  double mean() const { return at({}); }
  double norm2() const;
  ChaosVector& operator+=(const ChaosVector& o);
  ChaosVector& operator-=(const ChaosVector& o);
  ChaosVector& operator*=(double s);
  double max_abs() const;
  // fold spilled terms into truncated
  void settle();

  std::map<MultiIndex, double> spill_;
};

ChaosVector operator+(ChaosVector a, const ChaosVector& b);
ChaosVector operator-(ChaosVector a, const ChaosVector& b);
ChaosVector operator*(double s, ChaosVector a);

double hermite_poly(int n, double x);
// e_k, k >= 1, orthonormal on the real line
double hermite_function(int k, double t);
// e_1..e_K at t (index 0 holds e_1)
Eigen::VectorXd hermite_functions(int K, double t);
// int_a^b e_k dt for k = 1..K
Eigen::VectorXd hermite_integrals(const BasisConfig& cfg, double a, double b);

ChaosVector wick_product(const ChaosVector& F, const ChaosVector& G);
// pointwise product through Hermite linearisation per coordinate
ChaosVector ordinary_product(const ChaosVector& F, const ChaosVector& G);
ChaosVector malliavin_derivative(const ChaosVector& F, double t);
// sum_k e_k(t) H_eps(k)
ChaosVector white_noise(const BasisConfig& cfg, double t);
// W_b - W_a
ChaosVector brownian_increment(const BasisConfig& cfg, double a, double b);

using ChaosProcess = std::function<ChaosVector(double)>;
// int Y_t <> W'_t dt by Gauss-Legendre on every piece between breaks
ChaosVector skorohod_integral(const ChaosProcess& Y, const std::vector<double>& breaks, const BasisConfig& cfg);

// Presets: products with '*' of W_T, W_T^n, W_<t>, theta<k>, h<n>(theta<k>).
ChaosVector chaos_of(const std::string& functional, const BasisConfig& cfg);

struct IdentityResidual {
  std::string name;
  double residual = 0.0;    // max coefficient residual
  double truncation = 0.0;  // discarded alpha!*a^2 mass
  double basis_tail = 0.0;  // informational: mass lost to K (e.g. T - sum c_k^2)
  bool pass = false;
};

IdentityResidual wick_identity_check(const std::string& functional, double s, double t, const BasisConfig& cfg);

// Y presets: "adapted_step" (W_{T/2} 1{t > T/2}), "W_T", "theta1", "argmax_indicator" (refused)
IdentityResidual forward_decomposition_check(const std::string& process, const BasisConfig& cfg);

// ---- single-atom Poisson chaos

// K_alpha expansion of (N~_b - N~_a) for nu = lambda * delta_{z0}
ChaosVector poisson_increment(const BasisConfig& cfg, double lambda, double z0, double a, double b);
// F * (N~_b - N~_a) by the product formula with the two contraction kernels
ChaosVector poisson_product_increment(const ChaosVector& F, const BasisConfig& cfg, double lambda, double z0,
                                      double a, double b);
// N~_T^degree, degree 0..3
ChaosVector poisson_power(const BasisConfig& cfg, double lambda, double z0, int degree);

IdentityResidual poisson_single_atom_check(int degree, double s, double t, const LevySpec& levy,
                                           const BasisConfig& cfg);

// ---- norms against Monte Carlo on path-engine paths

struct NormCheck {
  std::string name;
  double chaos_norm2 = 0.0;
  double mc_mean = 0.0, mc_se = 0.0;
  bool pass = false;
};

// E[F_K^2] by evaluating the truncated expansion at theta_k = int e_k dW,
// with W sampled on [-L, L] by the path engine.
NormCheck chaos_norm_check(const std::string& functional, const BasisConfig& cfg, long paths, std::uint64_t seed,
                           unsigned threads = 1, int steps = 4800, double half_width = 12.0);

}  // namespace dplab
