#include <cmath>

#include "dplab/chaos.hpp"
#include "dplab/errors.hpp"

namespace dplab {

namespace {

double sgn(double z) { return z > 0.0 ? 1.0 : -1.0; }

// G_ik = int_a^b e_i e_k
Eigen::MatrixXd gram(const BasisConfig& cfg, double a, double b) {
  const QuadratureRule q = gauss_legendre(cfg.node_count(), a, b);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(cfg.K, cfg.K);
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) {
    const Eigen::VectorXd e = hermite_functions(cfg.K, q.nodes[j]);
    G.noalias() += q.weights[j] * e * e.transpose();
  }
  return G;
}

void check_rate(double lambda, double z0) {
  if (!(lambda > 0.0) || z0 == 0.0) throw ConfigError("Poisson atom needs rate > 0 and mark != 0");
}

}  // namespace

// p_1(z0) = sgn(z0)/sqrt(lambda), so the mark function 1 equals sqrt(lambda) sgn(z0) p_1
ChaosVector poisson_increment(const BasisConfig& cfg, double lambda, double z0, double a, double b) {
  check_rate(lambda, z0);
  const Eigen::VectorXd c = hermite_integrals(cfg, a, b);
  const double g = std::sqrt(lambda) * sgn(z0);
  ChaosVector r(cfg.K, cfg.Q);
  for (int k = 1; k <= cfg.K; ++k) r.add(unit(k), g * c[k - 1]);
  return r;
}

ChaosVector poisson_product_increment(const ChaosVector& F, const BasisConfig& cfg, double lambda, double z0,
                                      double a, double b) {
  check_rate(lambda, z0);
  const Eigen::VectorXd c = hermite_integrals(cfg, a, b);
  const Eigen::MatrixXd G = gram(cfg, a, b);
  const double g = std::sqrt(lambda) * sgn(z0);
  ChaosVector r(cfg.K, cfg.Q);
  r.truncated = F.truncated;
  for (const auto& [alpha, v] : F.c) {
    // symmetrised tensor product: K_{alpha + eps_i}
    for (int i = 1; i <= cfg.K; ++i) r.add(add_unit(alpha, i, 1), v * g * c[i - 1]);
    for (const auto& [i, n] : alpha) {
      const MultiIndex less = add_unit(alpha, i, -1);
      // contraction *_1^0: pointwise product in (t, z), projected back on e_k p_1
      for (int k = 1; k <= cfg.K; ++k) r.add(add_unit(less, k, 1), v * n * G(i - 1, k - 1));
      // contraction *_1^1: integrated against nu x dt
      r.add(less, v * n * c[i - 1] * g);
    }
  }
  r.settle();
  return r;
}

ChaosVector poisson_power(const BasisConfig& cfg, double lambda, double z0, int degree) {
  if (degree < 0 || degree > 3) throw ConfigError("Poisson preset degree must be 0..3");
  ChaosVector F = ChaosVector::constant(1.0, cfg.K, cfg.Q);
  for (int d = 0; d < degree; ++d) F = poisson_product_increment(F, cfg, lambda, z0, 0.0, cfg.T);
  return F;
}

IdentityResidual poisson_single_atom_check(int degree, double s, double t, const LevySpec& levy,
                                           const BasisConfig& cfg) {
  if (levy.size() != 1) throw Unsupported("Poisson chaos identities are implemented for a single-atom Levy measure");
  if (!(s < t)) throw ConfigError("Poisson identity needs s < t");
  const double lambda = levy[0].rate, z0 = levy[0].z;
  check_rate(lambda, z0);
  const double p1 = sgn(z0) / std::sqrt(lambda);
  const ChaosVector F = poisson_power(cfg, lambda, z0, degree);
  const ChaosVector lhs = poisson_product_increment(F, cfg, lambda, z0, s, t);

  // right side: int (F + D F) <> n~ nu(dz) du + int D F nu(dz) du on Gauss-Legendre nodes
  const QuadratureRule q = gauss_legendre(cfg.node_count(), s, t);
  ChaosVector noise_integral(cfg.K, cfg.Q);
  ChaosVector wick_D(cfg.K, cfg.Q), plain_D(cfg.K, cfg.Q);
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) {
    const double u = q.nodes[j], w = q.weights[j];
    const ChaosVector noise = white_noise(cfg, u);  // coefficient of p_1(z) in n~(u, z)
    noise_integral += w * lambda * p1 * noise;
    // D_{u,z} F = p_1(z) * (alpha_i e_i(u) K_{alpha - eps_i}), same algebra as the Brownian D
    const ChaosVector D = malliavin_derivative(F, u);
    wick_D += (w * lambda * p1 * p1) * wick_product(D, noise);
    plain_D += (w * lambda * p1) * D;
  }
  const ChaosVector rhs = wick_product(F, noise_integral) + wick_D + plain_D;
  IdentityResidual r;
  r.name = "poisson[N_T^" + std::to_string(degree) + "]";
  r.residual = (lhs - rhs).max_abs();
  r.truncation = lhs.truncated + rhs.truncated;
  r.basis_tail = lambda * ((t - s) - hermite_integrals(cfg, s, t).squaredNorm());
  r.pass = r.residual <= 1e-12 + r.truncation;
  return r;
}

}  // namespace dplab
