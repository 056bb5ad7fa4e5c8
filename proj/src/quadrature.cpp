#include "dplab/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dplab/errors.hpp"

namespace dplab {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ConfigError("quadrature needs at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  QuadratureRule r;
  r.nodes = mid + half * es.eigenvalues().array();
  r.weights = (2.0 * half) * es.eigenvectors().row(0).transpose().array().square();
  return r;
}

QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int n) {
  if (breaks.size() < 2) throw ConfigError("composite rule needs at least two breakpoints");
  const Eigen::Index pieces = static_cast<Eigen::Index>(breaks.size()) - 1;
  QuadratureRule r;
  r.nodes.resize(pieces * n);
  r.weights.resize(pieces * n);
  for (Eigen::Index p = 0; p < pieces; ++p) {
    auto q = gauss_legendre(n, breaks[p], breaks[p + 1]);
    r.nodes.segment(p * n, n) = q.nodes;
    r.weights.segment(p * n, n) = q.weights;
  }
  return r;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, rel_tol, &err);
  if (error) *error = err;
  return v;
}

}  // namespace dplab
