#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace dplab {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

// Golub–Welsch nodes on [a,b].
QuadratureRule gauss_legendre(int n, double a, double b);

// n-point Gauss–Legendre on every piece [breaks[i], breaks[i+1]].
QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int n);

// Adaptive 61-point Gauss–Kronrod; b may be +infinity.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10, double* error = nullptr);

}  // namespace dplab
