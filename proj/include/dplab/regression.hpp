#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dplab {

struct OlsResult {
  Eigen::VectorXd beta;  // full length; dropped columns hold 0
  Eigen::VectorXd se;    // HC0; 0 for dropped columns
  std::vector<bool> kept;
  long n = 0;
  std::vector<std::string> warnings;

  double tstat(int j) const { return se[j] > 0.0 ? beta[j] / se[j] : (beta[j] == 0.0 ? 0.0 : INFINITY); }
};

struct OlsOptions {
  // columns >= first_droppable with (near) zero variance or fewer than
  // min_support rows off their modal value are dropped
  int first_droppable = 1;
  long min_support = 0;
};

// OLS with White (HC0) standard errors. Rank-deficient designs fall back to
// the largest leading set of independent columns.
OlsResult ols_hc0(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OlsOptions& opt = {});

// Streaming form for row counts too large to store: pass 1 fills the normal
// equations, pass 2 the HC0 meat at the pass-1 coefficients. Column 0 must be
// the intercept; zero-variance columns are dropped.
struct NormalEquations {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double n = 0.0;

  explicit NormalEquations(int p = 0) : xtx(Eigen::MatrixXd::Zero(p, p)), xty(Eigen::VectorXd::Zero(p)) {}
  void add(const Eigen::VectorXd& x, double y) {
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(x);
    xty += y * x;
    n += 1.0;
  }
  void merge(const NormalEquations& o) {
    xtx += o.xtx;
    xty += o.xty;
    n += o.n;
  }
};

struct StreamingOls {
  std::vector<bool> kept;
  Eigen::VectorXd beta;  // full length
  Eigen::MatrixXd bread;  // (X'X)^{-1} on kept columns
  std::vector<int> cols;
  std::vector<std::string> warnings;
  long n = 0;

  static StreamingOls fit(const NormalEquations& ne);
  double residual(const Eigen::VectorXd& x, double y) const { return y - x.dot(beta); }
  // meat accumulated over kept columns: sum e^2 x_k x_k'
  OlsResult finish(const Eigen::MatrixXd& meat) const;
  Eigen::VectorXd reduced(const Eigen::VectorXd& x) const;
};

}  // namespace dplab
