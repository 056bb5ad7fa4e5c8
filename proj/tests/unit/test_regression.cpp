#include "doctest.h"

#include <random>

#include "dplab/regression.hpp"

using namespace dplab;

TEST_SUITE("regression") {

TEST_CASE("OLS with HC0 against the sandwich formula") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0, 1);
  const int n = 500;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = N(rng);
    X(i, 2) = N(rng) * 2;
    y[i] = 0.5 - 1.0 * X(i, 1) + 0.25 * X(i, 2) + (1 + std::abs(X(i, 1))) * N(rng);
  }
  const OlsResult r = ols_hc0(X, y);
  const Eigen::MatrixXd XtXi = (X.transpose() * X).inverse();
  const Eigen::VectorXd beta = XtXi * X.transpose() * y;
  const Eigen::VectorXd e = y - X * beta;
  const Eigen::MatrixXd meat = X.transpose() * e.array().square().matrix().asDiagonal() * X;
  const Eigen::MatrixXd V = XtXi * meat * XtXi;
  for (int j = 0; j < 3; ++j) {
    CHECK(r.beta[j] == doctest::Approx(beta[j]).epsilon(1e-10));
    CHECK(r.se[j] == doctest::Approx(std::sqrt(V(j, j))).epsilon(1e-8));
  }
}

TEST_CASE("degenerate columns are dropped") {
  const int n = 50;
  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = i;
    X(i, 2) = 0;          // zero variance
    X(i, 3) = 2 * i + 1;  // collinear
    y[i] = 3 + 0.5 * i;
  }
  const OlsResult r = ols_hc0(X, y);
  CHECK(r.kept[0]);
  CHECK(r.kept[1]);
  CHECK_FALSE(r.kept[2]);
  CHECK_FALSE(r.kept[3]);
  CHECK(r.beta[1] == doctest::Approx(0.5));
  CHECK(r.beta[2] == 0.0);
  CHECK(r.tstat(2) == 0.0);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("low support columns are dropped") {
  const int n = 200;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(n, 0, 1);
  X.col(0).setOnes();
  X.col(1).setZero();
  X(0, 1) = X(1, 1) = 1;
  OlsOptions o;
  o.min_support = 5;
  CHECK_FALSE(ols_hc0(X, y, o).kept[1]);
  CHECK(ols_hc0(X, y).kept[1]);
}

TEST_CASE("streaming fit equals the batch fit") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N(0, 1);
  const int n = 400;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  NormalEquations ne(2);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = N(rng);
    y[i] = 1 + 2 * X(i, 1) + N(rng);
    ne.add(X.row(i).transpose(), y[i]);
  }
  const StreamingOls s = StreamingOls::fit(ne);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = s.reduced(X.row(i).transpose());
    const double e = s.residual(X.row(i).transpose(), y[i]);
    meat += e * e * x * x.transpose();
  }
  const OlsResult a = s.finish(meat), b = ols_hc0(X, y);
  for (int j = 0; j < 2; ++j) {
    CHECK(a.beta[j] == doctest::Approx(b.beta[j]).epsilon(1e-10));
    CHECK(a.se[j] == doctest::Approx(b.se[j]).epsilon(1e-8));
  }
}

}  // TEST_SUITE
