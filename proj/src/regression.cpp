#include "dplab/regression.hpp"

#include <cmath>
#include <map>

namespace dplab {

namespace {

long off_mode_count(const Eigen::VectorXd& c) {
  std::map<double, long> counts;
  for (Eigen::Index i = 0; i < c.size(); ++i) ++counts[c[i]];
  long best = 0;
  for (const auto& [v, k] : counts) best = std::max(best, k);
  return static_cast<long>(c.size()) - best;
}

}  // namespace

OlsResult ols_hc0(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OlsOptions& opt) {
  const Eigen::Index n = X.rows(), p = X.cols();
  OlsResult r;
  r.n = n;
  r.beta = Eigen::VectorXd::Zero(p);
  r.se = Eigen::VectorXd::Zero(p);
  r.kept.assign(p, true);
  for (Eigen::Index j = opt.first_droppable; j < p; ++j) {
    const Eigen::VectorXd c = X.col(j);
    const double m = c.mean();
    const double var = (c.array() - m).square().mean();
    if (!(var > 1e-24 * (1.0 + m * m))) {
      r.kept[j] = false;
      r.warnings.push_back("column " + std::to_string(j) + " has zero variance; dropped");
    } else if (opt.min_support > 0) {
      const long k = off_mode_count(c);
      if (k < opt.min_support) {
        r.kept[j] = false;
        r.warnings.push_back("column " + std::to_string(j) + " has support " + std::to_string(k) + "; dropped");
      }
    }
  }
  // greedy rank check in column order
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!r.kept[j]) continue;
    cols.push_back(j);
    Eigen::MatrixXd S(n, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) S.col(k) = X.col(cols[k]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(cols.size())) {
      cols.pop_back();
      r.kept[j] = false;
      r.warnings.push_back("column " + std::to_string(j) + " is collinear; dropped");
    }
  }
  if (cols.empty() || n <= static_cast<Eigen::Index>(cols.size())) {
    r.warnings.push_back("too few rows for regression");
    return r;
  }
  Eigen::MatrixXd S(n, cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) S.col(k) = X.col(cols[k]);
  const Eigen::MatrixXd XtX = S.transpose() * S;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(XtX);
  const Eigen::VectorXd b = ldlt.solve(S.transpose() * y);
  const Eigen::VectorXd e = y - S * b;
  const Eigen::MatrixXd meat = S.transpose() * e.array().square().matrix().asDiagonal() * S;
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(cols.size(), cols.size()));
  const Eigen::MatrixXd V = inv * meat * inv;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    r.beta[cols[k]] = b[k];
    r.se[cols[k]] = std::sqrt(std::max(0.0, V(k, k)));
  }
  return r;
}

StreamingOls StreamingOls::fit(const NormalEquations& ne) {
  StreamingOls s;
  const int p = static_cast<int>(ne.xty.size());
  s.n = static_cast<long>(ne.n);
  s.kept.assign(p, true);
  s.beta = Eigen::VectorXd::Zero(p);
  const Eigen::MatrixXd full = ne.xtx.selfadjointView<Eigen::Lower>();
  if (ne.n < 2) {
    s.warnings.push_back("too few rows for regression");
    return s;
  }
  for (int j = 1; j < p; ++j) {
    const double m = full(0, j) / ne.n;
    const double var = full(j, j) / ne.n - m * m;
    if (!(var > 1e-14 * (full(j, j) / ne.n) + 1e-300)) {
      s.kept[j] = false;
      s.warnings.push_back("column " + std::to_string(j) + " has zero variance; dropped");
    }
  }
  for (int j = 0; j < p; ++j)
    if (s.kept[j]) s.cols.push_back(j);
  const int k = static_cast<int>(s.cols.size());
  Eigen::MatrixXd A(k, k);
  Eigen::VectorXd b(k);
  for (int a = 0; a < k; ++a) {
    b[a] = ne.xty[s.cols[a]];
    for (int c = 0; c < k; ++c) A(a, c) = full(s.cols[a], s.cols[c]);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  s.bread = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::VectorXd r = ldlt.solve(b);
  for (int a = 0; a < k; ++a) s.beta[s.cols[a]] = r[a];
  return s;
}

Eigen::VectorXd StreamingOls::reduced(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r(cols.size());
  for (std::size_t a = 0; a < cols.size(); ++a) r[a] = x[cols[a]];
  return r;
}

OlsResult StreamingOls::finish(const Eigen::MatrixXd& meat) const {
  OlsResult r;
  r.n = n;
  r.kept = kept;
  r.beta = beta;
  r.se = Eigen::VectorXd::Zero(beta.size());
  r.warnings = warnings;
  if (cols.empty()) return r;
  const Eigen::MatrixXd full = meat.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd V = bread * full * bread;
  for (std::size_t a = 0; a < cols.size(); ++a) r.se[cols[a]] = std::sqrt(std::max(0.0, V(a, a)));
  return r;
}

}  // namespace dplab
