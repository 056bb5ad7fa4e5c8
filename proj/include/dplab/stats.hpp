#pragma once

#include <cmath>
#include <cstddef>

namespace dplab {

struct MeanAcc {
  double n = 0.0, sum = 0.0, sumsq = 0.0;

  void add(double x) {
    n += 1.0;
    sum += x;
    sumsq += x * x;
  }
  void merge(const MeanAcc& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sumsq - n * m * m) / (n - 1.0));
  }
  double se() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
};

// Point estimate with its Monte Carlo standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

}  // namespace dplab
