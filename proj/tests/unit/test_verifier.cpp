#include "doctest.h"

#include <cmath>

#include "dplab/errors.hpp"
#include "dplab/optimizer.hpp"
#include "dplab/verifier.hpp"

using namespace dplab;

namespace {

MarketSpec merton() {
  MarketSpec m;
  m.rho = 0.01;
  m.mu = 0.06;
  m.sigma = 0.2;
  m.kappa = 0.5;
  return m;
}

McConfig small(long paths, int steps, std::uint64_t seed = 11) {
  McConfig mc;
  mc.paths = paths;
  mc.steps = steps;
  mc.seed = seed;
  return mc;
}

const Rule unit_dir = [](const PathState&) { return 1.0; };

}  // namespace

TEST_SUITE("verifier") {

TEST_CASE("gateaux: zero strategy is not stationary") {
  const RandomTimeModel cox0 = RandomTimeModel::cox({});
  const GateauxEstimate g = gateaux_derivative(merton(), cox0, constant_strategy(0.0), unit_dir, {}, small(20000, 32));
  // E[Psi] = (mu - rho) T
  CHECK(g.psi.value > 3 * g.psi.se);
  CHECK(std::abs(g.psi.value - 0.05) < 3 * g.psi.se);
  CHECK(std::abs(g.agreement_z) < 3);
}

TEST_CASE("gateaux: merton ratio is stationary, concave") {
  const RandomTimeModel cox0 = RandomTimeModel::cox({});
  const Strategy s = build_strategy(cox0, merton());
  const GateauxEstimate g = gateaux_derivative(merton(), cox0, s, unit_dir, {}, small(20000, 32));
  CHECK(std::abs(g.psi.value) < 3 * g.psi.se);
  CHECK(g.second.value < -3 * g.second.se);
  CHECK(g.second.value == doctest::Approx(-0.04).epsilon(1e-6));  // -sigma^2 T
}

TEST_CASE("paired comparison") {
  const RandomTimeModel cox0 = RandomTimeModel::cox({});
  const Strategy s = build_strategy(cox0, merton());
  const PairedComparison c = compare_strategies(merton(), cox0, s, shifted(s, 0.5), {}, small(5000, 16));
  // J(pi) - J(pi + d) = sigma^2 d^2 / 2 - d sigma W_T
  CHECK(std::abs(c.diff.value - 0.04 * 0.25 / 2) < 3 * c.diff.se + 1e-12);
  CHECK(c.diff.value > 2 * c.diff.se);
}

TEST_CASE("martingale residual: log utility weight is one") {
  const RandomTimeModel cox0 = RandomTimeModel::cox({});
  const MartingaleResidual r =
      martingale_residual(merton(), cox0, build_strategy(cox0, merton()), {}, small(20000, 64), 4);
  CHECK(r.weight_max == doctest::Approx(1.0));
  CHECK(r.pass);
}

TEST_CASE("forward integral at one grid step is the Ito sum") {
  const ForwardReport f = forward_vs_ito(small(200, 64), {1.0 / 64, 4.0 / 64}, {ForwardPreset::constant});
  const auto& rows = f.series.at(0).rows;
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].rms < 1e-12);
  CHECK(rows[1].rms > 1e-3);
}

TEST_CASE("ito check without noise is first order in dt") {
  MarketSpec m = merton();
  m.sigma = 0.0;
  CoxIntensity c;
  c.a = 1.0;
  const ItoCheck k = ito_formula_check(m, RandomTimeModel::cox(c), ItoPreset::square, small(200, 32), 3);
  REQUIRE(k.rows.size() == 4);
  for (std::size_t j = 1; j < k.rows.size(); ++j)
    CHECK(k.rows[j - 1].max_dev / k.rows[j].max_dev == doctest::Approx(2.0).epsilon(0.05));
  CHECK(k.shrinks);
}

TEST_CASE("ito check shrinks for a diffusion") {
  const ItoCheck k = ito_formula_check(merton(), RandomTimeModel::cox({}), ItoPreset::square, small(2000, 16), 3);
  CHECK(k.shrinks);
}

TEST_CASE("wealth exactness") {
  MarketSpec m = merton();
  m.sigma = 0.0;
  CoxIntensity c;
  c.a = 1.0;
  const ExactnessCheck e = wealth_exactness(m, RandomTimeModel::cox(c), 0.5, small(2000, 64));
  CHECK(e.max_abs_err < 1e-12);
  CHECK(e.defaults > 0);
  CHECK_THROWS(wealth_exactness(merton(), RandomTimeModel::cox(c), 0.5, small(10, 8)));
}

TEST_CASE("singularity containment on a small run") {
  const SingularityProbe p = compensator_singularity_probe(RandomTimeModel::argmax(), small(2000, 64), {64, 128});
  CHECK(p.violations == 0);
  // tau = 0 (the maximum sits at the start) falls in no window
  CHECK(p.defaults <= 2000);
  CHECK(p.defaults > 1800);
}

TEST_CASE("cox control drift vanishes") {
  CoxIntensity c;
  c.a = 0.5;
  const DriftScan d = g_drift_regression(RandomTimeModel::cox(c), small(5000, 64));
  CHECK(d.control);
  CHECK(d.pass);
}

}  // TEST_SUITE
