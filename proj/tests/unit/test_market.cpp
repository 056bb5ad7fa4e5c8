#include "doctest.h"

#include <cmath>
#include <limits>

#include "dplab/errors.hpp"
#include "dplab/market.hpp"
#include "dplab/rng.hpp"
#include "dplab/stats.hpp"

using namespace dplab;

namespace {

MarketSpec flat(double rho, double mu, double sigma, double kappa) {
  MarketSpec m;
  m.rho = rho;
  m.mu = mu;
  m.sigma = sigma;
  m.kappa = kappa;
  return m;
}

DefaultTime default_at(const TimeGrid& g, double tau) {
  DefaultTime d;
  d.defaulted = true;
  d.tau = tau;
  d.step = g.step_of(tau);
  return d;
}

DefaultTime never(const TimeGrid& g) {
  DefaultTime d;
  d.tau = std::numeric_limits<double>::infinity();
  d.step = g.n;
  return d;
}

}  // namespace

TEST_SUITE("market") {

TEST_CASE("validation") {
  CHECK_NOTHROW(validate(flat(0.01, 0.06, 0.2, 0.5)));
  CHECK_THROWS_WITH_AS(validate(flat(0.01, 0.06, 0.2, 0.0)), doctest::Contains("κ ≠ 0"), ConfigError);
  CHECK_THROWS_AS(validate(flat(0.01, 0.06, 0.2, -1.0)), ConfigError);
  CHECK_THROWS_AS(validate(flat(0.01, 0.06, -0.2, 0.5)), ConfigError);
  MarketSpec m = flat(0.0, 0.0, 0.2, 0.5);
  m.levy = {{1.0, 1.0}};
  CHECK_THROWS_AS(validate(m), ConfigError);  // theta missing
  m.theta = {Switching(-1.0)};
  CHECK_THROWS_AS(validate(m), ConfigError);
}

TEST_CASE("asset paths") {
  const TimeGrid g = make_grid(1.0, 64);
  const PathBundle b = make_bundle(g, {}, 3);
  const auto S = simulate_asset(flat(0, 0, 0, 0.5), b, default_at(g, 0.4));
  CHECK(S.back() == doctest::Approx(1.5).epsilon(1e-14));
  const auto S2 = simulate_asset(flat(0, 0.1, 0, 0.5), b, never(g));
  CHECK(S2.back() == doctest::Approx(std::exp(0.1)).epsilon(1e-13));
}

TEST_CASE("jump drift correction ln(1+theta) - theta") {
  MarketSpec m = flat(0, 0, 0, 0.5);
  m.levy = {{1.0, 1.0}};
  m.theta = {Switching(-0.2)};
  const TimeGrid g = make_grid(1.0, 32);
  MeanAcc lnS;
  for (long p = 0; p < 40000; ++p) {
    const PathBundle b = make_bundle(g, m.levy, path_seed(8, p));
    const double l = std::log(simulate_asset(m, b, never(g)).back());
    // exact per path: N ln(0.8) + 0.2
    CHECK(std::abs(l - (b.jumps.events.size() * std::log(0.8) + 0.2)) < 1e-12);
    lnS.add(l);
  }
  const double oracle = std::log(0.8) + 0.2;
  CHECK(oracle == doctest::Approx(-0.023144).epsilon(1e-5));
  CHECK(std::abs(lnS.mean() - oracle) < 3 * lnS.se());
}

TEST_CASE("wealth closed forms") {
  const TimeGrid g = make_grid(1.0, 50);
  const PathBundle b = make_bundle(g, {}, 12);
  MarketSpec m = flat(0.01, 0.2, 0.3, 0.5);
  CHECK(std::exp(simulate_wealth(m, constant_strategy(0.0), b, never(g)).logX.back()) ==
        doctest::Approx(std::exp(0.01)).epsilon(1e-14));
  m = flat(0.03, 0.03, 0.0, 0.5);
  const WealthPath w = simulate_wealth(m, constant_strategy(1.0), b, default_at(g, 0.37));
  CHECK(w.XT == doctest::Approx(std::exp(0.03) * 1.5).epsilon(1e-13));
  CHECK(w.defaulted);
}

TEST_CASE("expected log wealth without default") {
  const MarketSpec m = flat(0.01, 0.07, 0.25, 0.5);
  const TimeGrid g = make_grid(1.0, 16);
  const double pi = 0.8;
  MeanAcc L;
  for (long p = 0; p < 50000; ++p)
    L.add(simulate_wealth(m, constant_strategy(pi), make_bundle(g, {}, path_seed(4, p)), never(g)).logX.back());
  const double oracle = 0.01 + pi * 0.06 - 0.5 * pi * pi * 0.0625;
  CHECK(std::abs(L.mean() - oracle) < 3 * L.se());
}

TEST_CASE("admissibility") {
  const TimeGrid g = make_grid(1.0, 16);
  MarketSpec m = flat(0, 0.05, 0.2, 0.5);
  m.levy = {{1.0, 3.0}};
  m.theta = {Switching(-0.1)};
  const PathBundle b = make_bundle(g, m.levy, 2);
  const auto ok = check_admissibility(constant_strategy(0.0), m, b, never(g));
  CHECK(ok.pass);
  CHECK(ok.min_jump_margin == 1.0);
  CHECK(ok.min_default_margin == 1.0);
  const auto bad = check_admissibility(constant_strategy(12.0), m, b, never(g));
  CHECK_FALSE(bad.pass);
  CHECK(bad.min_jump_margin == doctest::Approx(-0.2));
  // 1 + pi*kappa = eps/2 at one step only
  const double eps = 1e-6;
  Strategy s = constant_strategy(0.0, eps);
  s.before = [&](const PathState& st) { return st.i == 5 ? (eps / 2 - 1.0) / 0.5 : 0.0; };
  MarketSpec nj = flat(0, 0.05, 0.2, 0.5);
  const auto r = check_admissibility(s, nj, make_bundle(g, {}, 2), never(g));
  CHECK_FALSE(r.pass);
  CHECK(r.failing_step == 5);
}

TEST_CASE("utility") {
  CHECK(utility_value(1.0, UtilitySpec::log_utility()) == 0.0);
  CHECK(utility_value(4.0, UtilitySpec::power(0.5)) == doctest::Approx(4.0));
  CHECK(utility_value(0.0, UtilitySpec::log_utility()) == -std::numeric_limits<double>::infinity());
  CHECK(marginal_times_wealth(7.0, UtilitySpec::log_utility()) == 1.0);
  CHECK(marginal_times_wealth(4.0, UtilitySpec::power(0.5)) == doctest::Approx(2.0));
  CHECK(utility_of_log(std::log(4.0), UtilitySpec::power(0.5)) == doctest::Approx(4.0));
  CHECK_THROWS_AS(UtilitySpec::power(1.0), ConfigError);
}

TEST_CASE("objective estimate") {
  McConfig mc;
  mc.steps = 32;
  mc.paths = 20000;
  mc.seed = 17;
  CoxIntensity c;
  c.a = 0.6;
  const MarketSpec m = flat(0.01, 0.06, 0.2, 0.5);
  const ObjectiveEstimate e = estimate_objective(m, RandomTimeModel::cox(c), constant_strategy(0.7), {}, mc);
  CHECK(e.J == e.alive_term + e.default_term);
  CHECK(std::abs(e.default_rate - (1 - std::exp(-0.6))) < 3 * e.default_rate_se);
  // sigma = theta = 0 and lambda = 0: deterministic
  CoxIntensity z;
  const ObjectiveEstimate d = estimate_objective(flat(0.01, 0.06, 0.0, 0.5), RandomTimeModel::cox(z),
                                                 constant_strategy(0.7), {}, mc);
  CHECK(d.se < 1e-9);  // rounding in the chunk merge only
  CHECK(d.J == doctest::Approx(0.01 + 0.7 * 0.05).epsilon(1e-12));
}

TEST_CASE("objective is independent of the thread count") {
  McConfig mc;
  mc.steps = 16;
  mc.paths = 3000;
  mc.seed = 5;
  const MarketSpec m = flat(0.01, 0.06, 0.2, 0.5);
  mc.threads = 1;
  const auto a = estimate_objective(m, RandomTimeModel::half_final(), constant_strategy(0.5), {}, mc);
  mc.threads = 3;
  const auto b = estimate_objective(m, RandomTimeModel::half_final(), constant_strategy(0.5), {}, mc);
  CHECK(a.J == b.J);
  CHECK(a.se == b.se);
}

TEST_CASE("inadmissible scenario names the bound") {
  McConfig mc;
  mc.steps = 16;
  mc.paths = 200;
  CoxIntensity c;
  c.a = 2.0;
  try {
    estimate_objective(flat(0, 0.05, 0.2, 0.5), RandomTimeModel::cox(c), constant_strategy(-3.0), {}, mc);
    FAIL("expected AdmissibilityError");
  } catch (const AdmissibilityError& e) {
    CHECK(std::string(e.what()).find("1+pi*kappa") != std::string::npos);
  }
}

}  // TEST_SUITE
