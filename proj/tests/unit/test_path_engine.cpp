#include "doctest.h"

#include <cmath>
#include <sstream>

#include "dplab/errors.hpp"
#include "dplab/path_engine.hpp"
#include "dplab/rng.hpp"
#include "dplab/stats.hpp"

using namespace dplab;

TEST_SUITE("path_engine") {

TEST_CASE("grid arithmetic") {
  const TimeGrid g = make_grid(1.0, 4);
  CHECK(g.dt == 0.25);
  for (int i = 0; i <= 4; ++i) CHECK(g.t(i) == 0.25 * i);
  CHECK(make_grid(2.0, 1).dt == 2.0);
  CHECK_THROWS_AS(make_grid(1.0, 0), ConfigError);
  CHECK_THROWS_AS(make_grid(0.0, 4), ConfigError);
  // step_of: (t_k, t_k+1]
  CHECK(g.step_of(0.25) == 0);
  CHECK(g.step_of(0.26) == 1);
  CHECK(g.step_of(1.0) == 3);
}

TEST_CASE("brownian paths are deterministic and have the right law") {
  const TimeGrid g = make_grid(1.0, 8);
  const BrownianPath a = sample_brownian(g, 42), b = sample_brownian(g, 42);
  CHECK(a.W == b.W);
  CHECK(a.W[0] == 0.0);
  MeanAcc wt;
  const long N = 100000;
  for (long s = 0; s < N; ++s) wt.add(sample_brownian(g, path_seed(9, s)).W.back());
  CHECK(std::abs(wt.mean()) < 3.0 * std::sqrt(1.0 / N));
  CHECK(std::abs(wt.variance() - 1.0) < 0.05);
}

TEST_CASE("poisson field counts") {
  const TimeGrid g = make_grid(1.0, 16);
  CHECK(sample_jumps(g, {}, 3).events.empty());
  const LevySpec levy{{0.5, 2.0}};
  MeanAcc n;
  const long N = 100000;
  for (long s = 0; s < N; ++s) n.add(static_cast<double>(sample_jumps(g, levy, path_seed(5, s)).events.size()));
  CHECK(std::abs(n.mean() - 2.0) < 3.0 * std::sqrt(2.0 / N));
  const JumpField x = sample_jumps(g, levy, 77), y = sample_jumps(g, levy, 77);
  REQUIRE(x.events.size() == y.events.size());
  for (std::size_t i = 0; i < x.events.size(); ++i) {
    CHECK(x.events[i].t == y.events[i].t);
    CHECK(x.events[i].step == g.step_of(x.events[i].t));
  }
  CHECK_THROWS_AS(validate_levy({{0.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(validate_levy({{1.0, -1.0}}), ConfigError);
}

TEST_CASE("running extrema") {
  const Extrema e = running_extrema(brownian_from_levels({0, 1, 0.5, 2}));
  CHECK(e.max == std::vector<double>{0, 1, 1, 2});
  CHECK(running_extrema(brownian_from_levels({0, -1, -2})).max == std::vector<double>{0, 0, 0});
  const Extrema c = running_extrema(brownian_from_levels({0, 0, 0}));
  CHECK(c.max == c.min);
  CHECK(e.fwd_max == std::vector<double>{2, 2, 2, 2});
}

TEST_CASE("refine keeps coarse levels and projects back") {
  const TimeGrid g = make_grid(1.0, 4);
  const PathBundle b = make_bundle(g, {{1.0, 3.0}}, 11);
  const PathBundle f = refine(b, 2, 99);
  REQUIRE(f.grid.n == 8);
  for (int i = 0; i <= 4; ++i) CHECK(f.brownian.W[2 * i] == b.brownian.W[i]);
  const PathBundle back = subsample(f, 2);
  CHECK(back.brownian.W == b.brownian.W);
  CHECK(back.jumps.events.size() == b.jumps.events.size());
  CHECK_THROWS_AS(refine(b, 1, 1), ConfigError);
}

TEST_CASE("bridge variance identity") {
  // sum of squared fine increments over a coarse step has mean dt_coarse
  const TimeGrid g = make_grid(1.0, 2);
  MeanAcc q;
  for (long s = 0; s < 20000; ++s) {
    const PathBundle f = refine(make_bundle(g, {}, path_seed(1, s)), 4, s);
    double v = 0.0;
    for (int j = 0; j < 4; ++j) v += f.brownian.dW[j] * f.brownian.dW[j];
    q.add(v);
  }
  CHECK(std::abs(q.mean() - 0.5) < 4.0 * q.se());
}

TEST_CASE("bundle json round trip") {
  const PathBundle b = make_bundle(make_grid(1.0, 8), {{1.0, 4.0}}, 5);
  const PathBundle c = bundle_from_json(to_json(b));
  CHECK(c.brownian.W == b.brownian.W);
  REQUIRE(c.jumps.events.size() == b.jumps.events.size());
  std::ostringstream os;
  write_csv(os, b);
  CHECK(os.str().find('\n') != std::string::npos);
}

}  // TEST_SUITE
