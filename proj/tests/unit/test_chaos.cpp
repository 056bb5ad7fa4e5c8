#include "doctest.h"

#include <cmath>

#include "dplab/chaos.hpp"
#include "dplab/errors.hpp"
#include "dplab/quadrature.hpp"

using namespace dplab;

namespace {
const double kPi = 3.14159265358979323846;

BasisConfig cfg50() { return BasisConfig{}; }

double max_diff(const ChaosVector& a, const ChaosVector& b) { return (a - b).max_abs(); }
}  // namespace

TEST_SUITE("chaos") {

TEST_CASE("multi-index helpers") {
  const MultiIndex a{{1, 2}, {3, 1}};
  CHECK(order(a) == 3);
  CHECK(factorial(a) == 2.0);
  CHECK(power_of(a, 3) == 1);
  CHECK(power_of(a, 2) == 0);
  CHECK(add_unit(a, 3, -1) == MultiIndex{{1, 2}});
  CHECK(add_unit(a, 2) == MultiIndex{{1, 2}, {2, 1}, {3, 1}});
  CHECK(unit(4, 2) == MultiIndex{{4, 2}});
}

TEST_CASE("hermite polynomials") {
  for (double x : {-1.5, 0.0, 2.0}) CHECK(hermite_poly(0, x) == 1.0);
  CHECK(hermite_poly(2, 2.0) == 3.0);
  CHECK(hermite_poly(3, 2.0) == 2.0);
  CHECK(hermite_poly(4, 1.3) == doctest::Approx(std::pow(1.3, 4) - 6 * 1.3 * 1.3 + 3));
  CHECK_THROWS_AS(hermite_poly(-1, 0.0), std::domain_error);
}

TEST_CASE("hermite functions are orthonormal") {
  CHECK(hermite_function(1, 0.0) == doctest::Approx(std::pow(kPi, -0.25)).epsilon(1e-15));
  CHECK_THROWS_AS(hermite_function(0, 0.0), std::domain_error);
  // e_{k+1}(s) = pi^{-1/4} / sqrt(k!) exp(-s^2/2) h_k(sqrt 2 s)
  const double s = 0.7;
  CHECK(hermite_function(4, s) == doctest::Approx(std::pow(kPi, -0.25) / std::sqrt(6.0) * std::exp(-s * s / 2) *
                                                  hermite_poly(3, std::sqrt(2.0) * s))
                                      .epsilon(1e-13));
  const int K = 50;
  const QuadratureRule q = composite_gauss_legendre({-16, -8, -4, 0, 4, 8, 16}, 80);
  double worst = 0.0;
  for (int i = 1; i <= K; i += 7)
    for (int j = i; j <= K; j += 5) {
      const double ip = q.integrate([&](double t) { return hermite_function(i, t) * hermite_function(j, t); });
      worst = std::max(worst, std::abs(ip - (i == j ? 1.0 : 0.0)));
    }
  CHECK(worst < 1e-8);
  const Eigen::VectorXd all = hermite_functions(K, 1.1);
  for (int k = 1; k <= K; ++k) CHECK(all[k - 1] == doctest::Approx(hermite_function(k, 1.1)).epsilon(1e-12));
}

TEST_CASE("chaos presets") {
  const BasisConfig c = cfg50();
  const ChaosVector th = chaos_of("theta1", c);
  CHECK(th.at(unit(1)) == 1.0);
  CHECK(th.c.size() == 1);
  const ChaosVector w2 = chaos_of("W_T^2", c);
  // E[W_T^2] on F_K is the captured part of T: sum of (int_0^T e_k)^2
  const double captured = hermite_integrals(c, 0.0, 1.0).squaredNorm();
  CHECK(w2.mean() == doctest::Approx(captured).epsilon(1e-12));
  CHECK(captured > 0.9);
  const ChaosVector h2 = chaos_of("h2(theta1)", c);
  CHECK(h2.at(unit(1, 2)) == 1.0);
  CHECK(h2.norm2() == 2.0);
  CHECK_THROWS_AS(chaos_of("sin(W_T)", c), Unsupported);
  // W_T coefficients are int_0^T e_k
  const Eigen::VectorXd I = hermite_integrals(c, 0.0, 1.0);
  CHECK(chaos_of("W_T", c).at(unit(7)) == doctest::Approx(I[6]));
}

TEST_CASE("wick product") {
  const BasisConfig c = cfg50();
  const ChaosVector F = chaos_of("W_T", c), one = ChaosVector::constant(1.0, c.K, c.Q);
  CHECK(max_diff(wick_product(F, one), F) == 0.0);
  const ChaosVector t = chaos_of("theta1", c);
  const ChaosVector tt = wick_product(t, t);
  CHECK(tt.at(unit(1, 2)) == 1.0);
  CHECK(tt.c.size() == 1);
  const ChaosVector G = chaos_of("2.5", c) + chaos_of("theta2", c);
  const ChaosVector P = chaos_of("3", c) + F;
  CHECK(wick_product(P, G).mean() == doctest::Approx(P.mean() * G.mean()));
}

TEST_CASE("malliavin derivative") {
  const BasisConfig c = cfg50();
  const ChaosVector d1 = malliavin_derivative(chaos_of("theta1", c), 0.3);
  CHECK(d1.mean() == doctest::Approx(hermite_function(1, 0.3)));
  const double dw = malliavin_derivative(chaos_of("W_T", c), 0.5).mean();
  CHECK(std::abs(dw - 1.0) < 0.05);
  const ChaosVector dh = malliavin_derivative(chaos_of("h2(theta1)", c), 0.2);
  CHECK(dh.at(unit(1)) == doctest::Approx(2 * hermite_function(1, 0.2)));
  CHECK(dh.c.size() == 1);
}

TEST_CASE("skorohod integrals") {
  const BasisConfig c = cfg50();
  const ChaosVector WT = chaos_of("W_T", c);
  const ChaosVector one = ChaosVector::constant(1.0, c.K, c.Q);
  CHECK(max_diff(skorohod_integral([&](double) { return one; }, {0.0, 1.0}, c), WT) < 1e-12);
  // Y = W_T: Skorohod value is W_T <> W_T
  CHECK(max_diff(skorohod_integral([&](double) { return WT; }, {0.0, 1.0}, c), wick_product(WT, WT)) < 1e-12);
  const ChaosVector th = chaos_of("theta1", c);
  CHECK(max_diff(skorohod_integral([&](double) { return th; }, {0.0, 1.0}, c), wick_product(th, WT)) < 1e-12);
}

TEST_CASE("identity checks") {
  const BasisConfig c = cfg50();
  for (const char* f : {"W_T", "2.5", "h2(theta1)", "theta1*theta2", "W_T^2"}) {
    const IdentityResidual r = wick_identity_check(f, 0.25, 0.75, c);
    CHECK_MESSAGE(r.pass, f);
    CHECK(r.residual <= 1e-12 + r.truncation);
  }
  // s = 0, t = T on W_T
  CHECK(wick_identity_check("W_T", 0.0, 1.0, c).pass);
  for (const char* y : {"W_T", "theta1", "adapted_step"}) CHECK_MESSAGE(forward_decomposition_check(y, c).pass, y);
  CHECK_THROWS_AS(forward_decomposition_check("argmax_indicator", c), Unsupported);
}

TEST_CASE("poisson single atom") {
  const BasisConfig c = cfg50();
  const double lam = 2.0, z0 = 1.0;
  // second moment of N~_T: lambda T, less the mass outside F_K
  const double captured = hermite_integrals(c, 0.0, 1.0).squaredNorm();
  CHECK(poisson_power(c, lam, z0, 1).norm2() == doctest::Approx(lam * captured).epsilon(1e-10));
  const ChaosVector sq = poisson_power(c, lam, z0, 2);
  CHECK(sq.mean() == doctest::Approx(lam * captured).epsilon(1e-10));
  for (int d = 0; d <= 3; ++d) {
    const IdentityResidual r = poisson_single_atom_check(d, 0.25, 0.75, {{z0, lam}}, c);
    CHECK_MESSAGE(r.pass, r.name);
  }
  CHECK(poisson_single_atom_check(1, 0.0, 1.0, {{z0, lam}}, c).pass);
  CHECK_THROWS_AS(poisson_single_atom_check(1, 0.2, 0.4, {{1.0, 1.0}, {2.0, 1.0}}, c), Unsupported);
  CHECK_THROWS_AS(poisson_power(c, lam, z0, 4), ConfigError);
}

TEST_CASE("truncation is reported, not hidden") {
  BasisConfig c;
  c.K = 6;
  c.Q = 2;
  const ChaosVector w3 = chaos_of("W_T^3", c);
  CHECK(w3.truncated > 0.0);
  for (const auto& [a, v] : w3.c) CHECK(order(a) <= 2);
}

}  // TEST_SUITE
