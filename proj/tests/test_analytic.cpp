#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rmtlab/analytic.hpp"
#include "rmtlab/quadrature.hpp"

using namespace rmtlab;
using Catch::Approx;

namespace {

// independent trapezoid evaluation of the double integral in theta
// coordinates; deliberately a different rule than the implementation
double double_term_trapezoid(const TestFunction& phi, int grid) {
  const double h = M_PI / grid;
  double acc = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double wi = (i == 0 || i == grid) ? 0.5 : 1.0;
    const double l1 = 2.0 * std::cos(i * h);
    const double f1 = phi.eval(l1);
    for (int j = 0; j <= grid; ++j) {
      const double wj = (j == 0 || j == grid) ? 0.5 : 1.0;
      const double l2 = 2.0 * std::cos(j * h);
      const double q = std::abs(l1 - l2) < 1e-9
                           ? phi.derivative(l1)
                           : (f1 - phi.eval(l2)) / (l1 - l2);
      acc += wi * wj * q * q * (4.0 - l1 * l2);
    }
  }
  return acc * h * h / (2.0 * M_PI * M_PI);
}

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const GaussLegendre gl(5);
  // degree 9 is exact for a 5-point rule
  const double val = gl.integrate([](double x) { return std::pow(x, 9) + x * x; }, -1.0, 1.0);
  REQUIRE(val == Approx(2.0 / 3.0).margin(1e-14));
  const double shifted = gl.integrate([](double x) { return x * x * x; }, 0.0, 2.0);
  REQUIRE(shifted == Approx(4.0).margin(1e-12));
  double wsum = 0.0;
  for (double w : gl.weights()) wsum += w;
  REQUIRE(wsum == Approx(2.0).margin(1e-14));
}

TEST_CASE("semicircle density values") {
  REQUIRE(semicircle_density(2.0) == 0.0);
  REQUIRE(semicircle_density(3.0) == 0.0);
  REQUIRE(semicircle_density(-2.5) == 0.0);
  REQUIRE(semicircle_density(0.0) == Approx(1.0 / M_PI).epsilon(1e-14));
}

TEST_CASE("marchenko-pastur density values and domain") {
  REQUIRE(mp_density(1.0, 1.0) == Approx(std::sqrt(3.0) / (2.0 * M_PI)).epsilon(1e-14));
  REQUIRE(mp_density(4.0, 1.0) == 0.0);
  REQUIRE(mp_density(0.2, 0.25) == 0.0);  // below a = 0.25
  REQUIRE_THROWS_AS(mp_density(1.0, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(mp_density(1.0, -0.5), std::domain_error);
  REQUIRE_THROWS_AS(mp_density(1.0, 1.5), std::domain_error);
}

TEST_CASE("densities integrate to one") {
  const GaussLegendre gl(200);
  const double sc = gl.integrate(
      [](double th) { return semicircle_density(2.0 * std::cos(th)) * 2.0 * std::sin(th); },
      0.0, M_PI);
  REQUIRE(sc == Approx(1.0).margin(1e-10));
  for (double y : {0.25, 0.5, 1.0}) {
    const double sy = std::sqrt(y);
    const double a = (1.0 - sy) * (1.0 - sy), b = (1.0 + sy) * (1.0 + sy);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double total = gl.integrate(
        [&](double th) {
          return mp_density(mid - half * std::cos(th), y) * half * std::sin(th);
        },
        0.0, M_PI);
    REQUIRE(total == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("stieltjes transform closed-form points") {
  const Complex f2i = semicircle_stieltjes(Complex(0, 2));
  REQUIRE(f2i.real() == Approx(0.0).margin(1e-15));
  REQUIRE(f2i.imag() == Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));

  const Complex fi = semicircle_stieltjes(Complex(0, 1));
  REQUIRE(fi.imag() == Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));

  const Complex zfar(0, 1e6);
  const Complex ffar = semicircle_stieltjes(zfar);
  REQUIRE(std::abs(ffar - (-1.0 / zfar)) <= 1e-11 * std::abs(1.0 / zfar));

  REQUIRE_THROWS_AS(semicircle_stieltjes(Complex(1.0, 0.0)), std::domain_error);
  REQUIRE_THROWS_AS(semicircle_stieltjes(Complex(1.0, -0.1)), std::domain_error);
}

TEST_CASE("branch law and quadratic residual on an upper-half-plane grid") {
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const Complex z(-4.0 + 8.0 * i / 9.0, std::pow(10.0, -2.0 + 4.0 * j / 9.0));
      const Complex f = semicircle_stieltjes(z);
      REQUIRE(f.imag() > 0.0);
      REQUIRE(std::abs(f) < 1.0);
      REQUIRE(std::abs(f * f + z * f + 1.0) <= 1e-12);
      REQUIRE(self_consistency_residual(z, f) <= 1e-12);
    }
  }
}

TEST_CASE("self-consistency residual fixtures") {
  REQUIRE(self_consistency_residual(Complex(0, 2), Complex(0, 0.4142136)) < 1e-6);
  REQUIRE(self_consistency_residual(Complex(0, 1), Complex(0, 0.6180340)) < 1e-6);
  REQUIRE(self_consistency_residual(Complex(0, 2), Complex(0, 0)) == Approx(0.5).epsilon(1e-14));
  REQUIRE_THROWS_AS(self_consistency_residual(Complex(0, 2), Complex(0, -2)),
                    std::domain_error);
}

TEST_CASE("expansion prediction matches the exact surd evaluation at 2i") {
  const ExpansionTerms t = expansion_prediction(Complex(0, 2), 100, 10000, 0.0);

  // exact values: f = i(sqrt(2)-1); bracket = 1 - 1/800 + i 0.1 f^3/(1-f^2)
  const double a = std::sqrt(2.0) - 1.0;
  REQUIRE(t.leading.real() == Approx(0.0).margin(1e-15));
  REQUIRE(t.leading.imag() == Approx(a).epsilon(1e-15));
  REQUIRE(t.total.real() == Approx(-0.0025126).margin(5e-8));
  REQUIRE(t.total.imag() == Approx(0.4136958).margin(5e-8));

  // f^2/(1-f^2)^2 = -1/8 exactly at z = 2i
  const Complex f = t.leading;
  const Complex coeff = f * f / ((1.0 - f * f) * (1.0 - f * f));
  REQUIRE(std::abs(coeff - Complex(-0.125, 0.0)) <= 1e-15);

  // first order term is real and negative at 2i: -0.1 * f^4/(1-f^2)
  const double f4_over = (17.0 - 12.0 * std::sqrt(2.0)) / (4.0 - 2.0 * std::sqrt(2.0));
  REQUIRE(t.first_order.real() == Approx(-0.1 * f4_over).epsilon(1e-13));
  REQUIRE(t.first_order.imag() == Approx(0.0).margin(1e-15));

  REQUIRE(t.total == t.leading + t.first_order + t.second_order);
}

TEST_CASE("expansion first-order magnitude at M = 1e8") {
  const ExpansionTerms t = expansion_prediction(Complex(0, 2), 100, 100000000, 0.0);
  const double f4_over = (17.0 - 12.0 * std::sqrt(2.0)) / (4.0 - 2.0 * std::sqrt(2.0));
  REQUIRE(std::abs(t.first_order) == Approx(1e-3 * f4_over).epsilon(1e-12));
  REQUIRE(std::abs(t.first_order) == Approx(2.5127e-5).epsilon(1e-4));
}

TEST_CASE("expansion corrections vanish in the joint limit") {
  const Complex f = semicircle_stieltjes(Complex(0, 2));
  const ExpansionTerms t =
      expansion_prediction(Complex(0, 2), 1000000, 1000000000, 0.0);
  // sqrt(N/M) = 0.0316 here, so the first term still dominates the gap
  REQUIRE(std::abs(t.total - f) < 1e-3);
  REQUIRE(std::abs(t.first_order) < 1e-3);
  REQUIRE(std::abs(t.second_order) < 1e-6);
}

TEST_CASE("expansion prediction rejects bad inputs") {
  REQUIRE_THROWS_AS(expansion_prediction(Complex(0, 2), 1, 100, 0.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(expansion_prediction(Complex(0, 2), 100, 50, 0.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(expansion_prediction(Complex(0, -2), 100, 1000, 0.0),
                    std::domain_error);
  // |1 - f^2| < 1e-10 right at the spectral edge
  REQUIRE_THROWS_AS(expansion_prediction(Complex(2.0, 1e-22), 100, 1000, 0.0),
                    std::domain_error);
}

TEST_CASE("variance functional closed forms") {
  const QuadratureSpec spec{};
  for (double k4 : {0.0, -2.0, -6.0 / 5.0}) {
    REQUIRE(variance_functional(find_test_function("x"), k4, spec).total ==
            Approx(2.0 + k4).margin(1e-6));
    REQUIRE(variance_functional(find_test_function("x2"), k4, spec).total ==
            Approx(4.0).margin(1e-6));
    REQUIRE(variance_functional(find_test_function("x3"), k4, spec).total ==
            Approx(24.0 + 9.0 * k4).margin(1e-6));
    REQUIRE(variance_functional(find_test_function("x4"), k4, spec).total ==
            Approx(72.0).margin(1e-6));
  }
  const VarianceTerms one = variance_functional(find_test_function("1"), -2.0, spec);
  REQUIRE(one.total == Approx(0.0).margin(1e-12));
  REQUIRE(one.double_term >= -1e-10);

  // the kappa4 integral for x: int mu^2/sqrt(4-mu^2) dmu = 2 pi
  const VarianceTerms vx = variance_functional(find_test_function("x"), 1.0, spec);
  REQUIRE(vx.moment_integral == Approx(2.0 * M_PI).margin(1e-10));
  REQUIRE(vx.kappa_term == Approx(1.0).margin(1e-9));
}

TEST_CASE("variance functional against an independent trapezoid evaluation") {
  const QuadratureSpec spec{};
  for (const char* name : {"x2", "x3"}) {
    const TestFunction& phi = find_test_function(name);
    const double gl_val = variance_functional(phi, 0.0, spec).double_term;
    const double tz_val = double_term_trapezoid(phi, 3000);
    REQUIRE(gl_val == Approx(tz_val).margin(1e-6));
  }
}

TEST_CASE("variance quadrature converges and is axis-symmetric") {
  TestFunction x6{"x6", [](double x) { return std::pow(x, 6); },
                  [](double x) { return 6.0 * std::pow(x, 5); }};
  for (const TestFunction& phi :
       {find_test_function("x2"), find_test_function("x4"), x6}) {
    QuadratureSpec q64{};
    q64.order = 64;
    QuadratureSpec q128{};
    q128.order = 128;
    const double v1 = variance_functional(phi, -1.0, q64).total;
    const double v2 = variance_functional(phi, -1.0, q128).total;
    REQUIRE(std::abs(v1 - v2) <= 1e-8);
  }
  const QuadratureSpec spec{};
  const double direct = detail::variance_double_term(find_test_function("x3"), spec, false);
  const double swapped = detail::variance_double_term(find_test_function("x3"), spec, true);
  REQUIRE(std::abs(direct - swapped) <= 1e-12);
}

TEST_CASE("quadrature spec validation") {
  QuadratureSpec bad{};
  bad.order = 4;
  REQUIRE_THROWS_AS(variance_functional(find_test_function("x"), 0.0, bad),
                    std::invalid_argument);
  QuadratureSpec bad2{};
  bad2.diag_threshold = 0.0;
  REQUIRE_THROWS_AS(variance_functional(find_test_function("x"), 0.0, bad2),
                    std::invalid_argument);
}

TEST_CASE("test function library lookup and fallback derivative") {
  REQUIRE(find_test_function("x2").eval(3.0) == 9.0);
  REQUIRE_THROWS_AS(find_test_function("cube"), std::invalid_argument);
  TestFunction no_deriv{"f", [](double x) { return x * x; }, nullptr};
  REQUIRE(no_deriv.derivative(2.0) == Approx(4.0).margin(1e-6));
}
