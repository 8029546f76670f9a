#ifndef RMTLAB_ANALYTIC_HPP
#define RMTLAB_ANALYTIC_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/quadrature.hpp"

namespace rmtlab {

using Complex = std::complex<double>;

inline void require_upper_half(Complex z) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("spectral parameter must satisfy Im z > 0");
}

// Semicircle density (unit variance): (1/2pi) sqrt(4 - x^2) on [-2,2].
inline double semicircle_density(double x) {
  const double d = 4.0 - x * x;
  return d > 0.0 ? std::sqrt(d) / (2.0 * M_PI) : 0.0;
}

// Marchenko-Pastur density for aspect ratio y in (0,1], unit variance:
// (1/(2 pi x y)) sqrt((b-x)(x-a)) on [a,b], a=(1-sqrt(y))^2, b=(1+sqrt(y))^2.
inline double mp_density(double x, double y) {
  if (!(y > 0.0) || y > 1.0)
    throw std::domain_error("mp_density requires 0 < y <= 1");
  const double sy = std::sqrt(y);
  const double a = (1.0 - sy) * (1.0 - sy);
  const double b = (1.0 + sy) * (1.0 + sy);
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((b - x) * (x - a)) / (2.0 * M_PI * x * y);
}

// Stieltjes transform of the semicircle law, f(z) = (-z + sqrt(z^2-4))/2,
// square root branch picked so that Im f > 0. Satisfies f^2 + z f + 1 = 0.
// The two roots multiply to 1, so the small one is evaluated as the
// reciprocal of the large one; this avoids the cancellation in -z + sqrt(...)
// for large |z|.
inline Complex semicircle_stieltjes(Complex z) {
  require_upper_half(z);
  const Complex r = std::sqrt(z * z - 4.0);
  const Complex plus = 0.5 * (-z + r);
  const Complex minus = 0.5 * (-z - r);
  const Complex big = std::abs(plus) >= std::abs(minus) ? plus : minus;
  const Complex small = 1.0 / big;
  return small.imag() > 0.0 ? small : big;
}

// |f + 1/(z+f)|: zero iff f solves the semicircle fixed-point equation.
inline double self_consistency_residual(Complex z, Complex f_value) {
  require_upper_half(z);
  const Complex den = z + f_value;
  if (std::abs(den) < 1e-14)
    throw std::domain_error("self_consistency_residual: degenerate denominator");
  return std::abs(f_value + 1.0 / den);
}

// Terms of the two-correction expansion of E{m_N(z)} around f(z):
//   f * { 1 - sqrt(N/M) f^3/(1-f^2) + (1/N)(f^2/(1-f^2)^2 + k4 f^2/(1-f^2)) }
struct ExpansionTerms {
  Complex leading;       // f(z)
  Complex first_order;   // -sqrt(N/M) f^4/(1-f^2)
  Complex second_order;  // (1/N) f (f^2/(1-f^2)^2 + k4 f^2/(1-f^2))
  Complex total;         // sum of the three, exactly
};

inline ExpansionTerms expansion_prediction(Complex z, int n, int m,
                                           double kappa4) {
  require_upper_half(z);
  if (n < 2) throw std::invalid_argument("expansion_prediction requires N >= 2");
  if (m < n) throw std::invalid_argument("expansion_prediction requires M >= N");
  const Complex f = semicircle_stieltjes(z);
  const Complex f2 = f * f;
  const Complex one_mf2 = 1.0 - f2;
  if (std::abs(one_mf2) < 1e-10)
    throw std::domain_error("expansion_prediction: z too close to the spectral edge");
  ExpansionTerms t;
  t.leading = f;
  t.first_order = -std::sqrt(static_cast<double>(n) / m) * f2 * f2 / one_mf2;
  t.second_order =
      (f / static_cast<double>(n)) *
      (f2 / (one_mf2 * one_mf2) + kappa4 * f2 / one_mf2);
  t.total = t.leading + t.first_order + t.second_order;
  return t;
}

// A real test function with an optional analytic derivative; when absent a
// central difference with step 1e-6 stands in.
struct TestFunction {
  std::string name;
  std::function<double(double)> eval;
  std::function<double(double)> deriv;

  double derivative(double x) const {
    if (deriv) return deriv(x);
    const double h = 1e-6;
    return (eval(x + h) - eval(x - h)) / (2.0 * h);
  }
};

inline const std::vector<TestFunction>& test_function_library() {
  static const std::vector<TestFunction> lib = {
      {"1", [](double) { return 1.0; }, [](double) { return 0.0; }},
      {"x", [](double x) { return x; }, [](double) { return 1.0; }},
      {"x2", [](double x) { return x * x; }, [](double x) { return 2.0 * x; }},
      {"x3", [](double x) { return x * x * x; },
       [](double x) { return 3.0 * x * x; }},
      {"x4", [](double x) { return x * x * x * x; },
       [](double x) { return 4.0 * x * x * x; }},
  };
  return lib;
}

inline const TestFunction& find_test_function(const std::string& name) {
  for (const auto& t : test_function_library())
    if (t.name == name) return t;
  throw std::invalid_argument("unknown test function: " + name);
}

struct QuadratureSpec {
  int order = 200;
  double diag_threshold = 1e-8;

  void validate() const {
    if (order < 8) throw std::invalid_argument("quadrature order must be >= 8");
    if (!(diag_threshold > 0.0))
      throw std::invalid_argument("diag_threshold must be > 0");
  }
};

struct VarianceTerms {
  double double_term;      // the two-dimensional integral contribution
  double moment_integral;  // int phi(mu) mu / sqrt(4-mu^2) dmu
  double kappa_term;       // (k4/4pi^2) * moment_integral^2
  double total;
};

namespace detail {

// Double term of the limiting variance in theta coordinates
// (lambda = 2 cos theta turns the weight into (4 - l1 l2) d theta^2):
//   (1/2pi^2) int int ((phi(l1)-phi(l2))/(l1-l2))^2 (4 - l1 l2) dtheta1 dtheta2.
// transpose_axes only changes the accumulation order (used as a symmetry check).
inline double variance_double_term(const TestFunction& phi,
                                   const QuadratureSpec& spec,
                                   bool transpose_axes = false) {
  const GaussLegendre gl(spec.order);
  const int q = gl.order();
  std::vector<double> theta_w(q), lambda(q), fval(q);
  for (int i = 0; i < q; ++i) {
    const double theta = 0.5 * M_PI * (gl.nodes()[i] + 1.0);
    theta_w[i] = 0.5 * M_PI * gl.weights()[i];
    lambda[i] = 2.0 * std::cos(theta);
    fval[i] = phi.eval(lambda[i]);
  }
  double acc = 0.0;
  for (int i = 0; i < q; ++i) {
    double row = 0.0;
    for (int j = 0; j < q; ++j) {
      const int r = transpose_axes ? j : i;
      const int c = transpose_axes ? i : j;
      const double dl = lambda[r] - lambda[c];
      const double quot = std::abs(dl) < spec.diag_threshold
                              ? phi.derivative(lambda[r])
                              : (fval[r] - fval[c]) / dl;
      row += theta_w[j] * quot * quot * (4.0 - lambda[r] * lambda[c]);
    }
    acc += theta_w[i] * row;
  }
  return acc / (2.0 * M_PI * M_PI);
}

}  // namespace detail

// Limiting variance of the centered linear eigenvalue statistic:
// the smooth double integral plus the kappa4 correction
//   (k4/4pi^2) (int phi(mu) mu / sqrt(4-mu^2) dmu)^2.
inline VarianceTerms variance_functional(const TestFunction& phi, double kappa4,
                                         const QuadratureSpec& spec = {}) {
  spec.validate();
  VarianceTerms out;
  out.double_term = detail::variance_double_term(phi, spec);

  const GaussLegendre gl(spec.order);
  double j = 0.0;
  for (int i = 0; i < gl.order(); ++i) {
    const double theta = 0.5 * M_PI * (gl.nodes()[i] + 1.0);
    const double w = 0.5 * M_PI * gl.weights()[i];
    const double mu = 2.0 * std::cos(theta);
    j += w * phi.eval(mu) * mu;
  }
  out.moment_integral = j;
  out.kappa_term = kappa4 / (4.0 * M_PI * M_PI) * j * j;
  out.total = out.double_term + out.kappa_term;
  return out;
}

}  // namespace rmtlab

#endif
