#ifndef RMTLAB_VERIFY_HPP
#define RMTLAB_VERIFY_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/analytic.hpp"
#include "rmtlab/entries.hpp"
#include "rmtlab/matrixlab.hpp"
#include "rmtlab/montecarlo.hpp"
#include "rmtlab/stats.hpp"

namespace rmtlab {

// Deterministic sub-minute battery of the closed-form and small-matrix
// checks. Prints one line per check; returns 0 iff all pass. `fault`
// injects a known defect ("branch" negates the square-root branch) so the
// battery itself can be validated.
class VerifyBattery {
 public:
  VerifyBattery(std::uint64_t seed, std::string fault, std::ostream& os)
      : seed_(seed), fault_(std::move(fault)), os_(os) {}

  int run() {
    check("branch law", [&] { return branch_law(); });
    check("quadratic residual", [&] { return quadratic_residual(); });
    check("density normalization", [&] { return density_normalization(); });
    check("stieltjes-density consistency", [&] { return stieltjes_density(); });
    check("expansion structure", [&] { return expansion_structure(); });
    check("variance quadrature", [&] { return variance_quadrature(); });
    check("moments and cumulants", [&] { return moments_cumulants(); });
    check("truncate and recenter", [&] { return truncate_recenter_checks(); });
    check("trace identities", [&] { return trace_identities(); });
    check("eigensolver oracle", [&] { return eigensolver_oracle(); });
    check("resolvent identity", [&] { return resolvent_identity(); });
    check("empirical stieltjes", [&] { return empirical_stieltjes_checks(); });
    check("resolvent derivatives", [&] { return resolvent_derivatives(); });
    check("interlacing", [&] { return interlacing(); });
    check("stein gaussian identity", [&] { return stein_gaussian(); });
    check("stats merge", [&] { return stats_merge(); });
    check("ks statistic", [&] { return ks_checks(); });
    check("ensemble determinism", [&] { return ensemble_determinism(); });
    return failures_ == 0 ? 0 : 1;
  }

 private:
  std::uint64_t seed_;
  std::string fault_;
  std::ostream& os_;
  int failures_ = 0;

  // the transform under test; the "branch" fault picks the wrong root
  Complex transform(Complex z) const {
    const Complex f = semicircle_stieltjes(z);
    return fault_ == "branch" ? -z - f : f;  // other root of f^2 + z f + 1
  }

  void check(const char* name, const std::function<std::pair<bool, std::string>()>& fn) {
    std::pair<bool, std::string> r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (r.first) {
      os_ << "[ ok ] " << name << ": " << r.second << "\n";
    } else {
      os_ << "[FAIL] " << name << ": " << r.second << "\n";
      ++failures_;
    }
  }

  static std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  std::vector<Complex> grid100() const {
    std::vector<Complex> g;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double re = -4.0 + 8.0 * i / 9.0;
        const double im = std::pow(10.0, -2.0 + 4.0 * j / 9.0);
        g.emplace_back(re, im);
      }
    return g;
  }

  std::pair<bool, std::string> branch_law() {
    int bad = 0;
    for (const Complex& z : grid100()) {
      const Complex f = transform(z);
      if (!(f.imag() > 0.0) || !(std::abs(f) < 1.0)) ++bad;
    }
    if (bad) return {false, std::to_string(bad) + "/100 grid points violate Im f > 0, |f| < 1"};
    return {true, "Im f > 0 and |f| < 1 on all 100 grid points"};
  }

  std::pair<bool, std::string> quadratic_residual() {
    double worst = 0.0;
    for (const Complex& z : grid100()) {
      const Complex f = transform(z);
      worst = std::max(worst, std::abs(f * f + z * f + 1.0));
      worst = std::max(worst, self_consistency_residual(z, f));
    }
    if (worst > 1e-12) return {false, "max residual " + fmt(worst) + " > 1e-12"};
    return {true, "max residual " + fmt(worst)};
  }

  std::pair<bool, std::string> density_normalization() {
    const GaussLegendre gl(200);
    const double sc = gl.integrate(
        [](double th) { return semicircle_density(2.0 * std::cos(th)) * 2.0 * std::sin(th); },
        0.0, M_PI);
    double worst = std::abs(sc - 1.0);
    for (double y : {0.25, 0.5, 1.0}) {
      const double sy = std::sqrt(y);
      const double a = (1.0 - sy) * (1.0 - sy), b = (1.0 + sy) * (1.0 + sy);
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      const double total = gl.integrate(
          [&](double th) {
            const double x = mid - half * std::cos(th);
            return mp_density(x, y) * half * std::sin(th);
          },
          0.0, M_PI);
      worst = std::max(worst, std::abs(total - 1.0));
    }
    if (worst > 1e-10) return {false, "normalization off by " + fmt(worst)};
    return {true, "semicircle and MP masses equal 1 within " + fmt(worst)};
  }

  std::pair<bool, std::string> stieltjes_density() {
    const double eta = 1e-4;
    double worst = 0.0;
    for (int i = 0; i <= 95; ++i) {
      const double x = -1.9 + 3.8 * i / 95.0;
      const double lhs = transform(Complex(x, eta)).imag() / M_PI;
      worst = std::max(worst, std::abs(lhs - semicircle_density(x)));
    }
    if (worst > 1e-3) return {false, "sup gap " + fmt(worst) + " > 1e-3"};
    return {true, "sup gap " + fmt(worst) + " at eta = 1e-4"};
  }

  std::pair<bool, std::string> expansion_structure() {
    const ExpansionTerms t = expansion_prediction(Complex(0, 2), 100, 10000, 0.0);
    if (t.total != t.leading + t.first_order + t.second_order)
      return {false, "total is not the exact sum of the three terms"};
    // at z = 2i the coefficient f^2/(1-f^2)^2 is exactly -1/8
    const Complex coeff = t.second_order * 100.0 / t.leading;
    if (std::abs(coeff - Complex(-0.125, 0.0)) > 1e-12)
      return {false, "f^2/(1-f^2)^2 at 2i deviates from -1/8"};
    bool threw = false;
    try {
      expansion_prediction(Complex(2.0, 1e-22), 100, 10000, 0.0);
    } catch (const std::domain_error&) {
      threw = true;
    }
    if (!threw) return {false, "edge refusal did not trigger"};
    return {true, "term identity, -1/8 coefficient and edge refusal all hold"};
  }

  std::pair<bool, std::string> variance_quadrature() {
    const QuadratureSpec spec{};
    double worst = 0.0;
    for (double k4 : {0.0, -2.0, -1.2}) {
      worst = std::max(worst, std::abs(variance_functional(find_test_function("x"), k4, spec).total - (2.0 + k4)));
      worst = std::max(worst, std::abs(variance_functional(find_test_function("x2"), k4, spec).total - 4.0));
    }
    const VarianceTerms one = variance_functional(find_test_function("1"), -2.0, spec);
    worst = std::max(worst, std::abs(one.total));
    if (worst > 1e-6) return {false, "closed-form gap " + fmt(worst) + " > 1e-6"};
    const double direct = detail::variance_double_term(find_test_function("x3"), spec, false);
    const double swapped = detail::variance_double_term(find_test_function("x3"), spec, true);
    if (std::abs(direct - swapped) > 1e-12)
      return {false, "axis-swap asymmetry " + fmt(std::abs(direct - swapped))};
    if (one.double_term < -1e-10) return {false, "negative double term"};
    return {true, "V[x] = 2 + k4, V[x^2] = 4, V[1] = 0 within " + fmt(worst)};
  }

  std::pair<bool, std::string> moments_cumulants() {
    for (const auto& d :
         {EntryDistribution::gaussian(), EntryDistribution::rademacher(),
          EntryDistribution::uniform(), EntryDistribution::two_point(0.2)}) {
      const auto w = d.moments();
      if (w[0] != 0.0 || std::abs(w[1] - 1.0) > 1e-15)
        return {false, d.name() + " is not standardized"};
      if (std::abs(d.kappa4() - (w[3] - 3.0)) > 1e-12)
        return {false, d.name() + ": kappa4 != omega4 - 3"};
      if (w[3] < 1.0) return {false, d.name() + ": omega4 < 1"};
    }
    const auto k_gauss = cumulants_from_moments(0, 1, 0, 3);
    const auto k_rad = cumulants_from_moments(0, 1, 0, 1);
    const auto k_point = cumulants_from_moments(1, 1, 1, 1);
    if (k_gauss != std::array<double, 4>{0, 1, 0, 0}) return {false, "gaussian cumulants wrong"};
    if (k_rad != std::array<double, 4>{0, 1, 0, -2}) return {false, "rademacher cumulants wrong"};
    if (k_point != std::array<double, 4>{1, 0, 0, 0}) return {false, "point-mass cumulants wrong"};

    // inverse map (moments from cumulants) as the round-trip oracle
    Rng rng(seed_ ^ 0xA5A5A5A5ULL);
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
      double k1 = 2.0 * rng.uniform01() - 1.0, k2 = rng.uniform01() + 0.1;
      double k3 = 2.0 * rng.uniform01() - 1.0, k4 = 4.0 * rng.uniform01() - 2.0;
      const double m1 = k1;
      const double m2 = k2 + k1 * k1;
      const double m3 = k3 + 3.0 * k2 * k1 + k1 * k1 * k1;
      const double m4 = k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 +
                        6.0 * k2 * k1 * k1 + k1 * k1 * k1 * k1;
      const auto back = cumulants_from_moments(m1, m2, m3, m4);
      worst = std::max({worst, std::abs(back[0] - k1), std::abs(back[1] - k2),
                        std::abs(back[2] - k3), std::abs(back[3] - k4)});
    }
    if (worst > 1e-10) return {false, "round-trip error " + fmt(worst)};
    return {true, "stored moments, examples and 100 round-trips within " + fmt(worst)};
  }

  std::pair<bool, std::string> truncate_recenter_checks() {
    const auto a = truncate_recenter({5, -1, 1}, 2.0);
    if (a != std::vector<double>{0, -1, 1}) return {false, "(5,-1,1) example wrong"};
    const auto b = truncate_recenter({3}, 2.0);
    if (b != std::vector<double>{0}) return {false, "(3) example wrong"};
    const auto c = truncate_recenter({1, 1, 1, 1}, 2.0);
    if (c != std::vector<double>{0, 0, 0, 0}) return {false, "(1,1,1,1) example wrong"};
    if (!truncate_recenter({}, 1.0).empty()) return {false, "empty input not empty"};

    Rng rng(seed_ ^ 0x5C5C5CULL);
    for (int it = 0; it < 20; ++it) {
      std::vector<double> v(257);
      for (auto& x : v) x = 4.0 * (rng.uniform01() - 0.5) + (it % 3 == 0 ? 5.0 * rng.normal() : 0.0);
      const double tau = 1.0 + 2.0 * rng.uniform01();
      double clipped_mean = 0.0;
      for (double x : v) clipped_mean += std::abs(x) > tau ? 0.0 : x;
      clipped_mean /= static_cast<double>(v.size());
      const auto out = truncate_recenter(v, tau);
      double mean = 0.0, amax = 0.0;
      for (double x : out) {
        mean += x;
        amax = std::max(amax, std::abs(x));
      }
      mean /= static_cast<double>(out.size());
      if (std::abs(mean) > 1e-12 * std::max(1.0, amax))
        return {false, "recentred mean " + fmt(mean)};
      for (double x : out)
        if (std::abs(x) > tau + std::abs(clipped_mean) + 1e-12)
          return {false, "output exceeds tau + |subtracted mean|"};
    }
    return {true, "examples and 20 random batches satisfy the contract"};
  }

  std::pair<bool, std::string> trace_identities() {
    Rng rng(seed_ ^ 0x77123ULL);
    double worst = 0.0;
    for (int it = 0; it < 50; ++it) {
      const int n = 2 + static_cast<int>(rng.uniform01() * 31);
      const int m = n + static_cast<int>(rng.uniform01() * (64 - n));
      const Matrix y = sample_data_matrix(m, n, EntryDistribution::gaussian(),
                                          Rng::substream(seed_, 1000 + it));
      const Matrix h = build_H(y);
      const Vector lam = eigenvalues_sym(h).eigenvalues;
      const double scale1 = std::max(1.0, std::abs(h.trace()));
      const double scale2 = std::max(1.0, h.squaredNorm());
      worst = std::max(worst, std::abs(lam.sum() - h.trace()) / scale1);
      worst = std::max(worst, std::abs(lam.squaredNorm() - h.squaredNorm()) / scale2);
    }
    if (worst > 1e-8) return {false, "trace identity relative error " + fmt(worst)};
    return {true, "sum and sum-of-squares identities within " + fmt(worst) + " over 50 draws"};
  }

  std::pair<bool, std::string> eigensolver_oracle() {
    const Vector id3 = eigenvalues_sym(Matrix::Identity(3, 3)).eigenvalues;
    if ((id3 - Vector::Ones(3)).cwiseAbs().maxCoeff() > 1e-14)
      return {false, "identity spectrum wrong"};
    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    const Vector sw = eigenvalues_sym(swap).eigenvalues;
    if (std::abs(sw[0] + 1.0) > 1e-14 || std::abs(sw[1] - 1.0) > 1e-14)
      return {false, "swap matrix spectrum wrong"};

    // random symmetric 3x3 against bisected roots of the characteristic cubic
    Rng rng = Rng::substream(11, 0);
    Matrix a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
    const Vector lam = eigenvalues_sym(a).eigenvalues;
    const double tr = a.trace();
    const double tr2 = (a * a).trace();
    const double det = a.determinant();
    const double c2 = -tr;
    const double c1 = 0.5 * (tr * tr - tr2);
    const double c0 = -det;
    auto p = [&](double x) { return ((x + c2) * x + c1) * x + c0; };
    // bracket the three roots with a coarse scan, then bisect
    std::vector<double> roots;
    const double lo = -1.1 * a.cwiseAbs().sum(), hi = -lo;
    double prev_x = lo, prev_f = p(lo);
    for (int i = 1; i <= 20000; ++i) {
      const double x = lo + (hi - lo) * i / 20000.0;
      const double f = p(x);
      if (prev_f == 0.0) roots.push_back(prev_x);
      else if (prev_f * f < 0.0) {
        double xa = prev_x, xb = x;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (xa + xb);
          (p(xa) * p(mid) <= 0.0 ? xb : xa) = mid;
        }
        roots.push_back(0.5 * (xa + xb));
      }
      prev_x = x;
      prev_f = f;
    }
    if (roots.size() != 3) return {false, "cubic oracle found " + std::to_string(roots.size()) + " roots"};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(roots[i] - lam[i]));
    if (worst > 1e-10) return {false, "eigenvalues deviate from cubic roots by " + fmt(worst)};

    // residual check with eigenvectors on a sampled pair
    const auto [vals, vecs] = eigen_system(a);
    const double res = (a * vecs.col(1) - vals[1] * vecs.col(1)).norm();
    if (res > 1e-8 * a.norm()) return {false, "eigenpair residual " + fmt(res)};
    return {true, "fixed spectra and cubic-root oracle within " + fmt(worst)};
  }

  std::pair<bool, std::string> resolvent_identity() {
    Rng rng = Rng::substream(seed_, 2000);
    const Matrix y = sample_data_matrix(48, 24, EntryDistribution::uniform(), rng);
    const Matrix h = build_H(y);
    for (const Complex z : {Complex(0, 2), Complex(1, 1)}) {
      const ComplexMatrix g = resolvent(h, z);
      if (resolvent_identity_residual(h, z, g) > 1e-8)
        return {false, "(H-z)G - I residual too large"};
      if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        return {false, "resolvent not symmetric"};
      if (g.cwiseAbs().maxCoeff() > 1.0 / z.imag() + 1e-8)
        return {false, "entry bound |G_jk| <= 1/eta violated"};
      const Complex tr_g = g.trace();
      const Complex via_spec = 24.0 * empirical_stieltjes(eigenvalues_sym(h), z);
      if (std::abs(tr_g - via_spec) > 1e-8)
        return {false, "Tr G disagrees with the spectral route"};
    }
    // zero and diagonal fixtures
    const ComplexMatrix g0 = resolvent(Matrix::Zero(2, 2), Complex(0, 1));
    if (std::abs(g0(0, 0) - Complex(0, 1)) > 1e-15 || std::abs(g0(0, 1)) > 1e-15)
      return {false, "zero-matrix resolvent wrong"};
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = -1;
    const ComplexMatrix gd = resolvent(d, Complex(0, 1));
    if (std::abs(gd(0, 0) - Complex(0.5, 0.5)) > 1e-15 ||
        std::abs(gd(1, 1) - Complex(-0.5, 0.5)) > 1e-15)
      return {false, "diagonal resolvent wrong"};
    return {true, "solve residual, symmetry, entry bound and fixtures hold"};
  }

  std::pair<bool, std::string> empirical_stieltjes_checks() {
    SpectralSample s1{Vector::Zero(1), ModelTag::sample_cov};
    if (std::abs(empirical_stieltjes(s1, Complex(0, 1)) - Complex(0, 1)) > 1e-15)
      return {false, "single zero eigenvalue fixture wrong"};
    Vector pm(2);
    pm << -1, 1;
    if (std::abs(empirical_stieltjes({pm, ModelTag::sample_cov}, Complex(0, 1)) -
                 Complex(0, 0.5)) > 1e-15)
      return {false, "(-1,1) fixture wrong"};
    Rng rng = Rng::substream(seed_, 3000);
    const Matrix y = sample_data_matrix(32, 8, EntryDistribution::rademacher(), rng);
    const SpectralSample s = eigenvalues_sym(build_H(y));
    const Complex far = empirical_stieltjes(s, Complex(0, 1e6));
    if (std::abs(far * Complex(0, 1e6) + 1.0) > 1e-5)
      return {false, "large-eta asymptotic violated"};
    for (const Complex z : {Complex(0, 2), Complex(-1, 0.5), Complex(3, 0.01)}) {
      const Complex m = empirical_stieltjes(s, z);
      if (!(m.imag() > 0.0) || std::abs(m) > 1.0 / z.imag() + 1e-12)
        return {false, "Stieltjes bounds violated"};
    }
    return {true, "fixtures, bounds and the large-eta limit hold"};
  }

  std::pair<bool, std::string> resolvent_derivatives() {
    const Complex z(0, 2);
    // zero data matrix: closed-form derivatives collapse
    const double at_zero = resolvent_derivative_check(Matrix::Zero(4, 2), 1, 0, z, 1e-6);
    if (at_zero > 1e-9) return {false, "Y = 0 deviation " + fmt(at_zero)};

    double worst = 0.0;
    for (int it = 0; it < 20; ++it) {
      Rng rng = Rng::substream(seed_, 4000 + it);
      const Matrix y = sample_data_matrix(6, 4, EntryDistribution::gaussian(), rng);
      const int j = static_cast<int>(rng.uniform01() * 6);
      const int k = static_cast<int>(rng.uniform01() * 4);
      worst = std::max(worst, resolvent_derivative_check(y, j, k, z, 1e-6));
    }
    if (worst > 1e-5) return {false, "max deviation " + fmt(worst) + " > 1e-5"};

    // truncation-order sanity: doubling eps moves the error by at most 8x
    Rng rng = Rng::substream(seed_, 4100);
    const Matrix y = sample_data_matrix(5, 3, EntryDistribution::gaussian(), rng);
    const double e1 = resolvent_derivative_check(y, 2, 1, z, 1e-6);
    const double e2 = resolvent_derivative_check(y, 2, 1, z, 2e-6);
    if (e1 > 1e-13 && e2 > 1e-13) {
      const double ratio = e2 / e1;
      if (ratio > 8.0 || ratio < 1.0 / 8.0)
        return {false, "eps-doubling ratio " + fmt(ratio) + " outside [1/8, 8]"};
    }
    return {true, "20 random draws within " + fmt(worst) + ", zero case and eps scaling hold"};
  }

  std::pair<bool, std::string> interlacing() {
    if (!interlacing_check(Matrix::Zero(6, 3), 1, 1e-12))
      return {false, "zero matrix equalities rejected"};
    int passed = 0, total = 0;
    for (int it = 0; it < 100; ++it) {
      Rng rng = Rng::substream(seed_, 5000 + it);
      const Matrix y = sample_data_matrix(8, 4, EntryDistribution::gaussian(), rng);
      for (int col = 0; col < 4; ++col) {
        ++total;
        passed += interlacing_check(y, col, 1e-9) ? 1 : 0;
      }
    }
    if (passed != total)
      return {false, std::to_string(total - passed) + "/" + std::to_string(total) + " cases violated"};
    return {true, "eigenvalues interlace in all 400 minor cases"};
  }

  std::pair<bool, std::string> stein_gaussian() {
    const auto gauss = EntryDistribution::gaussian();
    // g(t) = t: both sides equal kappa2 = 1 (the exact gaussian identity)
    SteinFunction lin{"t", {[](double t) { return Complex(t); },
                            [](double) { return Complex(1.0); }}};
    const SteinCheck c1 = stein_expansion_residual(gauss, lin, 1, 1000000,
                                                   Rng::substream(seed_, 6000));
    if (c1.residual > 5.0 * c1.lhs_stderr)
      return {false, "g(t)=t residual " + fmt(c1.residual) + " > 5 SE"};

    SteinFunction quad{"t^2", {[](double t) { return Complex(t * t); },
                               [](double t) { return Complex(2.0 * t); }}};
    const SteinCheck c2 = stein_expansion_residual(gauss, quad, 1, 1000000,
                                                   Rng::substream(seed_, 6001));
    if (c2.residual > 5.0 * c2.lhs_stderr)
      return {false, "g(t)=t^2 residual " + fmt(c2.residual) + " > 5 SE"};

    SteinFunction cub{"t^3", {[](double t) { return Complex(t * t * t); },
                              [](double t) { return Complex(3.0 * t * t); }}};
    const SteinCheck c3 = stein_expansion_residual(gauss, cub, 1, 1000000,
                                                   Rng::substream(seed_, 6002));
    if (c3.residual > 5.0 * c3.lhs_stderr)
      return {false, "g(t)=t^3 residual " + fmt(c3.residual) + " > 5 SE"};
    return {true, "p = 1 identity holds for polynomial g within 5 MC SE"};
  }

  std::pair<bool, std::string> stats_merge() {
    RunningStats a, b, direct;
    for (double v : {1.0, 2.0, 3.0}) a.push(v);
    for (double v : {4.0, 5.0}) b.push(v);
    for (double v : {1.0, 2.0, 3.0, 4.0, 5.0}) direct.push(v);
    const RunningStats m = merge_stats(a, b);
    if (std::abs(m.mean - direct.mean) > 1e-12 ||
        std::abs(m.m2 - direct.m2) > 1e-12 * std::max(1.0, direct.m2) ||
        std::abs(m.m3 - direct.m3) > 1e-12 * std::max(1.0, std::abs(direct.m3)) ||
        std::abs(m.m4 - direct.m4) > 1e-12 * std::max(1.0, direct.m4))
      return {false, "merge((1,2,3),(4,5)) disagrees with direct accumulation"};

    const RunningStats empty;
    const RunningStats s = merge_stats(empty, a);
    if (s.count != a.count || s.mean != a.mean || s.m2 != a.m2)
      return {false, "merge(empty, S) != S"};

    RunningStats x, y2;
    x.push(2.0);
    y2.push(7.0);
    const RunningStats two = merge_stats(x, y2);
    if (std::abs(two.mean - 4.5) > 1e-15 || std::abs(two.m2 - 12.5) > 1e-12)
      return {false, "two-point merge formula wrong"};

    Rng rng(seed_ ^ 0x99ULL);
    RunningStats c1, c2, c3;
    for (int i = 0; i < 100; ++i) c1.push(rng.normal());
    for (int i = 0; i < 57; ++i) c2.push(rng.normal() + 1.0);
    for (int i = 0; i < 23; ++i) c3.push(2.0 * rng.normal());
    const RunningStats left = merge_stats(merge_stats(c1, c2), c3);
    const RunningStats right = merge_stats(c1, merge_stats(c2, c3));
    const double rel = std::abs(left.m4 - right.m4) / std::max(1.0, right.m4) +
                       std::abs(left.m2 - right.m2) / std::max(1.0, right.m2);
    if (rel > 1e-12) return {false, "merge not associative: " + fmt(rel)};
    return {true, "concatenation equality, unit fixtures and associativity hold"};
  }

  std::pair<bool, std::string> ks_checks() {
    auto probit = [](double p) {
      double lo = -10, hi = 10;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    };
    std::vector<double> q(100);
    for (int i = 0; i < 100; ++i) q[i] = probit((i + 0.5) / 100.0);
    const double d = ks_statistic(q, normal_cdf);
    if (std::abs(d - 0.005) > 1e-9) return {false, "quantile fixture D = " + fmt(d)};
    if (std::abs(ks_statistic({0.0}, normal_cdf) - 0.5) > 1e-15)
      return {false, "single-sample D != 0.5"};
    std::vector<double> shuffled = {0.3, -1.2, 0.1, 2.0, -0.4};
    std::vector<double> sorted = shuffled;
    std::sort(sorted.begin(), sorted.end());
    if (ks_statistic(shuffled, normal_cdf) != ks_statistic(sorted, normal_cdf))
      return {false, "sort invariance violated"};
    return {true, "quantile fixture, single sample and sort invariance hold"};
  }

  std::pair<bool, std::string> ensemble_determinism() {
    EnsembleConfig cfg;
    cfg.n = 8;
    cfg.m = 32;
    cfg.replicas = 16;
    cfg.seed = seed_;
    cfg.z_list = {Complex(0, 2)};
    cfg.phi_list = {find_test_function("x2")};
    RunOptions one;
    one.threads = 1;
    one.keep_samples = true;
    RunOptions four;
    four.threads = 4;
    four.keep_samples = true;
    const auto m1 = run_ensemble(cfg, one);
    const auto m2 = run_ensemble(cfg, one);
    const auto m4 = run_ensemble(cfg, four);
    auto same_vec = [](const Vector& a, const Vector& b) {
      return a.size() == b.size() && (a.array() == b.array()).all();
    };
    for (int r = 0; r < cfg.replicas; ++r) {
      if (m1.stieltjes[0][r] != m2.stieltjes[0][r] ||
          m1.stieltjes[0][r] != m4.stieltjes[0][r])
        return {false, "m_N differs across runs or thread counts"};
      if (!same_vec(m1.samples[r], m2.samples[r]) ||
          !same_vec(m1.samples[r], m4.samples[r]))
        return {false, "eigenvalues differ across runs or thread counts"};
    }
    return {true, "replica results identical across repeats and 1 vs 4 threads"};
  }
};

inline int verify_battery(std::uint64_t seed, const std::string& fault,
                          std::ostream& os) {
  return VerifyBattery(seed, fault, os).run();
}

}  // namespace rmtlab

#endif
