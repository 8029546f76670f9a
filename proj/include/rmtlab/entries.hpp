#ifndef RMTLAB_ENTRIES_HPP
#define RMTLAB_ENTRIES_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmtlab/rng.hpp"
#include "rmtlab/stats.hpp"

namespace rmtlab {

enum class EntryKind { gaussian, rademacher, uniform, two_point };

// A standardized scalar law (mean 0, variance 1) with closed-form moments.
// two_point(p) is the standardized asymmetric Bernoulli: value sqrt((1-p)/p)
// with probability p, value -sqrt(p/(1-p)) otherwise; p = 1/2 recovers
// rademacher and p != 1/2 gives a nonzero third cumulant.
class EntryDistribution {
 public:
  static EntryDistribution gaussian() { return {EntryKind::gaussian, 0.5}; }
  static EntryDistribution rademacher() { return {EntryKind::rademacher, 0.5}; }
  static EntryDistribution uniform() { return {EntryKind::uniform, 0.5}; }
  static EntryDistribution two_point(double p) {
    if (!(p > 0.0) || !(p < 1.0))
      throw std::invalid_argument("two_point parameter must be in (0,1)");
    return {EntryKind::two_point, p};
  }

  static EntryDistribution parse(const std::string& name) {
    if (name == "gaussian") return gaussian();
    if (name == "rademacher") return rademacher();
    if (name == "uniform") return uniform();
    if (name.rfind("two_point:", 0) == 0) {
      const std::string arg = name.substr(10);
      std::size_t used = 0;
      double p = 0.0;
      try {
        p = std::stod(arg, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad two_point parameter: " + arg);
      }
      if (used != arg.size())
        throw std::invalid_argument("bad two_point parameter: " + arg);
      return two_point(p);
    }
    throw std::invalid_argument("unknown distribution: " + name);
  }

  EntryKind kind() const { return kind_; }
  double p() const { return p_; }

  std::string name() const {
    switch (kind_) {
      case EntryKind::gaussian: return "gaussian";
      case EntryKind::rademacher: return "rademacher";
      case EntryKind::uniform: return "uniform";
      case EntryKind::two_point: {
        char buf[48];
        std::snprintf(buf, sizeof buf, "two_point:%.17g", p_);
        return buf;
      }
    }
    return "?";
  }

  // omega_1 .. omega_8 of the standardized law
  std::array<double, 8> moments() const {
    switch (kind_) {
      case EntryKind::gaussian:
        return {0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0};
      case EntryKind::rademacher:
        return {0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
      case EntryKind::uniform: {
        // uniform on [-sqrt(3), sqrt(3)]: omega_{2k} = 3^k/(2k+1)
        return {0.0, 1.0, 0.0, 9.0 / 5.0, 0.0, 27.0 / 7.0, 0.0, 9.0};
      }
      case EntryKind::two_point: {
        const double a = std::sqrt((1.0 - p_) / p_);
        const double b = std::sqrt(p_ / (1.0 - p_));
        std::array<double, 8> w{};
        double pa = 1.0, pb = 1.0;
        for (int k = 0; k < 8; ++k) {
          pa *= a;
          pb *= -b;
          w[k] = p_ * pa + (1.0 - p_) * pb;
        }
        return w;
      }
    }
    return {};
  }

  double omega(int alpha) const {
    if (alpha < 1 || alpha > 8)
      throw std::invalid_argument("moment order must be in 1..8");
    return moments()[alpha - 1];
  }

  double kappa4() const { return omega(4) - 3.0; }

 private:
  EntryDistribution(EntryKind k, double p) : kind_(k), p_(p) {}
  EntryKind kind_;
  double p_;
};

// Owns one substream; not shared across threads.
class EntrySampler {
 public:
  EntrySampler(const EntryDistribution& dist, Rng rng)
      : kind_(dist.kind()), rng_(rng) {
    if (kind_ == EntryKind::two_point) {
      p_ = dist.p();
      hi_ = std::sqrt((1.0 - p_) / p_);
      lo_ = -std::sqrt(p_ / (1.0 - p_));
    }
  }

  double next() {
    switch (kind_) {
      case EntryKind::gaussian:
        return rng_.normal();
      case EntryKind::rademacher: {
        if (bits_left_ == 0) {
          bit_buf_ = rng_.next_u64();
          bits_left_ = 64;
        }
        const double v = (bit_buf_ & 1u) ? 1.0 : -1.0;
        bit_buf_ >>= 1;
        --bits_left_;
        return v;
      }
      case EntryKind::uniform:
        return (2.0 * rng_.uniform01() - 1.0) * kSqrt3;
      case EntryKind::two_point:
        return rng_.uniform01() < p_ ? hi_ : lo_;
    }
    return 0.0;
  }

  void fill(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = next();
  }

  Rng& rng() { return rng_; }

 private:
  static constexpr double kSqrt3 = 1.7320508075688772;
  EntryKind kind_;
  Rng rng_;
  double p_ = 0.5, hi_ = 1.0, lo_ = -1.0;
  std::uint64_t bit_buf_ = 0;
  int bits_left_ = 0;
};

inline std::vector<double> sample(const EntryDistribution& dist, Rng rng,
                                  std::size_t count) {
  EntrySampler s(dist, rng);
  std::vector<double> out(count);
  s.fill(out.data(), count);
  return out;
}

// (k1,k2,k3,k4) from raw moments (m1..m4)
inline std::array<double, 4> cumulants_from_moments(double m1, double m2,
                                                    double m3, double m4) {
  std::array<double, 4> k;
  k[0] = m1;
  k[1] = m2 - m1 * m1;
  k[2] = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
  k[3] = m4 - 4.0 * m1 * m3 - 3.0 * m2 * m2 + 12.0 * m1 * m1 * m2 -
         6.0 * m1 * m1 * m1 * m1;
  return k;
}

struct TruncationSpec {
  double t;    // exponent parameter in (0, 1/4)
  double tau;  // (M N)^(1/4 - t)
};

inline TruncationSpec truncation_threshold(long long m, long long n, double t) {
  if (m < n || n < 1)
    throw std::invalid_argument("truncation_threshold requires M >= N >= 1");
  if (!(t > 0.0) || !(t < 0.25))
    throw std::invalid_argument("truncation exponent t must be in (0, 1/4)");
  TruncationSpec s;
  s.t = t;
  s.tau = std::pow(static_cast<double>(m) * static_cast<double>(n), 0.25 - t);
  return s;
}

// Clip at tau, then subtract the empirical mean of the clipped batch from
// every value so the output batch has mean 0.
inline void truncate_recenter_inplace(double* values, std::size_t n,
                                      double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (n == 0) return;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(values[i]) > tau) values[i] = 0.0;
    sum += values[i];
  }
  const double mean = sum / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) values[i] -= mean;
}

inline std::vector<double> truncate_recenter(std::vector<double> values,
                                             double tau) {
  truncate_recenter_inplace(values.data(), values.size(), tau);
  return values;
}

// Smooth complex test map with derivatives g^(0)..g^(p) for the cumulant
// expansion check; the default is g(t) = 1/(t - 3i).
struct SteinFunction {
  std::string name;
  std::vector<std::function<std::complex<double>(double)>> derivatives;
};

inline SteinFunction default_stein_function() {
  const std::complex<double> z0(0.0, 3.0);
  SteinFunction g;
  g.name = "1/(t-3i)";
  for (int a = 0; a <= 4; ++a) {
    double fact = 1.0;
    for (int j = 2; j <= a; ++j) fact *= j;
    const double coef = (a % 2 == 0 ? 1.0 : -1.0) * fact;
    g.derivatives.push_back([z0, coef, a](double t) {
      return coef / std::pow(std::complex<double>(t) - z0, a + 1);
    });
  }
  return g;
}

struct SteinCheck {
  double residual;    // | E{xi g(xi)} - sum_a kappa_{a+1}/a! E{g^(a)(xi)} |
  double lhs_stderr;  // Monte Carlo SE of the left side (Re and Im combined)
};

// Monte Carlo check of the generalized cumulant expansion of E{xi g(xi)},
// with common random numbers on both sides.
inline SteinCheck stein_expansion_residual(const EntryDistribution& dist,
                                           const SteinFunction& g, int p,
                                           std::size_t mc_size, Rng rng) {
  if (p < 1 || p > 3)
    throw std::invalid_argument("stein_expansion_residual supports p in {1,2,3}");
  if (g.derivatives.size() < static_cast<std::size_t>(p) + 1)
    throw std::invalid_argument("need g^(0)..g^(p)");
  if (mc_size == 0) throw std::invalid_argument("mc_size must be positive");

  const auto w = dist.moments();
  const auto kappa = cumulants_from_moments(w[0], w[1], w[2], w[3]);

  EntrySampler s(dist, rng);
  RunningStats lhs_re, lhs_im;
  std::vector<std::complex<double>> deriv_sum(p + 1, 0.0);
  for (std::size_t i = 0; i < mc_size; ++i) {
    const double xi = s.next();
    const std::complex<double> lhs = xi * g.derivatives[0](xi);
    lhs_re.push(lhs.real());
    lhs_im.push(lhs.imag());
    for (int a = 0; a <= p; ++a) deriv_sum[a] += g.derivatives[a](xi);
  }
  std::complex<double> rhs = 0.0;
  double fact = 1.0;
  for (int a = 0; a <= p; ++a) {
    if (a > 1) fact *= a;
    rhs += kappa[a] / fact * deriv_sum[a] / static_cast<double>(mc_size);
  }
  const std::complex<double> lhs_mean(lhs_re.mean, lhs_im.mean);
  SteinCheck out;
  out.residual = std::abs(lhs_mean - rhs);
  out.lhs_stderr = std::sqrt(lhs_re.variance() / mc_size +
                             lhs_im.variance() / mc_size);
  return out;
}

}  // namespace rmtlab

#endif
