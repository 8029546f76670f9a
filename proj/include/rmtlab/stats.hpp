#ifndef RMTLAB_STATS_HPP
#define RMTLAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rmtlab {

// Streaming accumulator of central power sums up to order four, mergeable
// with the pairwise update formulas so that merge(A, B) equals the
// accumulator of the concatenated data up to roundoff.
struct RunningStats {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum (x - mean)^2
  double m3 = 0.0;
  double m4 = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void push(double x) {
    const double n1 = static_cast<double>(count);
    ++count;
    const double n = static_cast<double>(count);
    const double delta = x - mean;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double t1 = delta * dn * n1;
    mean += dn;
    m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
    m3 += t1 * dn * (n - 2.0) - 3.0 * dn * m2;
    m2 += t1;
    min = std::min(min, x);
    max = std::max(max, x);
  }

  static RunningStats merge(const RunningStats& a, const RunningStats& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    RunningStats r;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double n = na + nb;
    const double d = b.mean - a.mean;
    const double d2 = d * d;
    r.count = a.count + b.count;
    r.mean = a.mean + d * nb / n;
    r.m2 = a.m2 + b.m2 + d2 * na * nb / n;
    r.m3 = a.m3 + b.m3 + d * d2 * na * nb * (na - nb) / (n * n) +
           3.0 * d * (na * b.m2 - nb * a.m2) / n;
    r.m4 = a.m4 + b.m4 +
           d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
           6.0 * d2 * (na * na * b.m2 + nb * nb * a.m2) / (n * n) +
           4.0 * d * (na * b.m3 - nb * a.m3) / n;
    r.min = std::min(a.min, b.min);
    r.max = std::max(a.max, b.max);
    return r;
  }

  // unbiased sample variance
  double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }

  double central_moment2() const { return count > 0 ? m2 / count : 0.0; }
  double central_moment3() const { return count > 0 ? m3 / count : 0.0; }
  double central_moment4() const { return count > 0 ? m4 / count : 0.0; }

  double skewness() const {
    const double v = central_moment2();
    return v > 0.0 ? central_moment3() / std::pow(v, 1.5) : 0.0;
  }

  double excess_kurtosis() const {
    const double v = central_moment2();
    return v > 0.0 ? central_moment4() / (v * v) - 3.0 : 0.0;
  }

  double mean_stderr() const {
    return count > 0 ? std::sqrt(variance() / count) : 0.0;
  }

  // delta-method standard error of the sample variance: Var(s^2) ~ (mu4 - mu2^2)/n
  double variance_stderr() const {
    if (count < 2) return 0.0;
    const double v = central_moment2();
    const double spread = central_moment4() - v * v;
    return spread > 0.0 ? std::sqrt(spread / count) : 0.0;
  }
};

inline RunningStats merge_stats(const RunningStats& a, const RunningStats& b) {
  return RunningStats::merge(a, b);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// One-sample Kolmogorov-Smirnov statistic against a monotone CDF.
// D = sup_i max(|i/n - F(x_(i))|, |(i-1)/n - F(x_(i))|); input need not be sorted.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs((i + 1.0) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  return d;
}

}  // namespace rmtlab

#endif
