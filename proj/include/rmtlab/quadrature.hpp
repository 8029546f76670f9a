#ifndef RMTLAB_QUADRATURE_HPP
#define RMTLAB_QUADRATURE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rmtlab {

// Gauss-Legendre rule on [-1,1]. Nodes found by Newton iteration on the
// three-term recurrence; good to ~1e-15 up to a few thousand points.
class GaussLegendre {
 public:
  explicit GaussLegendre(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    nodes_.resize(order);
    weights_.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
          double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes_[i] = -x;
      nodes_[order - 1 - i] = x;
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      weights_[i] = w;
      weights_[order - 1 - i] = w;
    }
  }

  int order() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  // integral of f over [a,b]
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      s += weights_[i] * f(mid + c * nodes_[i]);
    return c * s;
  }

 private:
  std::vector<double> nodes_, weights_;
};

}  // namespace rmtlab

#endif
