#ifndef RMTLAB_MATRIXLAB_HPP
#define RMTLAB_MATRIXLAB_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "rmtlab/analytic.hpp"
#include "rmtlab/entries.hpp"

namespace rmtlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

enum class ModelTag { sample_cov, wigner, reduced };

struct SpectralSample {
  Vector eigenvalues;  // ascending
  ModelTag tag = ModelTag::sample_cov;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

// Data matrix Y = (MN)^(-1/4) X with standardized i.i.d. entries; optional
// truncate-and-recenter of the X batch at tau before scaling.
inline Matrix sample_data_matrix(int m, int n, const EntryDistribution& dist,
                                 Rng rng,
                                 std::optional<double> truncation_tau = {}) {
  if (m < n || n < 1)
    throw std::invalid_argument("sample_data_matrix requires M >= N >= 1");
  Matrix x(m, n);
  EntrySampler s(dist, rng);
  s.fill(x.data(), static_cast<std::size_t>(m) * n);
  if (truncation_tau)
    truncate_recenter_inplace(x.data(), static_cast<std::size_t>(m) * n,
                              *truncation_tau);
  x *= std::pow(static_cast<double>(m) * n, -0.25);
  return x;
}

// H = Y^T Y - sqrt(M/N) I, exactly symmetric by symmetrized accumulation.
inline Matrix build_H(const Matrix& y) {
  const int m = static_cast<int>(y.rows());
  const int n = static_cast<int>(y.cols());
  if (m < n || n < 1) throw std::invalid_argument("build_H requires M >= N >= 1");
  if (!y.allFinite()) throw std::invalid_argument("build_H: non-finite entries");
  Matrix a;
  a.noalias() = y.transpose() * y;
  Matrix h = 0.5 * (a + a.transpose());
  h.diagonal().array() -= std::sqrt(static_cast<double>(m) / n);
  return h;
}

// Wigner comparison matrix: above-diagonal variance 1/N, diagonal variance
// (omega4 - 1)/N (matched-model diagonal convention).
inline Matrix build_wigner(int n, const EntryDistribution& dist, Rng rng) {
  if (n < 1) throw std::invalid_argument("build_wigner requires N >= 1");
  EntrySampler s(dist, rng);
  const double off = 1.0 / std::sqrt(static_cast<double>(n));
  const double diag = std::sqrt((dist.omega(4) - 1.0) / n);
  Matrix w(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double v = off * s.next();
      w(i, j) = v;
      w(j, i) = v;
    }
    w(j, j) = diag * s.next();
  }
  return w;
}

inline void require_symmetric(const Matrix& a, double tol = 1e-10) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("matrix is not symmetric");
}

inline SpectralSample eigenvalues_sym(const Matrix& a,
                                      ModelTag tag = ModelTag::sample_cov) {
  require_symmetric(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");
  return {es.eigenvalues(), tag};
}

// eigenvalues + orthonormal eigenvectors, for diagonal-resolvent diagnostics
inline std::pair<Vector, Matrix> eigen_system(const Matrix& a) {
  require_symmetric(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

// m_N(z) = (1/N) sum 1/(lambda_i - z); Im > 0 and |m| <= 1/Im z.
inline Complex empirical_stieltjes(const SpectralSample& s, Complex z) {
  require_upper_half(z);
  Complex acc = 0.0;
  for (int i = 0; i < s.size(); ++i) acc += 1.0 / (s.eigenvalues[i] - z);
  return acc / static_cast<double>(s.size());
}

inline double linear_statistic(const SpectralSample& s,
                               const TestFunction& phi) {
  double acc = 0.0;
  for (int i = 0; i < s.size(); ++i) acc += phi.eval(s.eigenvalues[i]);
  return acc;
}

// G(z) = (H - z)^(-1) by LU solve; always well posed for Im z > 0.
inline ComplexMatrix resolvent(const Matrix& h, Complex z) {
  require_upper_half(z);
  require_symmetric(h);
  ComplexMatrix a = h.cast<Complex>();
  a.diagonal().array() -= z;
  return Eigen::PartialPivLU<ComplexMatrix>(a).inverse();
}

inline double resolvent_identity_residual(const Matrix& h, Complex z,
                                          const ComplexMatrix& g) {
  ComplexMatrix a = h.cast<Complex>();
  a.diagonal().array() -= z;
  ComplexMatrix r = a * g;
  r.diagonal().array() -= 1.0;
  return r.cwiseAbs().maxCoeff();
}

// Central finite difference in the (j,k) entry of Y checked against the
// closed-form derivatives of G, YG and G_kk (YGY^T)_jj; returns the largest
// absolute deviation over all matrix positions. Intended for small matrices.
inline double resolvent_derivative_check(const Matrix& y, int j, int k,
                                         Complex z, double eps) {
  const int m = static_cast<int>(y.rows());
  const int n = static_cast<int>(y.cols());
  if (j < 0 || j >= m || k < 0 || k >= n)
    throw std::out_of_range("resolvent_derivative_check: index out of range");
  if (!(eps >= 1e-8 && eps <= 1e-4))
    throw std::invalid_argument("eps must lie in [1e-8, 1e-4]");
  require_upper_half(z);

  const ComplexMatrix g = resolvent(build_H(y), z);
  const ComplexMatrix yg = y * g;
  const ComplexMatrix ygyt = yg * y.transpose();

  Matrix yp = y, ym = y;
  yp(j, k) += eps;
  ym(j, k) -= eps;
  const ComplexMatrix gp = resolvent(build_H(yp), z);
  const ComplexMatrix gm = resolvent(build_H(ym), z);
  const ComplexMatrix ygp = yp * gp;
  const ComplexMatrix ygm = ym * gm;

  double worst = 0.0;

  // (i)  D_jk G_ab = -(YG)_ja G_bk - (YG)_jb G_ak
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Complex fd = (gp(a, b) - gm(a, b)) / (2.0 * eps);
      const Complex rhs = -yg(j, a) * g(b, k) - yg(j, b) * g(a, k);
      worst = std::max(worst, std::abs(fd - rhs));
    }

  // (ii) D_jk (YG)_ab = delta_aj G_bk - G_bk (YGY^T)_ja - (YG)_jb (YG)_ak
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < n; ++b) {
      const Complex fd = (ygp(a, b) - ygm(a, b)) / (2.0 * eps);
      const Complex rhs = (a == j ? g(b, k) : Complex(0.0)) -
                          g(b, k) * ygyt(j, a) - yg(j, b) * yg(a, k);
      worst = std::max(worst, std::abs(fd - rhs));
    }

  // (iii) D_jk [G_kk (YGY^T)_jj] = 2 G_kk (YG)_jk - 4 G_kk (YG)_jk (YGY^T)_jj
  {
    const Complex sp = gp(k, k) * (ygp * yp.transpose())(j, j);
    const Complex sm = gm(k, k) * (ygm * ym.transpose())(j, j);
    const Complex fd = (sp - sm) / (2.0 * eps);
    const Complex rhs =
        2.0 * g(k, k) * yg(j, k) - 4.0 * g(k, k) * yg(j, k) * ygyt(j, j);
    worst = std::max(worst, std::abs(fd - rhs));
  }

  return worst;
}

// Eigenvalues of H against those of the one-column-deleted minor
// H^(1) = B^T B - sqrt(M/N) I_(N-1); true iff they interlace within tol.
inline bool interlacing_check(const Matrix& y, int drop_col, double tol) {
  const int m = static_cast<int>(y.rows());
  const int n = static_cast<int>(y.cols());
  if (n < 2) throw std::invalid_argument("interlacing_check requires N >= 2");
  if (drop_col < 0 || drop_col >= n)
    throw std::out_of_range("interlacing_check: column index out of range");

  const Vector lambda = eigenvalues_sym(build_H(y)).eigenvalues;

  Matrix b(m, n - 1);
  int c = 0;
  for (int col = 0; col < n; ++col)
    if (col != drop_col) b.col(c++) = y.col(col);
  Matrix a;
  a.noalias() = b.transpose() * b;
  Matrix hb = 0.5 * (a + a.transpose());
  hb.diagonal().array() -= std::sqrt(static_cast<double>(m) / n);
  const Vector mu = eigenvalues_sym(hb).eigenvalues;

  for (int i = 0; i < n - 1; ++i) {
    if (mu[i] < lambda[i] - tol) return false;
    if (mu[i] > lambda[i + 1] + tol) return false;
  }
  return true;
}

// Diagonal of the companion resolvent (YY^T - sqrt(M/N) - z)^{-1} from the
// thin SVD of Y; the orthogonal complement contributes the (M-N)-fold
// eigenvalue -sqrt(M/N).
inline ComplexVector reduced_green_diagonal(const Matrix& y, Complex z) {
  require_upper_half(z);
  const int m = static_cast<int>(y.rows());
  const int n = static_cast<int>(y.cols());
  const double s = std::sqrt(static_cast<double>(m) / n);
  Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinU);
  const Vector sv = svd.singularValues();
  const Matrix& u = svd.matrixU();
  const Complex background = 1.0 / (-s - z);
  ComplexVector diag = ComplexVector::Constant(m, background);
  for (int i = 0; i < n; ++i) {
    const Complex w = 1.0 / (sv[i] * sv[i] - s - z) - background;
    for (int jj = 0; jj < m; ++jj) diag[jj] += u(jj, i) * u(jj, i) * w;
  }
  return diag;
}

}  // namespace rmtlab

#endif
