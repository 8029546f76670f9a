#ifndef RMTLAB_MONTECARLO_HPP
#define RMTLAB_MONTECARLO_HPP

#include <atomic>
#include <complex>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rmtlab/analytic.hpp"
#include "rmtlab/entries.hpp"
#include "rmtlab/matrixlab.hpp"
#include "rmtlab/stats.hpp"

namespace rmtlab {

struct EnsembleConfig {
  int n = 64;
  int m = 4096;
  EntryDistribution dist = EntryDistribution::gaussian();
  int replicas = 2000;
  std::uint64_t seed = 42;
  std::optional<double> truncation_t;  // clip entries at (MN)^(1/4-t) when set
  std::vector<Complex> z_list = {Complex(0.0, 2.0)};
  std::vector<TestFunction> phi_list = {find_test_function("x2")};

  double aspect() const { return static_cast<double>(n) / m; }

  std::optional<TruncationSpec> truncation() const {
    if (!truncation_t) return std::nullopt;
    return truncation_threshold(m, n, *truncation_t);
  }

  void validate() const {
    if (n < 2 || m < n)
      throw std::invalid_argument("ensemble requires M >= N >= 2");
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    for (const auto& z : z_list) require_upper_half(z);
    if (truncation_t) truncation_threshold(m, n, *truncation_t);
  }
};

// The Gram matrix of i.i.d. gaussian columns can be drawn directly from its
// triangular factor (chi-distributed diagonal, gaussian subdiagonal), which
// costs O(N^3) per replica instead of O(M N^2). Distributionally identical
// to the entrywise route; only valid for gaussian entries with no truncation.
enum class GramEngine { automatic, direct, wishart };

struct RunOptions {
  int threads = 0;  // 0 = hardware concurrency
  GramEngine engine = GramEngine::automatic;
  std::size_t memory_budget_bytes = std::size_t(1) << 30;
  bool green_diagnostics = false;  // per-replica mean_k |G_kk|^2 at each z
  bool keep_samples = false;       // retain per-replica eigenvalues
};

struct EnsembleMeasurements {
  // replica-indexed, so every reduction is independent of worker count
  std::vector<std::vector<Complex>> stieltjes;      // [z][replica] m_N(z)
  std::vector<std::vector<double>> linear_stats;    // [phi][replica]
  std::vector<std::vector<double>> green_mean_abs2; // [z][replica]
  std::vector<Vector> samples;                      // when keep_samples
  bool wishart_used = false;
};

inline bool wishart_applicable(const EnsembleConfig& cfg) {
  return cfg.dist.kind() == EntryKind::gaussian && !cfg.truncation_t;
}

namespace detail {

constexpr int kWishartAutoThreshold = 65536;  // auto engine switches at this M
constexpr int kGramBlockRows = 8192;

// Gram of the (optionally truncated and recentered) entry matrix, accumulated
// in row blocks so memory stays bounded for large M. Recentering is folded in
// algebraically: gram(C - mu J) = C^T C - mu (s 1^T + 1 s^T) + mu^2 M 1 1^T
// with s the column sums of the clipped matrix C.
inline Matrix sample_gram_blocked(int m, int n, const EntryDistribution& dist,
                                  Rng& rng, std::optional<double> tau) {
  Matrix acc = Matrix::Zero(n, n);
  Vector colsum = Vector::Zero(n);
  double total = 0.0;
  EntrySampler sampler(dist, rng);
  Matrix block(std::min(m, kGramBlockRows), n);
  int done = 0;
  while (done < m) {
    const int rows = std::min(kGramBlockRows, m - done);
    if (rows != block.rows()) block.resize(rows, n);
    sampler.fill(block.data(), static_cast<std::size_t>(rows) * n);
    if (tau) {
      double* p = block.data();
      const std::size_t sz = static_cast<std::size_t>(rows) * n;
      for (std::size_t i = 0; i < sz; ++i)
        if (std::abs(p[i]) > *tau) p[i] = 0.0;
      colsum += block.colwise().sum().transpose();
      total += block.sum();
    }
    acc.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    done += rows;
  }
  Matrix gram = acc.selfadjointView<Eigen::Lower>();
  if (tau) {
    const double mu = total / (static_cast<double>(m) * n);
    gram.noalias() -= mu * (colsum * Vector::Ones(n).transpose());
    gram.noalias() -= mu * (Vector::Ones(n) * colsum.transpose());
    gram.noalias() +=
        (mu * mu * static_cast<double>(m)) * Matrix::Ones(n, n);
  }
  return 0.5 * (gram + gram.transpose());
}

inline Matrix replica_H_direct(const EnsembleConfig& cfg, Rng& rng) {
  std::optional<double> tau;
  if (auto tr = cfg.truncation()) tau = tr->tau;
  Matrix h = sample_gram_blocked(cfg.m, cfg.n, cfg.dist, rng, tau);
  h /= std::sqrt(static_cast<double>(cfg.m) * cfg.n);
  h.diagonal().array() -= std::sqrt(static_cast<double>(cfg.m) / cfg.n);
  return h;
}

inline Matrix replica_H_wishart(const EnsembleConfig& cfg, Rng& rng) {
  const int n = cfg.n;
  Matrix t = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) t(i, j) = rng.normal();
    t(i, i) = std::sqrt(rng.chi_square(static_cast<double>(cfg.m - i)));
  }
  Matrix w;
  w.noalias() = t * t.transpose();
  Matrix h = 0.5 * (w + w.transpose());
  h /= std::sqrt(static_cast<double>(cfg.m) * cfg.n);
  h.diagonal().array() -= std::sqrt(static_cast<double>(cfg.m) / cfg.n);
  return h;
}

}  // namespace detail

inline EnsembleMeasurements run_ensemble(const EnsembleConfig& cfg,
                                         const RunOptions& opts = {}) {
  cfg.validate();

  bool use_wishart = false;
  switch (opts.engine) {
    case GramEngine::direct:
      break;
    case GramEngine::wishart:
      if (!wishart_applicable(cfg))
        throw std::invalid_argument(
            "wishart engine requires gaussian entries and no truncation");
      use_wishart = true;
      break;
    case GramEngine::automatic:
      use_wishart = wishart_applicable(cfg) &&
                    cfg.m >= detail::kWishartAutoThreshold;
      break;
  }

  if (opts.green_diagnostics && cfg.n > 256)
    throw std::invalid_argument(
        "green diagnostics materialize full diagonals; requires N <= 256");

  if (opts.keep_samples) {
    const double bytes = 8.0 * cfg.n * cfg.n * cfg.replicas;
    if (bytes > static_cast<double>(opts.memory_budget_bytes))
      throw std::runtime_error(
          "replica retention exceeds the memory budget; run in streaming "
          "mode (keep_samples = false)");
  }

  const int r_total = cfg.replicas;
  const std::size_t nz = cfg.z_list.size();
  const std::size_t nphi = cfg.phi_list.size();

  EnsembleMeasurements meas;
  meas.wishart_used = use_wishart;
  meas.stieltjes.assign(nz, std::vector<Complex>(r_total));
  meas.linear_stats.assign(nphi, std::vector<double>(r_total));
  if (opts.green_diagnostics)
    meas.green_mean_abs2.assign(nz, std::vector<double>(r_total));
  if (opts.keep_samples) meas.samples.resize(r_total);

  std::atomic<int> cursor{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (;;) {
        const int r = cursor.fetch_add(1);
        if (r >= r_total || failed.load(std::memory_order_relaxed)) break;
        Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(r));
        const Matrix h = use_wishart ? detail::replica_H_wishart(cfg, rng)
                                     : detail::replica_H_direct(cfg, rng);

        Vector lam;
        Matrix q;
        if (opts.green_diagnostics) {
          Eigen::SelfAdjointEigenSolver<Matrix> es(h);
          lam = es.eigenvalues();
          q = es.eigenvectors();
        } else {
          Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
          lam = es.eigenvalues();
        }

        for (std::size_t zi = 0; zi < nz; ++zi) {
          const Complex z = cfg.z_list[zi];
          Complex acc = 0.0;
          for (int i = 0; i < cfg.n; ++i) acc += 1.0 / (lam[i] - z);
          meas.stieltjes[zi][r] = acc / static_cast<double>(cfg.n);
        }
        for (std::size_t pi = 0; pi < nphi; ++pi) {
          double acc = 0.0;
          for (int i = 0; i < cfg.n; ++i) acc += cfg.phi_list[pi].eval(lam[i]);
          meas.linear_stats[pi][r] = acc;
        }
        if (opts.green_diagnostics) {
          for (std::size_t zi = 0; zi < nz; ++zi) {
            const Complex z = cfg.z_list[zi];
            ComplexVector w(cfg.n);
            for (int i = 0; i < cfg.n; ++i) w[i] = 1.0 / (lam[i] - z);
            double mabs2 = 0.0;
            for (int k = 0; k < cfg.n; ++k) {
              Complex gkk = 0.0;
              for (int i = 0; i < cfg.n; ++i)
                gkk += q(k, i) * q(k, i) * w[i];
              mabs2 += std::norm(gkk);
            }
            meas.green_mean_abs2[zi][r] = mabs2 / cfg.n;
          }
        }
        if (opts.keep_samples) meas.samples[r] = lam;
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(error_mutex);
      failed.store(true);
      if (error_message.empty()) error_message = e.what();
    }
  };

  int threads = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, r_total);

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error("ensemble worker: " + error_message);
  return meas;
}

// Stream of per-replica spectral samples, delivered in replica order.
template <class Sink>
void run_ensemble_samples(const EnsembleConfig& cfg, const RunOptions& opts,
                          Sink&& sink) {
  RunOptions o = opts;
  o.keep_samples = true;
  EnsembleMeasurements meas = run_ensemble(cfg, o);
  for (int r = 0; r < cfg.replicas; ++r)
    sink(r, SpectralSample{meas.samples[r], ModelTag::sample_cov});
}

struct ExpansionReport {
  Complex z;
  Complex f_hat;
  double stderr_re = 0.0, stderr_im = 0.0;
  double stderr_combined = 0.0;
  ExpansionTerms prediction;
  Complex residual0, residual1, residual2;
  int replicas = 0;
};

inline ExpansionReport expansion_report(const EnsembleMeasurements& meas,
                                        const EnsembleConfig& cfg,
                                        std::size_t z_index) {
  const auto& ms = meas.stieltjes.at(z_index);
  RunningStats re, im;
  for (const Complex& c : ms) {
    re.push(c.real());
    im.push(c.imag());
  }
  ExpansionReport r;
  r.z = cfg.z_list.at(z_index);
  r.f_hat = Complex(re.mean, im.mean);
  r.stderr_re = re.mean_stderr();
  r.stderr_im = im.mean_stderr();
  r.stderr_combined = std::sqrt(r.stderr_re * r.stderr_re +
                                r.stderr_im * r.stderr_im);
  r.prediction = expansion_prediction(r.z, cfg.n, cfg.m, cfg.dist.kappa4());
  r.residual0 = r.f_hat - r.prediction.leading;
  r.residual1 = r.residual0 - r.prediction.first_order;
  r.residual2 = r.residual1 - r.prediction.second_order;
  r.replicas = cfg.replicas;
  return r;
}

struct FluctuationReport {
  std::string phi_name;
  VarianceTerms predicted;
  double empirical_mean = 0.0, mean_stderr = 0.0;
  double empirical_variance = 0.0, variance_stderr = 0.0;
  double skewness = 0.0, skewness_stderr = 0.0;
  double excess_kurtosis = 0.0, kurtosis_stderr = 0.0;
  double ks = 0.0;  // KS of standardized centered statistics vs N(0,1)
  int replicas = 0;
  bool degenerate = false;
  bool pass = false;
};

// Generic tool-level verdict thresholds for clt reports.
constexpr double kCltVarianceSigmas = 5.0;
constexpr double kCltMaxKsSqrtN = 1.95;

inline FluctuationReport clt_report(const EnsembleMeasurements& meas,
                                    const EnsembleConfig& cfg,
                                    std::size_t phi_index,
                                    const QuadratureSpec& quad = {}) {
  if (cfg.replicas < 500)
    throw std::invalid_argument("clt_report requires replicas >= 500");
  const auto& ls = meas.linear_stats.at(phi_index);
  RunningStats st;
  for (double v : ls) st.push(v);

  const TestFunction& phi = cfg.phi_list.at(phi_index);
  FluctuationReport r;
  r.phi_name = phi.name;
  r.predicted = variance_functional(phi, cfg.dist.kappa4(), quad);
  r.empirical_mean = st.mean;
  r.mean_stderr = st.mean_stderr();
  r.empirical_variance = st.variance();
  r.variance_stderr = st.variance_stderr();
  r.skewness = st.skewness();
  r.skewness_stderr = std::sqrt(6.0 / st.count);
  r.excess_kurtosis = st.excess_kurtosis();
  r.kurtosis_stderr = std::sqrt(24.0 / st.count);
  r.replicas = cfg.replicas;

  r.degenerate = r.empirical_variance < 1e-10;
  if (!r.degenerate) {
    const double sd = std::sqrt(r.empirical_variance);
    std::vector<double> standardized;
    standardized.reserve(ls.size());
    for (double v : ls) standardized.push_back((v - st.mean) / sd);
    r.ks = ks_statistic(std::move(standardized), normal_cdf);
    r.pass = std::abs(r.empirical_variance - r.predicted.total) <=
                 kCltVarianceSigmas * r.variance_stderr &&
             r.ks * std::sqrt(static_cast<double>(cfg.replicas)) <=
                 kCltMaxKsSqrtN;
  } else {
    // a constant statistic (phi = 1): fluctuation is identically zero
    r.ks = 0.0;
    r.pass = r.predicted.total <= 1e-10;
  }
  return r;
}

struct ConcentrationReport {
  Complex z;
  int n = 0, m = 0, replicas = 0;
  Complex f_hat;
  double var_re = 0.0, var_im = 0.0;
  double var_mn = 0.0;  // Var(Re m_N) + Var(Im m_N)
  double n2_var = 0.0;
  bool has_green = false;
  double green_msq = 0.0;    // mean over k, replicas of |G_kk + 1/(z+f_hat)|^2
  double normalizer = 0.0;   // 1/N + N/M
  double green_ratio = 0.0;
};

inline ConcentrationReport concentration_report(
    const EnsembleMeasurements& meas, const EnsembleConfig& cfg,
    std::size_t z_index) {
  if (cfg.replicas < 2)
    throw std::invalid_argument("variance undefined for replicas < 2");
  const auto& ms = meas.stieltjes.at(z_index);
  RunningStats re, im;
  for (const Complex& c : ms) {
    re.push(c.real());
    im.push(c.imag());
  }
  ConcentrationReport r;
  r.z = cfg.z_list.at(z_index);
  r.n = cfg.n;
  r.m = cfg.m;
  r.replicas = cfg.replicas;
  r.f_hat = Complex(re.mean, im.mean);
  r.var_re = re.variance();
  r.var_im = im.variance();
  r.var_mn = r.var_re + r.var_im;
  r.n2_var = static_cast<double>(cfg.n) * cfg.n * r.var_mn;
  if (!meas.green_mean_abs2.empty()) {
    const auto& ga = meas.green_mean_abs2.at(z_index);
    double mean_abs2 = 0.0;
    for (double v : ga) mean_abs2 += v;
    mean_abs2 /= ga.size();
    const Complex c = 1.0 / (r.z + r.f_hat);
    r.has_green = true;
    r.green_msq =
        mean_abs2 + 2.0 * std::real(std::conj(c) * r.f_hat) + std::norm(c);
    r.normalizer = 1.0 / cfg.n + static_cast<double>(cfg.n) / cfg.m;
    r.green_ratio = r.green_msq / r.normalizer;
  }
  return r;
}

inline ConcentrationReport green_diag_report(const EnsembleConfig& cfg,
                                             Complex z,
                                             RunOptions opts = {}) {
  require_upper_half(z);
  if (cfg.n > 256)
    throw std::invalid_argument("green_diag_report requires N <= 256");
  EnsembleConfig local = cfg;
  local.z_list = {z};
  local.phi_list.clear();
  opts.green_diagnostics = true;
  const EnsembleMeasurements meas = run_ensemble(local, opts);
  return concentration_report(meas, local, 0);
}

inline std::vector<ConcentrationReport> variance_scaling_report(
    const std::vector<EnsembleConfig>& ladder, Complex z,
    const RunOptions& opts = {}) {
  require_upper_half(z);
  if (ladder.size() < 3)
    throw std::invalid_argument(
        "variance scaling needs a ladder of at least 3 sizes");
  for (const auto& cfg : ladder) {
    if (cfg.replicas < 2)
      throw std::invalid_argument("variance undefined for replicas < 2");
    // fixed aspect ratio across the ladder (exact rational comparison)
    if (static_cast<long long>(cfg.n) * ladder[0].m !=
        static_cast<long long>(ladder[0].n) * cfg.m)
      throw std::invalid_argument("ladder must keep N/M fixed");
  }
  std::vector<ConcentrationReport> out;
  out.reserve(ladder.size());
  for (const auto& cfg : ladder) {
    EnsembleConfig local = cfg;
    local.z_list = {z};
    local.phi_list.clear();
    const EnsembleMeasurements meas = run_ensemble(local, opts);
    out.push_back(concentration_report(meas, local, 0));
  }
  return out;
}

// Companion-side concentration (the M x M resolvent), derived from the thin
// SVD of sampled Y; diagnostic only, reported without a pass threshold.
struct ReducedGreenReport {
  Complex z;
  int n = 0, m = 0, replicas = 0;
  double msq_reduced = 0.0;   // E|G~_jj + 1/(s + z + f_hat)|^2
  double norm_reduced = 0.0;  // (N/M)^3 + N/M^2
  double msq_ygyt = 0.0;      // E|(YGY^T)_jj - f_hat/(s + z + f_hat)|^2
  double norm_ygyt = 0.0;     // (N/M)^2 + 1/M
};

inline ReducedGreenReport reduced_green_report(const EnsembleConfig& cfg,
                                               Complex z) {
  cfg.validate();
  require_upper_half(z);
  const double s = std::sqrt(static_cast<double>(cfg.m) / cfg.n);
  std::vector<ComplexVector> diags(cfg.replicas);
  std::vector<Complex> mn(cfg.replicas);
  std::optional<double> tau;
  if (auto tr = cfg.truncation()) tau = tr->tau;
  for (int r = 0; r < cfg.replicas; ++r) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(r));
    const Matrix y = sample_data_matrix(cfg.m, cfg.n, cfg.dist, rng, tau);
    diags[r] = reduced_green_diagonal(y, z);
    mn[r] = empirical_stieltjes(eigenvalues_sym(build_H(y)), z);
  }
  Complex f_hat = 0.0;
  for (const Complex& v : mn) f_hat += v;
  f_hat /= static_cast<double>(cfg.replicas);

  ReducedGreenReport out;
  out.z = z;
  out.n = cfg.n;
  out.m = cfg.m;
  out.replicas = cfg.replicas;
  const Complex target = -1.0 / (s + z + f_hat);
  const Complex ygyt_target = f_hat / (s + z + f_hat);
  double acc_g = 0.0, acc_y = 0.0;
  for (const auto& d : diags)
    for (int j = 0; j < cfg.m; ++j) {
      acc_g += std::norm(d[j] - target);
      const Complex ygyt = 1.0 + (s + z) * d[j];
      acc_y += std::norm(ygyt - ygyt_target);
    }
  const double cnt = static_cast<double>(cfg.replicas) * cfg.m;
  out.msq_reduced = acc_g / cnt;
  out.msq_ygyt = acc_y / cnt;
  const double y_ratio = cfg.aspect();
  out.norm_reduced = y_ratio * y_ratio * y_ratio +
                     static_cast<double>(cfg.n) / (static_cast<double>(cfg.m) * cfg.m);
  out.norm_ygyt = y_ratio * y_ratio + 1.0 / cfg.m;
  return out;
}

}  // namespace rmtlab

#endif
