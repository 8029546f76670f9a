#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rmtlab/entries.hpp"
#include "rmtlab/rng.hpp"

using namespace rmtlab;
using Catch::Approx;

namespace {

struct MomentEstimate {
  double value;
  double stderr_value;
};

MomentEstimate mc_moment(const EntryDistribution& d, int order, std::size_t n,
                         std::uint64_t seed) {
  EntrySampler s(d, Rng::substream(seed, 0));
  RunningStats st;
  for (std::size_t i = 0; i < n; ++i)
    st.push(std::pow(s.next(), order));
  return {st.mean, st.mean_stderr()};
}

}  // namespace

TEST_CASE("exact moments of the built-in laws") {
  const auto g = EntryDistribution::gaussian();
  REQUIRE(g.omega(4) == 3.0);
  REQUIRE(g.omega(6) == 15.0);
  REQUIRE(g.omega(8) == 105.0);
  REQUIRE(g.kappa4() == 0.0);

  const auto r = EntryDistribution::rademacher();
  REQUIRE(r.omega(4) == 1.0);
  REQUIRE(r.kappa4() == -2.0);

  const auto u = EntryDistribution::uniform();
  REQUIRE(u.omega(4) == Approx(9.0 / 5.0).epsilon(1e-15));
  REQUIRE(u.omega(6) == Approx(27.0 / 7.0).epsilon(1e-15));
  REQUIRE(u.omega(8) == Approx(9.0).epsilon(1e-15));
  REQUIRE(u.kappa4() == Approx(-6.0 / 5.0).epsilon(1e-14));

  // two_point(p): kappa3 = (1-2p)/sqrt(p(1-p)), kappa4 = 1/(p(1-p)) - 6
  const auto tp = EntryDistribution::two_point(0.2);
  const auto w = tp.moments();
  REQUIRE(w[0] == Approx(0.0).margin(1e-15));
  REQUIRE(w[1] == Approx(1.0).epsilon(1e-15));
  REQUIRE(w[2] == Approx(0.6 / std::sqrt(0.16)).epsilon(1e-14));
  REQUIRE(tp.kappa4() == Approx(1.0 / 0.16 - 6.0).epsilon(1e-13));

  REQUIRE_THROWS_AS(EntryDistribution::two_point(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(EntryDistribution::two_point(1.0), std::invalid_argument);
}

TEST_CASE("distribution names parse and round-trip") {
  REQUIRE(EntryDistribution::parse("gaussian").name() == "gaussian");
  REQUIRE(EntryDistribution::parse("rademacher").name() == "rademacher");
  const auto tp = EntryDistribution::parse("two_point:0.2");
  REQUIRE(tp.p() == 0.2);
  REQUIRE(EntryDistribution::parse(tp.name()).p() == 0.2);
  REQUIRE_THROWS_AS(EntryDistribution::parse("cauchy"), std::invalid_argument);
  REQUIRE_THROWS_AS(EntryDistribution::parse("two_point:abc"), std::invalid_argument);
}

TEST_CASE("samplers are deterministic and substreams are distinct") {
  const auto dists = {EntryDistribution::gaussian(), EntryDistribution::rademacher(),
                      EntryDistribution::uniform(), EntryDistribution::two_point(0.3)};
  for (const auto& d : dists) {
    const auto a = sample(d, Rng::substream(7, 3), 64);
    const auto b = sample(d, Rng::substream(7, 3), 64);
    REQUIRE(a == b);
    const auto c = sample(d, Rng::substream(7, 4), 64);
    REQUIRE(a != c);
  }
  REQUIRE(sample(EntryDistribution::gaussian(), Rng(1), 0).empty());
}

TEST_CASE("empirical moments match stored moments within 5 MC standard errors") {
  const std::size_t n = 1000000;
  int which = 0;
  for (const auto& d : {EntryDistribution::gaussian(), EntryDistribution::rademacher(),
                        EntryDistribution::uniform(), EntryDistribution::two_point(0.2)}) {
    const auto w = d.moments();
    for (int order = 1; order <= 8; ++order) {
      const auto est = mc_moment(d, order, n, 90 + which);
      const double tol = std::max(5.0 * est.stderr_value, 1e-12);
      INFO(d.name() << " omega_" << order);
      REQUIRE(std::abs(est.value - w[order - 1]) <= tol);
    }
    ++which;
  }
}

TEST_CASE("rademacher and uniform match their binomial-oracle bands") {
  // rademacher: mean within +-0.004 (4 sigma), variance within 1 +- 0.006
  EntrySampler s(EntryDistribution::rademacher(), Rng::substream(123, 0));
  RunningStats st;
  for (int i = 0; i < 1000000; ++i) st.push(s.next());
  REQUIRE(std::abs(st.mean) <= 0.004);
  REQUIRE(std::abs(st.variance() - 1.0) <= 0.006);

  // uniform fourth moment: 9/5 within +-0.01
  const auto est = mc_moment(EntryDistribution::uniform(), 4, 1000000, 321);
  REQUIRE(std::abs(est.value - 1.8) <= 0.01);
}

TEST_CASE("cumulants from moments") {
  REQUIRE(cumulants_from_moments(0, 1, 0, 3) == std::array<double, 4>{0, 1, 0, 0});
  REQUIRE(cumulants_from_moments(0, 1, 0, 1) == std::array<double, 4>{0, 1, 0, -2});
  REQUIRE(cumulants_from_moments(1, 1, 1, 1) == std::array<double, 4>{1, 0, 0, 0});
}

TEST_CASE("cumulant-moment round trip on random tuples") {
  Rng rng(55);
  for (int it = 0; it < 100; ++it) {
    const double k1 = 2.0 * rng.uniform01() - 1.0;
    const double k2 = rng.uniform01() + 0.05;
    const double k3 = 3.0 * (rng.uniform01() - 0.5);
    const double k4 = 4.0 * (rng.uniform01() - 0.5);
    const double m1 = k1;
    const double m2 = k2 + k1 * k1;
    const double m3 = k3 + 3.0 * k2 * k1 + std::pow(k1, 3);
    const double m4 = k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 +
                      std::pow(k1, 4);
    const auto back = cumulants_from_moments(m1, m2, m3, m4);
    REQUIRE(back[0] == Approx(k1).margin(1e-10));
    REQUIRE(back[1] == Approx(k2).margin(1e-10));
    REQUIRE(back[2] == Approx(k3).margin(1e-10));
    REQUIRE(back[3] == Approx(k4).margin(1e-10));
  }
}

TEST_CASE("truncation threshold") {
  REQUIRE(truncation_threshold(16, 16, 0.05).tau ==
          Approx(std::pow(256.0, 0.2)).epsilon(1e-15));
  REQUIRE(truncation_threshold(16, 16, 0.05).tau == Approx(3.0314331).margin(1e-6));
  REQUIRE(truncation_threshold(10000, 100, 0.01).tau ==
          Approx(std::pow(10.0, 1.44)).epsilon(1e-14));
  REQUIRE(truncation_threshold(10000, 100, 0.01).tau == Approx(27.542287).margin(1e-5));
  // t -> 0+ limit: tau -> (MN)^(1/4) = 4
  REQUIRE(truncation_threshold(16, 16, 1e-12).tau == Approx(4.0).margin(1e-9));
  REQUIRE_THROWS_AS(truncation_threshold(16, 16, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(truncation_threshold(16, 16, 0.25), std::invalid_argument);
  REQUIRE_THROWS_AS(truncation_threshold(16, 16, -0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(truncation_threshold(4, 16, 0.1), std::invalid_argument);
}

TEST_CASE("truncate and recenter fixtures") {
  REQUIRE(truncate_recenter({5, -1, 1}, 2.0) == std::vector<double>{0, -1, 1});
  REQUIRE(truncate_recenter({3}, 2.0) == std::vector<double>{0});
  REQUIRE(truncate_recenter({1, 1, 1, 1}, 2.0) == std::vector<double>{0, 0, 0, 0});
  REQUIRE(truncate_recenter({}, 1.0).empty());
  REQUIRE_THROWS_AS(truncate_recenter({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("truncate and recenter invariants on random batches") {
  Rng rng(77);
  for (int it = 0; it < 50; ++it) {
    std::vector<double> v(311);
    for (auto& x : v) x = 3.0 * rng.normal();
    const double tau = 0.5 + 2.5 * rng.uniform01();
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
    REQUIRE(std::abs(mean) <= 1e-12 * std::max(1.0, amax));
    for (double x : out)
      REQUIRE(std::abs(x) <= tau + std::abs(clipped_mean) + 1e-12);
  }
}

TEST_CASE("stein expansion: exact gaussian identities at p = 1") {
  const auto gauss = EntryDistribution::gaussian();
  SteinFunction lin{"t", {[](double t) { return std::complex<double>(t); },
                          [](double) { return std::complex<double>(1.0); }}};
  const auto c1 = stein_expansion_residual(gauss, lin, 1, 1000000, Rng::substream(5, 0));
  REQUIRE(c1.residual <= 5.0 * c1.lhs_stderr);

  SteinFunction sq{"t^2", {[](double t) { return std::complex<double>(t * t); },
                           [](double t) { return std::complex<double>(2.0 * t); }}};
  const auto c2 = stein_expansion_residual(gauss, sq, 1, 1000000, Rng::substream(5, 1));
  REQUIRE(c2.residual <= 5.0 * c2.lhs_stderr);
}

TEST_CASE("stein expansion against the exact two-point computation") {
  // For rademacher entries every expectation is a two-point average, so the
  // truncated cumulant expansion has an exactly computable remainder:
  //   E{xi g(xi)} = (g(1) - g(-1))/2
  //   sum_{a<=3} kappa_{a+1}/a! E{g^(a)} = E{g'} + (kappa4/6) E{g'''}.
  // With g(t) = 1/(t-3i) the remainder is 0.1 - 0.0856 = 0.0144; the Monte
  // Carlo residual must reproduce it within its own sampling error.
  const SteinFunction g = default_stein_function();
  auto two_point_mean = [&](int a) {
    return 0.5 * (g.derivatives[a](1.0) + g.derivatives[a](-1.0));
  };
  const std::complex<double> lhs_exact =
      0.5 * (g.derivatives[0](1.0) - g.derivatives[0](-1.0));
  const std::complex<double> rhs_exact =
      two_point_mean(1) + (-2.0 / 6.0) * two_point_mean(3);
  const double exact_residual = std::abs(lhs_exact - rhs_exact);

  REQUIRE(lhs_exact.real() == Approx(0.1).margin(1e-15));
  REQUIRE(lhs_exact.imag() == Approx(0.0).margin(1e-15));
  REQUIRE(exact_residual == Approx(0.0144).margin(1e-10));

  const auto chk = stein_expansion_residual(EntryDistribution::rademacher(), g, 3,
                                            1000000, Rng::substream(5, 2));
  REQUIRE(std::abs(chk.residual - exact_residual) <= 5.0 * chk.lhs_stderr);
}

TEST_CASE("stein expansion input validation") {
  const SteinFunction g = default_stein_function();
  REQUIRE_THROWS_AS(
      stein_expansion_residual(EntryDistribution::gaussian(), g, 4, 100, Rng(1)),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      stein_expansion_residual(EntryDistribution::gaussian(), g, 0, 100, Rng(1)),
      std::invalid_argument);
  SteinFunction short_g{"g", {[](double t) { return std::complex<double>(t); }}};
  REQUIRE_THROWS_AS(
      stein_expansion_residual(EntryDistribution::gaussian(), short_g, 1, 100, Rng(1)),
      std::invalid_argument);
}

TEST_CASE("gamma and chi-square samplers have the right first moments") {
  Rng rng(42);
  RunningStats st;
  for (int i = 0; i < 200000; ++i) st.push(rng.chi_square(5.0));
  REQUIRE(st.mean == Approx(5.0).margin(5.0 * st.mean_stderr()));
  REQUIRE(st.variance() == Approx(10.0).epsilon(0.05));

  RunningStats small;
  for (int i = 0; i < 200000; ++i) small.push(rng.gamma(0.5));
  REQUIRE(small.mean == Approx(0.5).margin(5.0 * small.mean_stderr()));
}
