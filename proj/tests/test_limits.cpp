#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "ltlab/errors.hpp"
#include "ltlab/green.hpp"
#include "ltlab/limits.hpp"
#include "ltlab/numeric.hpp"

using namespace ltlab;

namespace {

// Independent partition-count oracle: enumerate restricted growth strings
// of length k and tally the number of blocks used.
std::vector<std::uint64_t> partition_counts_brute(int k) {
  std::vector<std::uint64_t> by_blocks(k + 1, 0);
  std::vector<int> rgs(k, 0);
  while (true) {
    int blocks = 0;
    for (int i = 0; i < k; ++i) blocks = std::max(blocks, rgs[i] + 1);
    ++by_blocks[blocks];
    // next restricted growth string
    int i = k - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
      if (rgs[i] <= prefix_max) {
        ++rgs[i];
        for (int j = i + 1; j < k; ++j) rgs[j] = 0;
        break;
      }
      rgs[i] = 0;
    }
    if (i == 0) break;
  }
  return by_blocks;
}

}  // namespace

TEST_SUITE("limits") {

TEST_CASE("partition counts match brute-force enumeration") {
  for (int k = 1; k <= 7; ++k) {
    const auto oracle = partition_counts_brute(k);
    for (int q = 1; q <= k; ++q)
      CHECK(stirling_partition(k, q) == oracle[q]);
  }
  CHECK(stirling_partition(0, 0) == 1);
  CHECK(stirling_partition(3, 0) == 0);
  CHECK(stirling_partition(2, 5) == 0);
  CHECK(stirling_partition(3, 2) == 3);
  CHECK(stirling_partition(4, 2) == 7);
  CHECK(stirling_partition(4, 3) == 6);
  CHECK_THROWS_AS(stirling_partition(-1, 1), ConfigError);
  CHECK_THROWS_AS(stirling_partition(60, 30), OverflowError);
}

TEST_CASE("poisson moments from partition sums") {
  CHECK(poisson_moment(0, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(poisson_moment(1, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(poisson_moment(3, 2.0) == doctest::Approx(22.0).epsilon(1e-14));
  // Independent oracle: truncated series sum_j j^k e^{-lam} lam^j / j!.
  for (int k = 1; k <= 5; ++k) {
    const double lam = 2.0;
    double series = 0.0, term = std::exp(-lam);
    for (int j = 0; j <= 80; ++j) {
      series += std::pow(double(j), k) * term;
      term *= lam / double(j + 1);
    }
    CHECK(poisson_moment(k, lam) == doctest::Approx(series).epsilon(1e-12));
  }
  CHECK_THROWS_AS(poisson_moment(-1, 1.0), ConfigError);
  CHECK_THROWS_AS(poisson_moment(2, -1.0), ConfigError);
}

TEST_CASE("erlang tails against the regularized gamma function") {
  // P(Erlang(k, theta) > T) = Q(k, T/theta).
  for (int k : {1, 2, 3, 5}) {
    for (double theta : {0.5, 1.0, 2.0}) {
      for (double T : {0.25, 1.0, 4.0}) {
        CHECK(erlang_tail(k, theta, T) ==
              doctest::Approx(boost::math::gamma_q(k, T / theta))
                  .epsilon(1e-13));
      }
    }
  }
  CHECK(erlang_tail(3, 2.0, 4.0) ==
        doctest::Approx(5.0 * std::exp(-2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(erlang_tail(0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(erlang_tail(1, 0.0, 1.0), ConfigError);
}

TEST_CASE("product of erlang tails is dominated by the combined tail") {
  // Frozen point: k=2, p=2, theta=1, T=3.
  const auto b = gamma_tail_bound(2, 2, 1.0, 3.0);
  CHECK(b.lhs == doctest::Approx(16.0 * std::exp(-6.0)).epsilon(1e-13));
  CHECK(b.rhs == doctest::Approx(25.0 * std::exp(-6.0)).epsilon(1e-13));
  CHECK(b.holds);
  // The ordering holds across a parameter sweep.
  for (int k : {1, 2, 3, 4})
    for (int p : {1, 2, 3})
      for (double theta : {0.5, 1.0, 2.0})
        for (double T : {0.5, 1.0, 3.0}) {
          const auto r = gamma_tail_bound(k, p, theta, T);
          CHECK(r.holds);
          CHECK(r.lhs <= r.rhs * (1.0 + 1e-12));
        }
  CHECK_THROWS_AS(gamma_tail_bound(2, 0, 1.0, 1.0), ConfigError);
}

TEST_CASE("tau bank carries the walk-matched clock") {
  const auto bank = sample_tau_bank(3, 400, 5e-4, 2525);
  CHECK(bank.d == 3);
  CHECK(bank.size() == 400);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    CHECK(bank.tau[i] == doctest::Approx(3.0 * bank.tau_raw[i]).epsilon(1e-15));
    CHECK(bank.tau_raw[i] > 0.0);
  }
  const auto m = bank.tau_mean();
  CHECK(m.n == 400);
  // E[tau] = d * E[tau_raw] = 3 * 0.4497... (frozen PDE oracle), Euler bias
  // O(sqrt(dt)) plus MC error.
  CHECK(std::abs(m.mean - 3.0 * 0.4497022615) < std::max(4.0 * m.se, 0.05));
  const auto r = bank.tau_over_g(2.0);
  CHECK(r.size() == 400);
  CHECK(r[7] == doctest::Approx(bank.tau[7] / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(bank.tau_over_g(0.0), ConfigError);
  CHECK_THROWS_AS(sample_tau_bank(9, 100, 1e-4, 1), ConfigError);
}

TEST_CASE("tau bank save and load round trip") {
  const auto bank = sample_tau_bank(3, 120, 1e-3, 864);
  save_tau_bank(bank, "tau_bank_roundtrip");
  const auto loaded = load_tau_bank("tau_bank_roundtrip");
  CHECK(loaded.d == bank.d);
  CHECK(loaded.dt == bank.dt);
  REQUIRE(loaded.size() == bank.size());
  CHECK(loaded.tau_raw == bank.tau_raw);
  CHECK(loaded.tau == bank.tau);
  CHECK(loaded.z == bank.z);

  // Corrupt one byte of the payload: load must refuse.
  {
    std::fstream f("tau_bank_roundtrip.bin",
                   std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(f.good());
    char b = 0;
    f.seekg(40);
    f.read(&b, 1);
    b = static_cast<char>(b ^ 0x11);
    f.seekp(40);
    f.write(&b, 1);
  }
  CHECK_THROWS_AS(load_tau_bank("tau_bank_roundtrip"), ConfigError);
  std::remove("tau_bank_roundtrip.bin");
  std::remove("tau_bank_roundtrip.json");
  CHECK_THROWS_AS(load_tau_bank("tau_bank_roundtrip"), ConfigError);
}

TEST_CASE("limit laws read off the bank consistently") {
  const auto bank = sample_tau_bank(3, 600, 5e-4, 4711);
  const double g = 1.5163860591519780;

  // CDF: manual recomputation, bounds, monotonicity.
  const auto c0 = subcritical_mass_cdf(0.0, bank, g);
  CHECK(c0.mean == 0.0);
  const auto c9 = subcritical_mass_cdf(99.0, bank, g);
  CHECK(c9.mean == 1.0);
  const auto r = bank.tau_over_g(g);
  const double t = 0.8;
  double manual = 0.0;
  for (double x : r) manual += (x <= t) ? 1.0 : 0.0;
  manual /= double(r.size());
  const auto ct = subcritical_mass_cdf(t, bank, g);
  CHECK(ct.mean == doctest::Approx(manual).epsilon(1e-15));
  CHECK(ct.se > 0.0);

  // PMF: nonnegative, sums to one over a generous range.
  double total = 0.0;
  double prev = critical_count_pmf(0, bank, g).mean;
  for (int k = 0; k <= 60; ++k) {
    const auto p = critical_count_pmf(k, bank, g);
    CHECK(p.mean >= 0.0);
    total += p.mean;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(prev > 0.0);

  // Gumbel mixture: increasing, ends at 1, and t=0 coincides with the
  // critical pmf at k=0 by construction (same exponential average).
  const auto g0 = gumbel_cdf(0.0, bank, g);
  CHECK(g0.mean == critical_count_pmf(0, bank, g).mean);
  CHECK(g0.se == critical_count_pmf(0, bank, g).se);
  double last = 0.0;
  for (double tt : {-3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) {
    const auto gc = gumbel_cdf(tt, bank, g);
    CHECK(gc.mean >= last);
    last = gc.mean;
  }
  CHECK(gumbel_cdf(60.0, bank, g).mean > 0.999);
}

TEST_CASE("first moment on the full cube equals mean tau over g") {
  const double g = 1.5163860591519780;
  const std::vector<std::pair<double, double>> cube{
      {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  const auto m1 = m_moment(1, 3, cube, g, 3000, 24, 1112);
  CHECK(m1.k == 1);
  CHECK(m1.samples == 3000);
  const auto bank = sample_tau_bank(3, 2500, 2e-4, 995);
  const auto tm = bank.tau_mean();
  const double target = tm.mean / g;
  const double tol =
      4.0 * std::sqrt(m1.se * m1.se + tm.se * tm.se / (g * g)) + 0.01;
  CHECK(std::abs(m1.value - target) < tol);
}

TEST_CASE("time window scales the moment by its exponential weight") {
  const double g = 1.5163860591519780;
  const std::vector<std::pair<double, double>> cube{
      {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  const std::pair<double, double> window{0.5, 2.5};
  const auto plain = m_moment(2, 3, cube, g, 400, 16, 3321);
  const auto windowed = m_moment(2, 3, cube, g, 400, 16, 3321, 1, &window);
  const double w = std::exp(-window.first / g) - std::exp(-window.second / g);
  CHECK(windowed.value ==
        doctest::Approx(plain.value * w * w).epsilon(1e-12));
}

TEST_CASE("m-moment argument guards") {
  const double g = 1.5;
  const std::vector<std::pair<double, double>> cube{
      {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  CHECK_THROWS_AS(m_moment(0, 3, cube, g, 300, 16, 1), ConfigError);
  CHECK_THROWS_AS(m_moment(7, 3, cube, g, 300, 16, 1), ConfigError);
  CHECK_THROWS_AS(m_moment(1, 2, cube, g, 300, 16, 1), ConfigError);
  CHECK_THROWS_AS(m_moment(1, 3, {{0.0, 1.0}}, g, 300, 16, 1), ConfigError);
  CHECK_THROWS_AS(m_moment(1, 3, cube, g, 50, 16, 1), ConfigError);
  CHECK_THROWS_AS(m_moment(1, 3, cube, g, 300, 4, 1), ConfigError);
}

}  // TEST_SUITE
