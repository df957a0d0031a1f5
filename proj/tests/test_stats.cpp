#include <cmath>
#include <vector>

#include "doctest.h"
#include "ltlab/errors.hpp"
#include "ltlab/rng.hpp"
#include "ltlab/stats.hpp"

using namespace ltlab;

namespace {

std::vector<double> exp_samples(double mean, int n, std::uint64_t replica) {
  Rng rng(2024, StreamPurpose::Scratch, replica);
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.exponential(mean);
  return xs;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("normal cdf and quantile agree with tabulated values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
  CHECK(normal_cdf(-1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-14));
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (double p : {0.001, 0.1, 0.5, 0.77, 0.9999})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
  CHECK_THROWS_AS(normal_quantile(1.0), ConfigError);
}

TEST_CASE("bonferroni z keeps the family-wise level") {
  CHECK(bonferroni_z(3.0, 1) == doctest::Approx(3.0).epsilon(1e-15));
  const double z1 = bonferroni_z(3.0, 4);
  const double z2 = bonferroni_z(3.0, 40);
  CHECK(z1 > 3.0);
  CHECK(z2 > z1);
  // Per-test two-sided tail must equal the one-test tail divided by m.
  const double tail1 = 2.0 * (1.0 - normal_cdf(3.0));
  const double tail4 = 2.0 * (1.0 - normal_cdf(z1));
  CHECK(tail4 == doctest::Approx(tail1 / 4.0).epsilon(1e-9));
  CHECK_THROWS_AS(bonferroni_z(3.0, 0), ConfigError);
}

TEST_CASE("dkw band width") {
  CHECK(dkw_epsilon(1000, 0.05) ==
        doctest::Approx(0.04294694083467376).epsilon(1e-14));
  // Scales as 1/sqrt(n).
  CHECK(dkw_epsilon(250, 0.05) ==
        doctest::Approx(2.0 * dkw_epsilon(1000, 0.05)).epsilon(1e-14));
  CHECK_THROWS_AS(dkw_epsilon(0, 0.05), ConfigError);
  CHECK_THROWS_AS(dkw_epsilon(10, 0.0), ConfigError);
}

TEST_CASE("one-sample ks accepts the true law and rejects a wrong one") {
  const auto xs = exp_samples(1.0, 4000, 10);
  const auto cdf_exp1 = [](double t) { return 1.0 - std::exp(-t); };
  const auto cdf_exp2 = [](double t) { return 1.0 - std::exp(-t / 2.0); };
  const auto ok = ks_test(xs, cdf_exp1, 0.01);
  CHECK(ok.pass);
  CHECK(ok.n == 4000);
  CHECK(ok.threshold == doctest::Approx(dkw_epsilon(4000, 0.01)).epsilon(1e-15));
  const auto bad = ks_test(xs, cdf_exp2, 0.01);
  CHECK_FALSE(bad.pass);
  // D for Exp(1) vs Exp(2) converges to max_t |e^{-t/2}-e^{-t}| = 1/4.
  CHECK(bad.d_stat > 0.2);
  CHECK_THROWS_AS(ks_test({1.0, 2.0}, cdf_exp1, 0.01), ConfigError);
}

TEST_CASE("two-sample ks separates distinct exponentials") {
  const auto xs = exp_samples(1.0, 3000, 20);
  const auto ys = exp_samples(1.0, 2000, 21);
  const auto zs = exp_samples(2.0, 2000, 22);
  const auto same = ks_two_sample(xs, ys, 0.01);
  CHECK(same.pass);
  const double c = 1.6276236307187293;  // sqrt(-log(0.005)/2)
  CHECK(same.threshold ==
        doctest::Approx(c * std::sqrt((3000.0 + 2000.0) / (3000.0 * 2000.0)))
            .epsilon(1e-12));
  const auto diff = ks_two_sample(xs, zs, 0.01);
  CHECK_FALSE(diff.pass);
  CHECK(diff.d_stat > 0.2);
}

TEST_CASE("chi-square independence on a frozen 2x2 table") {
  const std::vector<std::vector<double>> table{{10.0, 20.0}, {20.0, 10.0}};
  const auto r = chi_square_independence(table);
  CHECK(r.df == 1);
  CHECK(r.stat == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.009823274507519235).epsilon(1e-9));

  // Independent table: statistic collapses to zero.
  const std::vector<std::vector<double>> indep{{10.0, 30.0}, {20.0, 60.0}};
  CHECK(chi_square_independence(indep).stat ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(chi_square_independence({{1.0, 2.0}}), ConfigError);
  CHECK_THROWS_AS(chi_square_independence({{1.0}, {2.0}}), ConfigError);
}

TEST_CASE("anderson-darling matches a hand-computed value") {
  // Evenly placed points in (0,1) against the uniform CDF.
  std::vector<double> u{0.55, 0.15, 0.95, 0.35, 0.75,
                        0.05, 0.45, 0.85, 0.25, 0.65};
  const auto ident = [](double t) { return t; };
  CHECK(anderson_darling(u, ident) ==
        doctest::Approx(0.07657971407557085).epsilon(1e-12));

  const auto xs = exp_samples(1.0, 2000, 30);
  const auto cdf_exp1 = [](double t) { return 1.0 - std::exp(-t); };
  const auto cdf_exp2 = [](double t) { return 1.0 - std::exp(-t / 2.0); };
  CHECK(anderson_darling(xs, cdf_exp1) < kAndersonDarlingCrit1pc);
  CHECK(anderson_darling(xs, cdf_exp2) > 10.0 * kAndersonDarlingCrit1pc);
}

TEST_CASE("linear fit recovers exact and noisy lines") {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> y(5);
  for (int i = 0; i < 5; ++i) y[i] = 2.0 * x[i] + 1.0;
  auto f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.se_slope == doctest::Approx(0.0).epsilon(1e-12));

  // Small least-squares problem solved by hand.
  std::vector<double> x3{0.0, 1.0, 2.0}, y3{0.0, 1.0, 3.0};
  auto g = linear_fit(x3, y3);
  CHECK(g.slope == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(g.intercept == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  CHECK(g.se_slope == doctest::Approx(0.28867513459481287).epsilon(1e-10));
  CHECK(g.r2 == doctest::Approx(0.9642857142857143).epsilon(1e-12));
  CHECK_THROWS_AS(linear_fit(std::vector<double>{1.0, 1.0, 1.0}, y3),
                  ConfigError);
}

TEST_CASE("loglog slope recovers a power law") {
  std::vector<double> x{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> y(5);
  for (int i = 0; i < 5; ++i) y[i] = 3.0 * std::pow(x[i], 2.5);
  auto f = loglog_slope(x, y);
  CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  x[0] = -1.0;
  CHECK_THROWS_AS(loglog_slope(x, y), ConfigError);
}

TEST_CASE("correlation z flags dependence and clears independence") {
  Rng rng(77, StreamPurpose::Scratch, 40);
  const int n = 5000;
  std::vector<double> a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
    c[i] = a[i] + 0.5 * rng.normal();
  }
  const auto indep = correlation_z(a, b);
  CHECK(std::abs(indep.z) < 4.0);
  const auto dep = correlation_z(a, c);
  CHECK(dep.r > 0.8);
  CHECK(dep.z > 10.0);
}

TEST_CASE("tv distance against a pmf table") {
  // Empirical {2/3, 1/3} vs {1/2, 1/2}: tv = 1/6.
  std::vector<double> s1{0.0, 0.0, 1.0};
  std::vector<double> pmf1{0.5, 0.5};
  CHECK(tv_distance_counts(s1, pmf1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  // Mass beyond the table on both sides cancels exactly.
  std::vector<double> s2{0.0, 1.0, 2.0, 5.0};
  std::vector<double> pmf2{0.25, 0.25};
  CHECK(tv_distance_counts(s2, pmf2) == doctest::Approx(0.0).epsilon(1e-14));
  // All mass at 0 vs {1/4, 3/4}.
  std::vector<double> s3{0.0, 0.0};
  std::vector<double> pmf3{0.25, 0.75};
  CHECK(tv_distance_counts(s3, pmf3) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("report set serializes and enforces the target vocabulary") {
  ReportSet set;
  StatReport row;
  row.name = "demo";
  row.estimate = 1.0;
  row.target = 1.0;
  row.target_source = "exact";
  row.stat_kind = "z";
  row.pass = true;
  set.add(row);
  CHECK(set.all_pass());
  const auto js = set.to_json();
  CHECK(js.find("\"schema\": \"v1\"") != std::string::npos);
  CHECK(js.find("\"demo\"") != std::string::npos);

  row.pass = false;
  set.add(row);
  CHECK_FALSE(set.all_pass());

  StatReport bad;
  bad.name = "bad";
  bad.target_source = "guess";
  ReportSet set2;
  set2.add(bad);
  CHECK_THROWS_AS(set2.to_json(), ConfigError);
}

}  // TEST_SUITE
