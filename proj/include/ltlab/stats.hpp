#pragma once

// Statistical checks shared by the verification harnesses and the CLI:
// KS/DKW goodness of fit, two-sample KS, chi-square independence,
// Anderson-Darling with fully specified target, log-log slope fits, and the
// JSON report schema every harness writes.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ltlab/numeric.hpp"

namespace ltlab {

double normal_cdf(double z);
double normal_quantile(double p);

// Two-sided critical value such that a suite of m independent comparisons has
// the same family-wise false-alarm rate as a single |z| <= base_z test.
double bonferroni_z(double base_z, int m);

// Dvoretzky-Kiefer-Wolfowitz band half-width: P(sup|F_n - F| > eps) <= alpha.
double dkw_epsilon(std::size_t n, double alpha);

struct KsResult {
  double d_stat = 0.0;
  double threshold = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

// One-sample KS against an exact CDF, thresholded by the DKW inequality at
// the given level. Throws ConfigError when n < 10.
KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf, double alpha = 0.01);

// Two-sample KS with the asymptotic critical value c(alpha)*sqrt((n+m)/(nm)),
// c(alpha) = sqrt(-log(alpha/2)/2). Conservative for discrete data (ties).
KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys,
                       double alpha = 0.01);

struct Chi2Result {
  double stat = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Pearson chi-square test of independence on a contingency table of counts.
Chi2Result chi_square_independence(
    const std::vector<std::vector<double>>& table);

// Anderson-Darling statistic against a fully specified continuous CDF.
double anderson_darling(std::vector<double> samples,
                        const std::function<double(double)>& cdf);

// Asymptotic 1% point of the Anderson-Darling null distribution with all
// parameters known. Solved from the limiting series (CDF(3.8781) = 0.99000).
inline constexpr double kAndersonDarlingCrit1pc = 3.8781;

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Ordinary least squares of log(y) on log(x); inputs must be positive.
LinearFit loglog_slope(std::span<const double> x, std::span<const double> y);

// Pearson correlation with the H0 (independence) standard error 1/sqrt(n).
struct CorrelationResult {
  double r = 0.0;
  double z = 0.0;
  std::size_t n = 0;
};
CorrelationResult correlation_z(std::span<const double> x,
                                std::span<const double> y);

// Total variation distance between an empirical distribution of nonnegative
// integers and a model pmf (model mass beyond the table counts as discrepancy).
double tv_distance_counts(std::span<const double> samples,
                          std::span<const double> model_pmf);

// One row of a verification report. `target_source` states where the
// comparison target comes from and is required by the schema:
//   "closed-form" published constant or closed-form law,
//   "exact"       identity that holds in exact arithmetic,
//   "oracle"      independently computed numerical oracle.
struct StatReport {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  double target = 0.0;
  std::string target_source;
  std::string stat_kind;  // "z", "ks", "tv", "chi2", "bound", ...
  double stat_value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ReportSet {
  std::vector<StatReport> rows;

  void add(StatReport row);
  bool all_pass() const;
  // Serializes as {"schema":"v1","reports":[...]}; rejects rows with an
  // unknown target_source.
  std::string to_json() const;
  void write_json(const std::string& path) const;
};

}  // namespace ltlab
