#include "ltlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <nlohmann/json.hpp>

#include "ltlab/errors.hpp"

namespace ltlab {

double normal_cdf(double z) {
  static const boost::math::normal_distribution<double> n01(0.0, 1.0);
  return boost::math::cdf(n01, z);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> n01(0.0, 1.0);
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p outside (0,1)");
  return boost::math::quantile(n01, p);
}

double bonferroni_z(double base_z, int m) {
  if (m < 1) throw ConfigError("bonferroni_z: m must be >= 1");
  if (m == 1) return base_z;
  const double tail = 2.0 * (1.0 - normal_cdf(base_z));  // two-sided, one test
  return normal_quantile(1.0 - tail / (2.0 * static_cast<double>(m)));
}

double dkw_epsilon(std::size_t n, double alpha) {
  if (n == 0) throw ConfigError("dkw_epsilon: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("dkw_epsilon: bad level");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf, double alpha) {
  if (samples.size() < 10) throw ConfigError("ks_test: need at least 10 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  KsResult r;
  r.d_stat = d;
  r.n = samples.size();
  r.threshold = dkw_epsilon(samples.size(), alpha);
  r.pass = d <= r.threshold;
  return r;
}

KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys,
                       double alpha) {
  if (xs.size() < 10 || ys.size() < 10)
    throw ConfigError("ks_two_sample: need at least 10 samples per side");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  KsResult r;
  r.d_stat = d;
  r.n = xs.size();
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  r.threshold = c * std::sqrt((nx + ny) / (nx * ny));
  r.pass = d <= r.threshold;
  return r;
}

Chi2Result chi_square_independence(
    const std::vector<std::vector<double>>& table) {
  const std::size_t rows = table.size();
  if (rows < 2) throw ConfigError("chi_square: need at least 2 rows");
  const std::size_t cols = table.front().size();
  if (cols < 2) throw ConfigError("chi_square: need at least 2 columns");
  for (const auto& row : table)
    if (row.size() != cols) throw ConfigError("chi_square: ragged table");

  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      if (table[i][j] < 0.0) throw ConfigError("chi_square: negative count");
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      total += table[i][j];
    }
  if (total <= 0.0) throw ConfigError("chi_square: empty table");

  Chi2Result r;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double expected = row_sum[i] * col_sum[j] / total;
      if (expected <= 0.0) continue;
      const double diff = table[i][j] - expected;
      r.stat += diff * diff / expected;
    }
  r.df = static_cast<int>((rows - 1) * (cols - 1));
  r.p_value = boost::math::gamma_q(static_cast<double>(r.df) / 2.0, r.stat / 2.0);
  return r;
}

double anderson_darling(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
  if (samples.size() < 10)
    throw ConfigError("anderson_darling: need at least 10 samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const double dn = static_cast<double>(n);
  KahanSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    double u = cdf(samples[i]);
    double v = cdf(samples[n - 1 - i]);
    u = std::min(std::max(u, 1e-300), 1.0 - 1e-16);
    v = std::min(std::max(v, 1e-300), 1.0 - 1e-16);
    const double w = 2.0 * static_cast<double>(i) + 1.0;
    acc.add(w * (std::log(u) + std::log1p(-v)));
  }
  return -dn - acc.value() / dn;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw ConfigError("linear_fit: need matched samples, n >= 3");
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / dn, my = sy / dn;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw ConfigError("linear_fit: degenerate abscissae");
  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    rss += e * e;
  }
  f.se_slope = (n > 2) ? std::sqrt(rss / (dn - 2.0) / sxx) : 0.0;
  f.r2 = (syy > 0.0) ? 1.0 - rss / syy : 1.0;
  return f;
}

LinearFit loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw ConfigError("loglog_slope: inputs must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return linear_fit(lx, ly);
}

CorrelationResult correlation_z(std::span<const double> x,
                                std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 10)
    throw ConfigError("correlation_z: need matched samples, n >= 10");
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= dn;
  my /= dn;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  CorrelationResult r;
  r.n = n;
  if (sxx <= 0.0 || syy <= 0.0) return r;  // constant input: r = 0 under H0
  r.r = sxy / std::sqrt(sxx * syy);
  r.z = r.r * std::sqrt(dn);  // SE of r under independence is 1/sqrt(n)
  return r;
}

double tv_distance_counts(std::span<const double> samples,
                          std::span<const double> model_pmf) {
  if (samples.empty()) throw ConfigError("tv_distance_counts: empty sample");
  std::vector<double> emp(model_pmf.size(), 0.0);
  double beyond = 0.0;
  for (double s : samples) {
    const auto k = static_cast<std::size_t>(std::llround(s));
    if (k < emp.size())
      emp[k] += 1.0;
    else
      beyond += 1.0;
  }
  const double dn = static_cast<double>(samples.size());
  double model_tail = 1.0;
  double tv = 0.0;
  for (std::size_t k = 0; k < emp.size(); ++k) {
    tv += std::abs(emp[k] / dn - model_pmf[k]);
    model_tail -= model_pmf[k];
  }
  tv += std::abs(beyond / dn - std::max(model_tail, 0.0));
  return 0.5 * tv;
}

void ReportSet::add(StatReport row) { rows.push_back(std::move(row)); }

bool ReportSet::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

std::string ReportSet::to_json() const {
  nlohmann::json out;
  out["schema"] = "v1";
  out["reports"] = nlohmann::json::array();
  for (const auto& r : rows) {
    if (r.target_source != "closed-form" && r.target_source != "exact" &&
        r.target_source != "oracle")
      throw ConfigError("StatReport '" + r.name +
                        "': target_source must be closed-form|exact|oracle");
    nlohmann::json j;
    j["name"] = r.name;
    j["estimate"] = r.estimate;
    j["se"] = r.se;
    j["n"] = r.n;
    j["target"] = r.target;
    j["target_source"] = r.target_source;
    j["stat_kind"] = r.stat_kind;
    j["stat_value"] = r.stat_value;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    out["reports"].push_back(std::move(j));
  }
  return out.dump(2);
}

void ReportSet::write_json(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open report file: " + path);
  f << to_json() << "\n";
}

}  // namespace ltlab
