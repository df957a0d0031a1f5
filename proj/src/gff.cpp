#include "ltlab/gff.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "ltlab/errors.hpp"
#include "ltlab/numeric.hpp"

namespace ltlab {

GffSampler::GffSampler(Eigen::MatrixXd covariance, std::vector<VertexId> support,
                       std::size_t ambient_vertices)
    : cov_(std::move(covariance)),
      support_(std::move(support)),
      ambient_(ambient_vertices) {
  const auto n = static_cast<std::size_t>(cov_.rows());
  if (n != static_cast<std::size_t>(cov_.cols()) || n != support_.size()) {
    throw ConfigError("gff: covariance/support size mismatch");
  }
  support_index_.assign(ambient_, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId v = support_[i];
    if (v < 0 || static_cast<std::size_t>(v) >= ambient_ ||
        support_index_[static_cast<std::size_t>(v)] >= 0) {
      throw ConfigError("gff: support not a set of ambient vertex ids");
    }
    support_index_[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(i);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("gff: covariance is not positive definite");
  }
  chol_ = llt.matrixL();
}

Eigen::VectorXd GffSampler::transform(const Eigen::VectorXd& z) const {
  return chol_ * z;
}

Eigen::VectorXd GffSampler::sample_support(Rng& rng) const {
  Eigen::VectorXd z(chol_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return transform(z);
}

std::vector<double> GffSampler::sample(Rng& rng) const {
  const Eigen::VectorXd phi = sample_support(rng);
  std::vector<double> out(ambient_, 0.0);
  for (std::size_t i = 0; i < support_.size(); ++i) {
    out[static_cast<std::size_t>(support_[i])] = phi[static_cast<Eigen::Index>(i)];
  }
  return out;
}

double GffSampler::covariance_at(VertexId x, VertexId y) const {
  if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= ambient_ ||
      static_cast<std::size_t>(y) >= ambient_) {
    throw ConfigError("gff: vertex out of range");
  }
  const std::int64_t i = support_index_[static_cast<std::size_t>(x)];
  const std::int64_t j = support_index_[static_cast<std::size_t>(y)];
  if (i < 0 || j < 0) return 0.0;
  return cov_(i, j);
}

double GffSampler::variance(VertexId x) const { return covariance_at(x, x); }

GffSampler make_dirichlet_sampler(const GreenOperator& green,
                                  std::size_t ambient_vertices) {
  return GffSampler(green.G, green.interior, ambient_vertices);
}

GffSampler make_pinned_sampler(const Graph& g, VertexId x0,
                               std::size_t max_dense_vertices) {
  if (x0 < 0 || x0 >= g.n()) {
    throw ConfigError("gff: pin vertex out of range");
  }
  if (static_cast<std::size_t>(g.n()) > max_dense_vertices) {
    throw ResourceLimitError("gff: graph too large for a dense pinned sampler");
  }
  if (g.n() < 2) throw ConfigError("gff: pinned field needs at least 2 vertices");
  std::vector<std::uint8_t> mask(g.n(), 1);
  mask[static_cast<std::size_t>(x0)] = 0;
  const Domain dom = make_domain(g, mask);
  // exact_green also verifies V \ {x0} is connected, which for a connected
  // graph means x0 is not a cut vertex; the killed walk then dies a.s. and
  // the covariance is positive definite.
  const GreenOperator green = exact_green(g, dom);
  return make_dirichlet_sampler(green, g.n());
}

TiltCheckResult tilt_mean_check(const GffSampler& sampler,
                                const std::vector<double>& delta,
                                std::size_t samples, Rng& rng,
                                double z_threshold) {
  if (delta.size() != sampler.ambient_vertices()) {
    throw ConfigError("gff: tilt vector has wrong size");
  }
  const auto& support = sampler.support();
  const auto n = static_cast<Eigen::Index>(support.size());
  Eigen::VectorXd d(n);
  {
    std::vector<char> on_support(delta.size(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      d[i] = delta[support[static_cast<std::size_t>(i)]];
      on_support[support[static_cast<std::size_t>(i)]] = 1;
    }
    for (std::size_t v = 0; v < delta.size(); ++v) {
      if (!on_support[v] && delta[v] != 0.0) {
        throw ConfigError("gff: tilt vector must vanish off the support");
      }
    }
  }
  const Eigen::VectorXd predicted = sampler.covariance() * d;
  const double quad = d.dot(predicted);  // delta^T G delta

  if (samples < 2) throw ConfigError("gff: tilt check needs >= 2 samples");
  std::vector<Eigen::VectorXd> fields;
  fields.reserve(samples);
  std::vector<double> logw(samples);
  double logw_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    fields.push_back(sampler.sample_support(rng));
    logw[k] = d.dot(fields.back()) - 0.5 * quad;
    logw_max = std::max(logw_max, logw[k]);
  }
  KahanSum wsum, w2sum;
  std::vector<double> w(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    w[k] = std::exp(logw[k] - logw_max);
    wsum.add(w[k]);
    w2sum.add(w[k] * w[k]);
  }
  TiltCheckResult res;
  res.samples = samples;
  res.coords = static_cast<std::size_t>(n);
  res.ess = wsum.value() * wsum.value() / w2sum.value();

  // Self-normalized importance-sampling estimate with a delta-method
  // standard error per coordinate.
  for (Eigen::Index i = 0; i < n; ++i) {
    KahanSum num;
    for (std::size_t k = 0; k < samples; ++k) num.add(w[k] * fields[k][i]);
    const double est = num.value() / wsum.value();
    KahanSum dev;
    for (std::size_t k = 0; k < samples; ++k) {
      const double r = w[k] * (fields[k][i] - est);
      dev.add(r * r);
    }
    const double se = std::sqrt(dev.value()) / wsum.value();
    if (se > 0.0) {
      res.max_abs_z = std::max(res.max_abs_z, std::abs(est - predicted[i]) / se);
    } else if (est != predicted[i]) {
      res.max_abs_z = std::numeric_limits<double>::infinity();
    }
  }
  res.pass = res.ess >= 100.0 && res.max_abs_z <= z_threshold;
  return res;
}

bool linearity_check(const GffSampler& sampler, double c, Rng& rng,
                     std::size_t samples) {
  if (!(c > 0.0)) throw ConfigError("gff: scale must be positive");
  GffSampler scaled(c * c * sampler.covariance(),
                    sampler.support(), sampler.ambient_vertices());
  const auto n = static_cast<Eigen::Index>(sampler.support().size());
  for (std::size_t k = 0; k < samples; ++k) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    const Eigen::VectorXd a = sampler.transform(z) * c;
    const Eigen::VectorXd b = scaled.transform(z);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::uint64_t ba, bb;
      static_assert(sizeof(double) == sizeof(std::uint64_t));
      std::memcpy(&ba, &a[i], sizeof ba);
      std::memcpy(&bb, &b[i], sizeof bb);
      if (ba != bb) return false;
    }
  }
  return true;
}

}  // namespace ltlab
