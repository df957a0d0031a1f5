#pragma once

// Discrete Gaussian free field samplers.
//
// A centred Gaussian vector with covariance G, where G is the Green
// operator of a killed walk, is sampled as phi = L z with L the lower
// Cholesky factor of G and z i.i.d. standard normals.  Two boundary
// conditions are supported:
//
//   * Dirichlet: G is the zero-boundary Green operator of a domain; the
//     field lives on the interior and vanishes on the boundary.
//   * Pinned: the walk on a finite connected graph is killed on first
//     hitting a single vertex x0; the field lives on V \ {x0} and
//     vanishes at x0.  This is the covariance appearing in the
//     generalized second Ray-Knight identity.
//
// Samplers hand back full-size vectors indexed by graph vertex id, with
// zeros at killed vertices, so downstream code can mix field values and
// local times without index translation.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ltlab/green.hpp"
#include "ltlab/lattice.hpp"
#include "ltlab/rng.hpp"

namespace ltlab {

class GffSampler {
 public:
  // Takes the covariance matrix over `support` (vertex ids of the free
  // coordinates) and the total vertex count of the ambient graph.
  // Throws ConfigError if the covariance is not positive definite.
  GffSampler(Eigen::MatrixXd covariance, std::vector<VertexId> support,
             std::size_t ambient_vertices);

  // Ambient-size sample; entries off the support are exactly zero.
  std::vector<double> sample(Rng& rng) const;

  // Sample restricted to the support, in support order.
  Eigen::VectorXd sample_support(Rng& rng) const;

  // Maps i.i.d. standard normals to a field sample (lower Cholesky factor
  // applied to z).  Exposed so checks can couple two samplers on the same
  // normal draws.
  Eigen::VectorXd transform(const Eigen::VectorXd& z) const;

  const std::vector<VertexId>& support() const { return support_; }
  std::size_t ambient_vertices() const { return ambient_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  double covariance_at(VertexId x, VertexId y) const;

  // Variance of phi(x); zero off the support.
  double variance(VertexId x) const;

 private:
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;  // lower factor
  std::vector<VertexId> support_;
  std::vector<std::int64_t> support_index_;  // vertex id -> row, -1 off support
  std::size_t ambient_ = 0;
};

// Field with the zero-boundary Green operator of `green` as covariance.
GffSampler make_dirichlet_sampler(const GreenOperator& green,
                                  std::size_t ambient_vertices);

// Field on V \ {x0} for the walk on `g` killed at x0.  The graph must be
// connected and have at most `budget.max_dense_vertices` vertices.
GffSampler make_pinned_sampler(const Graph& g, VertexId x0,
                               std::size_t max_dense_vertices = kDenseGreenBudget);

struct TiltCheckResult {
  // Exponential tilt by exp(<delta, phi> - delta^T G delta / 2) shifts the
  // mean of phi by G delta.  Each supported coordinate is compared against
  // its prediction with a z-statistic; `max_abs_z` is the worst one.
  double max_abs_z = 0.0;
  double ess = 0.0;  // effective sample size (sum w)^2 / sum w^2
  std::size_t samples = 0;
  std::size_t coords = 0;
  bool pass = false;
};

// Importance-sampling check of the tilt formula.  `delta` is ambient-size;
// entries off the support must be zero.  Requires ESS >= 100 or the check
// is reported failed regardless of the z-statistics (the comparison would
// be too noisy to mean anything).
TiltCheckResult tilt_mean_check(const GffSampler& sampler,
                                const std::vector<double>& delta,
                                std::size_t samples, Rng& rng,
                                double z_threshold);

// Scaling check: with the same normal draws, the field sampled from
// covariance c^2 G must equal c times the field sampled from G, exactly
// in floating point.  Returns true when all coordinates match bitwise.
bool linearity_check(const GffSampler& sampler, double c, Rng& rng,
                     std::size_t samples);

}  // namespace ltlab
