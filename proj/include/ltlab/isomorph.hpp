#pragma once

// Monte Carlo verification of local-time isomorphism identities.
//
// Two identities are checked, both equating a functional of walk local
// times plus an independent Gaussian free field with a functional of the
// field alone:
//
//   * Tilted-field identity (Eisenbaum).  For the walk started at x0 and
//     killed on exiting a domain, with phi the zero-boundary field and
//     s != 0:
//
//       E_{x0} x E[ f(ell + (phi + s)^2 / 2) ]
//           = E[ (1 + phi(x0)/s) f( (phi + s)^2 / 2 ) ].
//
//   * Second Ray-Knight identity.  For the walk on a finite connected
//     graph started at x0 and stopped when the local time at x0 reaches
//     u, with psi the field pinned at x0:
//
//       ell^{tau_u} + psi^2 / 2  =(law)=  (psi + sqrt(2u))^2 / 2.
//
// Both sides are estimated from independent replica pools and compared
// with two-sample z-statistics under a Bonferroni-adjusted threshold.
// Each harness also runs a negative control -- the same comparison with
// the identity deliberately broken -- and reports whether the control was
// detected; a harness too noisy to see the broken version proves nothing
// about the real one.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltlab/gff.hpp"
#include "ltlab/green.hpp"
#include "ltlab/lattice.hpp"
#include "ltlab/stats.hpp"
#include "vendor/json.hpp"

namespace ltlab {

enum class FunctionalKind { Polynomial, ExpDecay, BoxIndicator };

// A scalar functional of a nonnegative field indexed by vertex id.
//   Polynomial:   prod_i v[x_i]^{p_i}            (moments)
//   ExpDecay:     exp(-sum_i c_i v[x_i]), c_i>=0 (bounded Laplace probe)
//   BoxIndicator: prod_i 1{lo_i <= v[x_i] <= hi_i}
class TestFunctional {
 public:
  struct Term {
    VertexId vertex = 0;
    double a = 1.0;  // power / decay rate / box lower edge
    double b = 0.0;  // box upper edge (BoxIndicator only)
  };

  static TestFunctional polynomial(std::vector<std::pair<VertexId, int>> powers);
  static TestFunctional exp_decay(std::vector<std::pair<VertexId, double>> rates);
  static TestFunctional box_indicator(
      std::vector<std::tuple<VertexId, double, double>> boxes);

  double operator()(const std::vector<double>& field) const;
  FunctionalKind kind() const { return kind_; }
  const std::string& label() const { return label_; }

 private:
  TestFunctional(FunctionalKind kind, std::vector<Term> terms, std::string label)
      : kind_(kind), terms_(std::move(terms)), label_(std::move(label)) {}
  FunctionalKind kind_;
  std::vector<Term> terms_;
  std::string label_;
};

struct IdentityCheckRow {
  std::string label;
  double lhs_mean = 0.0, lhs_se = 0.0;
  double rhs_mean = 0.0, rhs_se = 0.0;
  double z = 0.0;         // two-sample z statistic
  double threshold = 0.0; // Bonferroni-adjusted
  bool pass = false;
};

struct IdentityReport {
  std::string identity;
  std::size_t replicas = 0;
  double base_z = 0.0;    // per-family threshold before adjustment
  std::vector<IdentityCheckRow> rows;
  bool control_detected = false;  // broken identity flagged by the harness
  bool pass = false;              // all rows pass AND control detected

  nlohmann::json to_json() const;
};

// Tilted-field identity on a domain.  `functionals` probe the field; a
// closed-form row for f(v) = v[x0] (both sides equal
// 3 G(x0,x0)/2 + s^2/2) is always included and each Monte Carlo side is
// additionally checked against that exact value.  base_z is the
// unadjusted threshold (e.g. 3.5); rows use bonferroni_z(base_z, #rows).
IdentityReport verify_eisenbaum(const Graph& g, const Domain& dom, VertexId x0,
                                double s,
                                const std::vector<TestFunctional>& functionals,
                                std::size_t replicas, std::uint64_t seed,
                                double base_z);

// Second Ray-Knight identity on a finite connected graph.  For each level
// u in `levels`, compares first and second moments of both sides at every
// vertex of V \ {x0}, Bonferroni-adjusted across all rows, and checks the
// exact mean E[ell_y^{tau_u}] = u (symmetric conductances make the
// stationary measure uniform, so every vertex accumulates mean local
// time exactly u).
IdentityReport verify_ray_knight(const Graph& g, VertexId x0,
                                 const std::vector<double>& levels,
                                 std::size_t replicas, std::uint64_t seed,
                                 double base_z);

struct DominationReport {
  // Coordinate-wise coupling bound: ell^{tau_u} <= (psi + sqrt(2u))^2 / 2
  // in distribution, jointly, so M = max_y sqrt(ell_y) is stochastically
  // dominated by max_y |psi_y + sqrt(2u)| / sqrt(2).  Empirically the
  // walk's CDF must sit above the field's up to twice the DKW band.
  double u = 0.0;
  std::size_t replicas = 0;
  double min_margin = 0.0;  // min_t [ F_walk(t) - F_field(t) ] over sample points
  double band = 0.0;        // eps_walk + eps_field at confidence 1 - alpha
  double alpha = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

DominationReport stochastic_domination_check(const Graph& g, VertexId x0,
                                             double u, std::size_t replicas,
                                             std::uint64_t seed, double alpha);

}  // namespace ltlab
