#pragma once

// Green operators of killed conductance walks and their continuum limits.
//
// On the interior, G = (-L)^{-1} with (Lf)(x) = sum_y W_xy (f(y) - f(x)) and
// f = 0 on the boundary; equivalently G(x,y) is the expected local time at y
// before exit when starting at x. G is symmetric positive definite and doubles
// as the covariance of the zero-boundary Gaussian field.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ltlab/lattice.hpp"
#include "ltlab/rng.hpp"
#include "ltlab/stats.hpp"

namespace ltlab {

inline constexpr std::size_t kDenseGreenBudget = 20000;

struct GreenOperator {
  Eigen::MatrixXd G;                       // dense, interior-indexed
  std::vector<VertexId> interior;          // dense index -> vertex id
  std::vector<std::int32_t> interior_index;  // vertex id -> dense index or -1
  double residual_max = 0.0;  // ||(-L)G - I||_max measured after the solve
  double sym_error = 0.0;     // max |G - G^T| entry

  double at(VertexId x, VertexId y) const {
    return G(interior_index[x], interior_index[y]);
  }
  std::size_t n() const { return interior.size(); }
};

// Dense factorization route. Throws ResourceLimitError when the interior
// exceeds `budget`, ConfigError when the interior is disconnected (the
// operator is then singular on a component with no boundary attachment).
GreenOperator exact_green(const Graph& g, const Domain& domain,
                          std::size_t budget = kDenseGreenBudget);

// Single column G(., y) by conjugate gradients on the same operator,
// matrix-free; for interiors past the dense budget. Relative residual of the
// returned column is at most `tol`.
Eigen::VectorXd green_column(const Graph& g, const Domain& domain, VertexId y,
                             double tol = 1e-12, std::size_t max_iter = 200000);

// Exact diagonal of the box Green operator from the sine eigenbasis of the
// box generator (axis boxes with a constant-rate model only). Values are
// indexed like box interior vertices. Cross-validated against exact_green in
// the tests; used where the dense route does not fit.
std::vector<double> box_green_diagonal_spectral(int d, long N,
                                                RateModel rate_model);

// Killing constant of the transient unit-rate walk: expected total local time
// at the start, g = int_0^inf (e^{-x} I_0(x/d))^d-type Bessel integral over
// the dual torus. quad_error receives a bound combining panel refinement and
// tail truncation. Requires d >= 3.
double lattice_green_constant(int d, double* quad_error = nullptr);

// Continuum Green prefactor a_d = (d/2) Gamma(d/2 - 1) pi^{-d/2}, d >= 3.
double a_d_constant(int d);

// One Euler-Maruyama sample of the standard-Brownian exit from [-1,1]^d:
// exit position (clamped to the boundary) and raw exit time (step count * dt,
// O(sqrt(dt)) bias). The diffusive clock of the unit-rate walk runs d times
// slower, so walk-limit laws use d * tau_raw.
struct BrownianExitSample {
  std::array<double, 4> z{0, 0, 0, 0};
  double tau_raw = 0.0;
};
inline constexpr double kBrownianDtDefault = 1e-4;
BrownianExitSample sample_brownian_exit(int d, std::span<const double> x0,
                                        double dt, Rng& rng);

// Exit location only, by walk on spheres: jump to a uniform point on the
// largest sphere inside the cube, absorb once within `eps` of the boundary
// and project to the nearest face.  Exact in law up to the eps shell and
// orders of magnitude faster than Euler stepping, but carries no exit
// time.  Used where the source point changes on every call.
std::array<double, 4> wos_exit_point(int d, std::span<const double> x0,
                                     double eps, Rng& rng);

// Bank of exit samples from a fixed source; the empirical harmonic-measure
// average q(x, y) = E[ |y - Z|^{2-d} ] is read off it.
struct HarmonicBank {
  int d = 0;
  double dt = 0.0;
  std::array<double, 4> x0{0, 0, 0, 0};
  std::vector<double> z;        // n * d exit positions
  std::vector<double> tau_raw;  // n raw exit times

  std::size_t size() const { return tau_raw.size(); }
  double q_at(std::span<const double> y, double* se = nullptr) const;
};

HarmonicBank sample_harmonic_bank(int d, std::span<const double> x0,
                                  std::size_t n, double dt, std::uint64_t seed,
                                  int threads = 1);

// Cache of harmonic banks keyed by source position snapped to a grid whose
// cells keep snapping error below `snap_tol` (banks are expensive; nearby
// sources share one). Bank streams derive from the snapped key, so results do
// not depend on request order.
class QKernel {
 public:
  QKernel(int d, std::size_t bank_n, double dt, std::uint64_t seed,
          double snap_tol = 0.02, int threads = 1);

  double q(std::span<const double> x, std::span<const double> y,
           double* se = nullptr);
  const HarmonicBank& bank(std::span<const double> x);
  std::size_t bank_count() const { return banks_.size(); }
  int dimension() const { return d_; }

  void export_bank_csv(const std::string& path, std::span<const double> x);

 private:
  using Key = std::array<std::int32_t, 4>;
  Key snap(std::span<const double> x) const;

  int d_;
  std::size_t bank_n_;
  double dt_;
  std::uint64_t seed_;
  double cell_;
  int threads_;
  std::map<Key, HarmonicBank> banks_;
};

// A graph + domain + distinguished center, as produced per size by the slope
// checks' builder callbacks.
struct BuiltDomain {
  Graph graph;
  Domain domain;
  VertexId center = kNoVertex;
};

// Fits G_N(x0,x0) against log N across sizes. For planar walks the slope
// tends to 1/(pi sqrt(det Sigma)) (1/(2 pi) for isoradial conductances).
struct SlopeCheckResult {
  std::vector<long> sizes;
  std::vector<double> diag;
  LinearFit fit;
};
SlopeCheckResult potential_slope_check_2d(
    const std::function<BuiltDomain(long)>& build, std::span<const long> sizes);

// Report-only margins for the structural assumptions a domain is supposed to
// satisfy (symmetry, ellipticity ratio, diagonal Green bound, connectivity).
struct GreenAudit {
  std::size_t interior = 0;
  bool connected = false;
  double min_conductance = 0.0;
  double max_conductance = 0.0;
  double conductance_ratio = 0.0;
  double min_rate = 0.0;
  double max_rate = 0.0;
  double max_diag = 0.0;
  double diag_bound = 0.0;
  double diag_margin = 0.0;  // diag_bound - max_diag (negative = violated)

  std::string to_json() const;
};
GreenAudit audit_green_assumptions(const Graph& g, const Domain& domain,
                                   double diag_bound,
                                   std::size_t budget = kDenseGreenBudget);

// Binary export (row-major float64) with a JSON sidecar carrying shape and an
// FNV-1a checksum; load verifies the checksum.
void save_green(const std::string& path_base, const GreenOperator& op);
GreenOperator load_green(const std::string& path_base);

}  // namespace ltlab
