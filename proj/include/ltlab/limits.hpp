#pragma once

// Limit laws for thick-point statistics.
//
// In the transient regime every limit object is driven by a single random
// scalar: tau, the exit time of a Brownian motion from the cube, in the
// diffusive normalization matched to the unit-total-rate walk (the walk's
// clock runs a factor d faster than the standard Brownian one, so
// tau = d * tau_std).  A reusable bank of Monte Carlo tau samples feeds
//
//   * the subcritical mass law        M_a  =(law)=  tau / g,
//   * the critical count distribution P(K = k) = E[ e^{-tau/g} (tau/g)^k / k! ],
//   * the centered-max Gumbel mixture P(L <= t) = E[ exp(-(tau/g) e^{-t/g}) ].
//
// The k-th moment of the subcritical mass on a region A has a closed
// chain-integral form: a sum over permutations of k points of products of
// continuum Green factors |y_i - y_j|^{2-d} - q(y_i, y_j) rooted at the
// origin, scaled by (a_d/g)^k.  It is estimated here by Monte Carlo with
// fresh walk-on-spheres harmonic averages per factor, which keeps every
// factor unbiased and independent inside each product.
//
// Combinatorial helpers (partition counts, Poisson moments, Erlang tails)
// used by the moment computations are exact and overflow-checked.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ltlab/numeric.hpp"

namespace ltlab {

// Number of ways to partition k labeled draws into q nonempty unlabeled
// blocks; S(k,q) = q S(k-1,q) + S(k-1,q-1).  Throws OverflowError when the
// count exceeds 64 bits.
std::uint64_t stirling_partition(int k, int q);

// E[X^k] for X ~ Poisson(lambda): sum_q S(k,q) lambda^q.
double poisson_moment(int k, double lambda);

// P(Erlang(k, theta) > T) = e^{-T/theta} sum_{j<k} (T/theta)^j / j!.
double erlang_tail(int k, double theta, double T);

// Product-of-tails bound: P(Erlang(k,theta) > T)^p is dominated by the
// single tail P(Erlang(p(k-1)+1, theta) > pT).  Both sides are returned so
// callers can assert the ordering with exact values.
struct GammaTailBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
GammaTailBound gamma_tail_bound(int k, int p, double theta, double T);

// Bank of Brownian cube exit times.  `tau` carries the walk-matched
// normalization d * tau_raw; `tau_raw` is the standard-Brownian time.
struct TauSampleBank {
  int d = 0;
  double dt = 0.0;
  std::vector<double> tau;      // scaled: d * tau_raw
  std::vector<double> tau_raw;
  std::vector<double> z;        // n * d exit positions

  std::size_t size() const { return tau_raw.size(); }
  std::vector<double> tau_over_g(double g) const;
  MeanSe tau_mean() const;      // of the scaled times
};

TauSampleBank sample_tau_bank(int d, std::size_t n, double dt,
                              std::uint64_t seed, int threads = 1);

// stem.bin + stem.json with an fnv1a64 checksum; load verifies it.
void save_tau_bank(const TauSampleBank& bank, const std::string& stem);
TauSampleBank load_tau_bank(const std::string& stem);

// Bank averages; se is the Monte Carlo standard error over the bank.
MeanSe subcritical_mass_cdf(double t, const TauSampleBank& bank, double g);
MeanSe critical_count_pmf(int k, const TauSampleBank& bank, double g);
MeanSe gumbel_cdf(double t, const TauSampleBank& bank, double g);

struct MMomentResult {
  int k = 0;
  double value = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
};

// Monte Carlo estimate of the k-th chain-integral moment of the
// subcritical mass on `region` (a closed sub-box of [-1,1]^d given as d
// (lo, hi) pairs).  `wos_samples` exit draws back each harmonic average;
// k <= 6 keeps the permutation sum tractable.  For k = 1 on the full cube
// the value must agree with E[tau]/g.  An optional time window (lo, hi)
// multiplies the moment by (e^{-lo/g} - e^{-hi/g})^k, the weight of marks
// conditioned into that window.
MMomentResult m_moment(int k, int d,
                       const std::vector<std::pair<double, double>>& region,
                       double g, std::size_t mc_samples,
                       std::size_t wos_samples, std::uint64_t seed,
                       int threads = 1,
                       const std::pair<double, double>* time_window = nullptr);

}  // namespace ltlab
