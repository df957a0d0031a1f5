#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace ltlab {

// Kahan compensated accumulator. Used wherever a long sum of holding times
// must reconcile with per-site totals (sum_x l_x == tau to ~1e-12 relative
// even after 1e8 additions).
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

// Mean and standard error via a single compensated pass plus a second pass
// for the centered moments (two-pass is the numerically safe default here).
inline MeanSe mean_se(std::span<const double> xs) {
  MeanSe r;
  r.n = xs.size();
  if (r.n == 0) return r;
  KahanSum s;
  for (double x : xs) s.add(x);
  r.mean = s.value() / static_cast<double>(r.n);
  if (r.n == 1) return r;
  KahanSum ss;
  for (double x : xs) {
    const double d = x - r.mean;
    ss.add(d * d);
  }
  r.sd = std::sqrt(ss.value() / static_cast<double>(r.n - 1));
  r.se = r.sd / std::sqrt(static_cast<double>(r.n));
  return r;
}

}  // namespace ltlab
