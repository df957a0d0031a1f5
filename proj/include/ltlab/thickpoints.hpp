#pragma once

// Thick points of walk local-time fields and the rescaled point measures
// built from them.
//
// A site is a-thick when its local time at the exit time of the box of
// radius N is unusually large:
//
//   d = 2:    ell_x >= 2 a g_slope (log N)^2   (inclusive),
//   d >= 3:   ell_x >  2 g a log N             (strict),
//
// where g_slope is the slope constant of the recurrent potential kernel
// (2/pi for the simple planar walk, 1/(2 pi) in isoradial normalization)
// and g is the diagonal Green constant of the transient walk.  In the
// transient case the number of a-thick points grows like N^{2(1-a)}, so
// the natural object is the rescaled measure
//
//   nu_N^a = N^{-2(1-a)} sum_{x thick} delta_{x/N},
//
// a random measure on [-1,1]^d.  Its reference twin mu_N^a replaces the
// local times over the visited set by i.i.d. exponentials with the
// limiting mean g -- the marks the walk would produce if revisits
// decorrelated instantly.  Comparing nu against mu isolates how much of
// the thick-point structure is carried by the range alone.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ltlab/lattice.hpp"
#include "ltlab/walker.hpp"

namespace ltlab {

// Thresholds; N >= 2 so log N is bounded away from zero.
double thick_threshold_2d(double a, double g_slope, long N);
double thick_threshold_hd(double a, double g, long N);

struct ThickPointSet {
  double a = 0.0;
  double threshold = 0.0;
  std::vector<VertexId> vertices;
  std::vector<double> ltimes;

  std::size_t count() const { return vertices.size(); }
};

// Interior sites with ell >= threshold (recurrent convention).
ThickPointSet thick_set_2d(const LocalTimeField& field, const Domain& dom,
                           double a, double g_slope, long N);

// Visited sites with ell > threshold (transient convention).  Vertices are
// reported in increasing id order regardless of visit order.
ThickPointSet thick_set_hd(const LocalTimeField& field, double a, double g,
                           long N);

struct PointMeasure {
  int d = 0;
  long N = 0;
  double a = 0.0;
  double prefactor = 0.0;                      // N^{-2(1-a)}
  std::vector<std::array<double, 4>> points;   // site / N, first d coords
  std::vector<double> marks;                   // local time or exponential

  double total_mass() const {
    return prefactor * static_cast<double>(points.size());
  }
  // Closed sub-box of [-1,1]^d given as d (lo, hi) pairs.
  std::size_t count_in(const std::vector<std::pair<double, double>>& box) const;
  double mass_in(const std::vector<std::pair<double, double>>& box) const;
};

// Measure of a-thick points of the walk local times on `box`.
PointMeasure nu_measure(const LatticeBox& box, const LocalTimeField& field,
                        double a, double g);

// Reference measure: same visited set, marks replaced by i.i.d.
// exponentials of mean g.  Draws are attached to visited sites in
// increasing vertex-id order, so the result is independent of visit order
// and of how replicas were scheduled.
PointMeasure mu_measure(const LatticeBox& box, const LocalTimeField& field,
                        double a, double g, std::uint64_t master_seed,
                        std::uint64_t replica);

// Planar max statistic lambda_N = max_x ell_x / (log N)^2, which
// concentrates at 4/pi for the simple walk as N grows.
struct MaxLocalTime {
  double max_ltime = 0.0;
  VertexId argmax = kNoVertex;
  double lambda = 0.0;
};
MaxLocalTime max_local_time_2d(const LocalTimeField& field, const Domain& dom,
                               long N);

// Transient centered max: max_x ell_x - 2 g log N over visited sites,
// whose law converges to a Gumbel mixture.
double centered_max_hd(const LocalTimeField& field, double g, long N);

// One row per point: scaled coordinates then the mark.  %.17g columns.
void export_measure_csv(const PointMeasure& m, const std::string& path);

}  // namespace ltlab
