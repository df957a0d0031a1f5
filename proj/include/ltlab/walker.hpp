#pragma once

// Continuous-time random walks on conductance networks.
//
// At vertex x the walk holds for Exp(rate[x]) and jumps to neighbor y with
// probability W_xy / rate[x]. Local times are occupation times in the holding
// clock, so sum_x l_x == tau exactly up to compensated-summation error.
//
// Determinism contract: a run is a pure function of (graph, start, master
// seed, replica). Each replica draws from its own counter-based stream.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltlab/lattice.hpp"
#include "ltlab/numeric.hpp"
#include "ltlab/rng.hpp"

namespace ltlab {

struct WalkLimits {
  std::uint64_t max_jumps = 2'000'000'000ull;
};

struct LocalTimeField {
  std::vector<double> ltime;       // dense over graph vertices
  std::vector<VertexId> visited;   // first-visit order, interior sites only
  double tau = 0.0;                // total elapsed time
  VertexId stop_vertex = kNoVertex;  // boundary vertex reached, or the pin
  std::uint64_t jumps = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t replica = 0;

  void attach(const Graph& g) { ltime.assign(g.n(), 0.0); visited.clear(); }
  // Zeroes only the touched entries; cheap enough to call per replica.
  void reset();
  double at(VertexId v) const { return ltime[v]; }
};

// Runs from `start` (must be interior) until the first entry to a boundary
// vertex of `domain`. No local time accrues at the exit vertex. If `path` is
// given it receives the full vertex sequence including start and exit.
void run_until_exit(const Graph& g, const Domain& domain, VertexId start,
                    std::uint64_t master_seed, std::uint64_t replica,
                    LocalTimeField& field, std::vector<VertexId>* path = nullptr,
                    const WalkLimits& limits = {});

// Runs on the whole finite graph until the local time at x0 reaches u > 0
// exactly (the final holding interval at x0 is truncated at the boundary of
// the memoryless clock, so l_{x0} == u holds with equality).
void run_until_local_time(const Graph& g, VertexId x0, double u, VertexId start,
                          std::uint64_t master_seed, std::uint64_t replica,
                          LocalTimeField& field, const WalkLimits& limits = {});

// Poissonized planar jump walk: identical engine on the box built from the
// step law (holding Exp(1), displacement ~ p). The exit vertex keeps the
// overshoot coordinates.
void run_step_walk_2d(const LatticeBox& step_box, VertexId start,
                      std::uint64_t master_seed, std::uint64_t replica,
                      LocalTimeField& field, std::vector<VertexId>* path = nullptr,
                      const WalkLimits& limits = {});

// Transient walk observed through a finite horizon box (d >= 3): local times
// inside the horizon before the walk leaves it. Horizon truncation bias on
// mean local times is O(R^{2-d}).
void run_to_infinity(const LatticeBox& horizon_box, std::uint64_t master_seed,
                     std::uint64_t replica, LocalTimeField& field,
                     const WalkLimits& limits = {});

// Inter-target excursion count. With s_0 the first entry to any target and
// s_p the first later entry to a target different from the one entered at
// s_{p-1}, the statistic is max{p : s_p happens before the path ends}; a path
// that never meets a target yields no value. Targets must be pairwise
// distinct. The first-visit order (indices into `targets`) is also reported.
struct ExcursionRecord {
  std::optional<std::int64_t> count;       // empty when no target is hit
  std::vector<std::size_t> first_visit_order;
};
ExcursionRecord excursion_statistic(std::span<const VertexId> path,
                                    std::span<const VertexId> targets);

// Replica summary row for CSV export.
struct WalkSummary {
  std::uint64_t replica = 0;
  double tau = 0.0;
  std::uint64_t jumps = 0;
  VertexId stop_vertex = kNoVertex;
};

// Deterministic CSV writers (fixed %.17g formatting, canonical row order).
void export_walk_summaries(const std::string& path, const Graph& g,
                           std::span<const WalkSummary> rows);
void export_local_times(const std::string& path, const Graph& g,
                        const LocalTimeField& field);

}  // namespace ltlab
