#pragma once

// Finite conductance networks the walks and fields live on.
//
// A Graph is CSR adjacency with one symmetric conductance per edge; the
// continuous-time walk at x waits Exp(rate[x]) with rate[x] = sum_y W_xy and
// jumps to y with probability W_xy / rate[x].
//
// A Domain splits vertices into an interior and an absorbing boundary that is
// exactly the one-jump exterior of the interior. Box builders materialize the
// boundary halo explicitly so "exit" always means "first entry to a boundary
// vertex".

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltlab/errors.hpp"

namespace ltlab {

using VertexId = std::int32_t;
inline constexpr VertexId kNoVertex = -1;

struct Graph {
  int dim = 0;                       // lattice coordinate dimension (0 = none)
  std::vector<std::int64_t> coords;  // dim entries per vertex when dim > 0
  std::vector<double> xy;            // 2 entries per vertex (planar embeddings)
  std::vector<std::uint64_t> adj_off;
  std::vector<VertexId> adj;
  std::vector<double> weight;  // conductance per directed edge copy
  std::vector<double> rate;    // total rate out of each vertex

  int n() const { return static_cast<int>(rate.size()); }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {adj.data() + adj_off[v], adj.data() + adj_off[v + 1]};
  }
  std::span<const double> edge_weights(VertexId v) const {
    return {weight.data() + adj_off[v], weight.data() + adj_off[v + 1]};
  }
  std::int64_t coord(VertexId v, int k) const {
    return coords[static_cast<std::size_t>(v) * dim + k];
  }

  // Checks W_xy == W_yx, positive weights, rate consistency; throws on
  // violation. Builders call this before returning.
  void validate() const;
};

struct Domain {
  std::vector<std::uint8_t> interior_mask;  // per vertex of the host graph
  std::vector<VertexId> interior;           // canonical (ascending id) order
  std::vector<VertexId> boundary;           // exactly the one-jump exterior
  std::vector<std::int32_t> interior_index;  // vertex -> dense index, -1 outside

  std::size_t interior_count() const { return interior.size(); }
  bool is_interior(VertexId v) const { return interior_mask[v] != 0; }
};

// Interior = vertices with mask true; boundary = non-interior vertices
// adjacent to the interior. Throws if an interior vertex has no edges.
Domain make_domain(const Graph& g, const std::vector<std::uint8_t>& mask);

// Interior = closed graph-distance ball B(center, radius); boundary is its
// one-jump exterior. Monotone in radius by construction.
Domain ball_domain(const Graph& g, VertexId center, long radius);

// All vertices interior, empty boundary (walks on the whole finite graph).
Domain whole_graph_domain(const Graph& g);

enum class RateModel {
  UnitTotal,     // total rate 1, uniform neighbor choice (W = 1/(2d) per edge)
  Conductance,   // W = 1 per lattice edge, total rate = degree
};

struct Budget {
  std::size_t max_vertices = 8'000'000;
};

// Axis box {-N..N}^d plus its one-jump exterior. Interior vertices come first
// in row-major coordinate order, so interior index == vertex id.
struct LatticeBox {
  Graph graph;
  Domain domain;
  int d = 0;
  long N = 0;
  VertexId origin = kNoVertex;

  VertexId vertex_at(std::span<const long> x) const;

 private:
  friend LatticeBox build_box(int, long, RateModel, const Budget&);
  friend struct StepDistribution;
  friend LatticeBox build_step_box(const struct StepDistribution&, long,
                                   const Budget&);
  std::unordered_map<std::uint64_t, VertexId> halo_lookup_;
};

LatticeBox build_box(int d, long N, RateModel rate_model = RateModel::UnitTotal,
                     const Budget& budget = {});

// Symmetric step law for the two-dimensional jump walk, together with its
// covariance matrix Sigma = sum_s p(s) s s^T.
struct StepDistribution {
  std::vector<std::array<long, 2>> steps;
  std::vector<double> prob;
  std::array<std::array<double, 2>, 2> cov{{{0, 0}, {0, 0}}};

  double det_cov() const { return cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0]; }

  // Validates: probabilities positive and summing to 1 within 1e-12, support
  // symmetric with p(s) == p(-s), no zero step. Throws ConfigError otherwise.
  static StepDistribution make(std::vector<std::array<long, 2>> steps,
                               std::vector<double> prob);
  static StepDistribution nearest_neighbor();
};

// Box for a Poissonized step walk: interior {-N..N}^2, W_{x,x+s} = p(s),
// boundary = every out-of-box point reachable in one jump (overshoot kept).
LatticeBox build_step_box(const StepDistribution& sd, long N,
                          const Budget& budget = {});

// Isoradial graphs: planar embeddings with one rhombus half-angle per edge and
// conductance tan(theta). Presets cover the three regular tilings.
inline constexpr double kIsoradialEllipticityDefault = 0.05;

Graph isoradial_square(long L);      // theta = pi/4, W = 1
Graph isoradial_triangular(long L);  // theta = pi/6, W = 1/sqrt(3)
Graph isoradial_hexagonal(long L);   // theta = pi/3, W = sqrt(3)

// Text format, one record per line:
//   V <id> <x> <y>
//   E <id1> <id2> <theta>
// '#' starts a comment. Vertex ids must be dense after sorting; every theta
// must lie in (eta, pi/2 - eta). Throws ConfigError on violations.
Graph parse_isoradial(const std::string& text,
                      double eta = kIsoradialEllipticityDefault);
Graph load_isoradial(const std::string& path,
                     double eta = kIsoradialEllipticityDefault);

// Restriction to the interior of a domain: keeps interior vertices (renumbered
// in domain order) and edges with both ends interior. Rates are recomputed, so
// the result is the finite network (V_N, E_N) itself, not a killed walk.
Graph induced_subgraph(const Graph& g, const Domain& dom,
                       std::vector<VertexId>* old_to_new = nullptr);

}  // namespace ltlab
