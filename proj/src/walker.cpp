#include "ltlab/walker.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <unordered_set>

namespace ltlab {

void LocalTimeField::reset() {
  for (VertexId v : visited) ltime[v] = 0.0;
  if (stop_vertex != kNoVertex && stop_vertex < static_cast<VertexId>(ltime.size()))
    ltime[stop_vertex] = 0.0;
  visited.clear();
  tau = 0.0;
  stop_vertex = kNoVertex;
  jumps = 0;
}

namespace {

// One jump of the conductance walk: returns the sampled neighbor of v.
inline VertexId sample_jump(const Graph& g, VertexId v, Rng& rng) {
  const auto nbrs = g.neighbors(v);
  const auto ws = g.edge_weights(v);
  const double r = rng.uniform() * g.rate[v];
  double cum = 0.0;
  for (std::size_t e = 0; e + 1 < nbrs.size(); ++e) {
    cum += ws[e];
    if (r < cum) return nbrs[e];
  }
  return nbrs.back();
}

inline void touch(LocalTimeField& field, VertexId v, double h) {
  if (field.ltime[v] == 0.0) field.visited.push_back(v);
  field.ltime[v] += h;
}

}  // namespace

void run_until_exit(const Graph& g, const Domain& domain, VertexId start,
                    std::uint64_t master_seed, std::uint64_t replica,
                    LocalTimeField& field, std::vector<VertexId>* path,
                    const WalkLimits& limits) {
  if (start < 0 || start >= g.n() || !domain.is_interior(start))
    throw ConfigError("run_until_exit: start must be an interior vertex");
  if (field.ltime.size() != static_cast<std::size_t>(g.n()))
    field.attach(g);
  else
    field.reset();
  field.master_seed = master_seed;
  field.replica = replica;
  Rng rng(master_seed, StreamPurpose::Walk, replica);
  if (path) {
    path->clear();
    path->push_back(start);
  }
  KahanSum tau;
  VertexId v = start;
  while (true) {
    const double h = rng.exponential(1.0 / g.rate[v]);
    touch(field, v, h);
    tau.add(h);
    const VertexId u = sample_jump(g, v, rng);
    ++field.jumps;
    if (field.jumps > limits.max_jumps)
      throw ResourceLimitError("run_until_exit: jump limit exceeded");
    if (path) path->push_back(u);
    if (!domain.is_interior(u)) {
      field.stop_vertex = u;
      break;
    }
    v = u;
  }
  field.tau = tau.value();
}

void run_until_local_time(const Graph& g, VertexId x0, double u, VertexId start,
                          std::uint64_t master_seed, std::uint64_t replica,
                          LocalTimeField& field, const WalkLimits& limits) {
  if (x0 < 0 || x0 >= g.n() || start < 0 || start >= g.n())
    throw ConfigError("run_until_local_time: vertex out of range");
  if (!(u > 0.0)) throw ConfigError("run_until_local_time: u must be positive");
  if (field.ltime.size() != static_cast<std::size_t>(g.n()))
    field.attach(g);
  else
    field.reset();
  field.master_seed = master_seed;
  field.replica = replica;
  Rng rng(master_seed, StreamPurpose::Walk, replica);
  KahanSum tau;
  VertexId v = start;
  while (true) {
    double h = rng.exponential(1.0 / g.rate[v]);
    if (v == x0 && field.ltime[x0] + h >= u) {
      // Truncate the final holding interval: the memoryless clock crosses u
      // inside it, so tau_u lands exactly at l_{x0} == u.
      h = u - field.ltime[x0];
      touch(field, v, h);
      tau.add(h);
      field.stop_vertex = x0;
      break;
    }
    touch(field, v, h);
    tau.add(h);
    v = sample_jump(g, v, rng);
    ++field.jumps;
    if (field.jumps > limits.max_jumps)
      throw ResourceLimitError("run_until_local_time: jump limit exceeded");
  }
  field.tau = tau.value();
  field.ltime[x0] = u;  // remove the last rounding ulp, the identity is exact
}

void run_step_walk_2d(const LatticeBox& step_box, VertexId start,
                      std::uint64_t master_seed, std::uint64_t replica,
                      LocalTimeField& field, std::vector<VertexId>* path,
                      const WalkLimits& limits) {
  if (step_box.d != 2) throw ConfigError("run_step_walk_2d: box is not planar");
  run_until_exit(step_box.graph, step_box.domain, start, master_seed, replica,
                 field, path, limits);
}

void run_to_infinity(const LatticeBox& horizon_box, std::uint64_t master_seed,
                     std::uint64_t replica, LocalTimeField& field,
                     const WalkLimits& limits) {
  if (horizon_box.d < 3)
    throw ConfigError("run_to_infinity: requires a transient lattice (d >= 3)");
  run_until_exit(horizon_box.graph, horizon_box.domain, horizon_box.origin,
                 master_seed, replica, field, nullptr, limits);
}

ExcursionRecord excursion_statistic(std::span<const VertexId> path,
                                    std::span<const VertexId> targets) {
  if (targets.empty()) throw ConfigError("excursion_statistic: no targets");
  std::unordered_set<VertexId> tset;
  for (VertexId t : targets)
    if (!tset.insert(t).second)
      throw ConfigError("excursion_statistic: duplicate target");

  ExcursionRecord rec;
  std::unordered_set<VertexId> seen;
  VertexId current = kNoVertex;
  std::int64_t count = -1;
  for (VertexId v : path) {
    if (!tset.contains(v) || v == current) continue;
    ++count;  // entry to a target different from the last-entered one
    current = v;
    if (!seen.contains(v)) {
      seen.insert(v);
      for (std::size_t i = 0; i < targets.size(); ++i)
        if (targets[i] == v) {
          rec.first_visit_order.push_back(i);
          break;
        }
    }
  }
  if (count >= 0) rec.count = count;
  return rec;
}

namespace {

void write_coords(std::FILE* f, const Graph& g, VertexId v) {
  if (g.dim == 0) return;
  for (int k = 0; k < g.dim; ++k)
    std::fprintf(f, ",%" PRId64, static_cast<std::int64_t>(g.coord(v, k)));
}

}  // namespace

void export_walk_summaries(const std::string& path, const Graph& g,
                           std::span<const WalkSummary> rows) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("cannot open for writing: " + path);
  std::fprintf(f, "replica,tau,jumps,stop_vertex");
  for (int k = 0; k < g.dim; ++k) std::fprintf(f, ",stop_x%d", k + 1);
  std::fprintf(f, "\n");
  for (const auto& r : rows) {
    std::fprintf(f, "%" PRIu64 ",%.17g,%" PRIu64 ",%d", r.replica, r.tau,
                 r.jumps, r.stop_vertex);
    if (r.stop_vertex != kNoVertex) write_coords(f, g, r.stop_vertex);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void export_local_times(const std::string& path, const Graph& g,
                        const LocalTimeField& field) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("cannot open for writing: " + path);
  std::fprintf(f, "replica,vertex");
  for (int k = 0; k < g.dim; ++k) std::fprintf(f, ",x%d", k + 1);
  std::fprintf(f, ",ltime\n");
  std::vector<VertexId> order(field.visited);
  std::sort(order.begin(), order.end());
  for (VertexId v : order) {
    std::fprintf(f, "%" PRIu64 ",%d", field.replica, v);
    write_coords(f, g, v);
    std::fprintf(f, ",%.17g\n", field.ltime[v]);
  }
  std::fclose(f);
}

}  // namespace ltlab
