#include "ltlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

namespace ltlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Exact 16-bit packing per coordinate; coordinates stay well below 2^15 for
// every supported box (d <= 4).
std::uint64_t pack_coords(std::span<const long> x) {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long v = x[i] + 32768;
    if (v < 0 || v > 65535) throw ResourceLimitError("coordinate out of packing range");
    key |= static_cast<std::uint64_t>(v) << (16 * i);
  }
  return key;
}

}  // namespace

void Graph::validate() const {
  const int nv = n();
  if (adj_off.size() != static_cast<std::size_t>(nv) + 1)
    throw ConfigError("graph: offset table size mismatch");
  for (VertexId v = 0; v < nv; ++v) {
    double total = 0.0;
    for (std::size_t e = adj_off[v]; e < adj_off[v + 1]; ++e) {
      const VertexId u = adj[e];
      const double w = weight[e];
      if (u < 0 || u >= nv) throw ConfigError("graph: edge endpoint out of range");
      if (u == v) throw ConfigError("graph: self loop");
      if (!(w > 0.0)) throw ConfigError("graph: nonpositive conductance");
      total += w;
      // reverse edge with identical weight must exist (scan of u's short row)
      bool found = false;
      for (std::size_t f = adj_off[u]; f < adj_off[u + 1]; ++f) {
        if (adj[f] == v) {
          if (weight[f] != w) throw ConfigError("graph: asymmetric conductance");
          found = true;
          break;
        }
      }
      if (!found) throw ConfigError("graph: missing reverse edge");
    }
    if (std::abs(total - rate[v]) > 1e-12 * std::max(1.0, std::abs(rate[v])))
      throw ConfigError("graph: rate does not match sum of conductances");
  }
}

Domain make_domain(const Graph& g, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != static_cast<std::size_t>(g.n()))
    throw ConfigError("make_domain: mask size mismatch");
  Domain d;
  d.interior_mask = mask;
  d.interior_index.assign(g.n(), -1);
  for (VertexId v = 0; v < g.n(); ++v) {
    if (!mask[v]) continue;
    if (g.adj_off[v + 1] == g.adj_off[v])
      throw ConfigError("make_domain: isolated interior vertex");
    d.interior_index[v] = static_cast<std::int32_t>(d.interior.size());
    d.interior.push_back(v);
  }
  std::vector<std::uint8_t> on_boundary(g.n(), 0);
  for (VertexId v : d.interior)
    for (VertexId u : g.neighbors(v))
      if (!mask[u]) on_boundary[u] = 1;
  for (VertexId v = 0; v < g.n(); ++v)
    if (on_boundary[v]) d.boundary.push_back(v);
  return d;
}

Domain ball_domain(const Graph& g, VertexId center, long radius) {
  if (center < 0 || center >= g.n()) throw ConfigError("ball_domain: bad center");
  std::vector<long> dist(g.n(), -1);
  std::deque<VertexId> queue{center};
  dist[center] = 0;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    if (dist[v] >= radius) continue;
    for (VertexId u : g.neighbors(v))
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
  }
  std::vector<std::uint8_t> mask(g.n(), 0);
  for (VertexId v = 0; v < g.n(); ++v)
    if (dist[v] >= 0 && dist[v] <= radius) mask[v] = 1;
  return make_domain(g, mask);
}

Domain whole_graph_domain(const Graph& g) {
  return make_domain(g, std::vector<std::uint8_t>(g.n(), 1));
}

VertexId LatticeBox::vertex_at(std::span<const long> x) const {
  if (static_cast<int>(x.size()) != d) throw ConfigError("vertex_at: wrong dimension");
  bool inside = true;
  for (long xi : x) inside = inside && (xi >= -N && xi <= N);
  if (inside) {
    const long side = 2 * N + 1;
    long id = 0;
    for (int i = 0; i < d; ++i) id = id * side + (x[i] + N);
    return static_cast<VertexId>(id);
  }
  const auto it = halo_lookup_.find(pack_coords(x));
  return it == halo_lookup_.end() ? kNoVertex : it->second;
}

namespace {

// Shared two-pass CSR assembly for boxes. `targets` enumerates, for interior
// vertex index i, the coordinate offsets and conductances of its jumps.
struct BoxEdgeModel {
  std::vector<std::array<long, 4>> offsets;  // padded to 4 coordinates
  std::vector<double> w;
};

LatticeBox assemble_box(int d, long N, const BoxEdgeModel& model,
                        const Budget& budget,
                        std::unordered_map<std::uint64_t, VertexId>& lookup) {
  if (d < 1 || d > 4) throw ConfigError("box dimension must be in 1..4");
  if (N < 0) throw ConfigError("box radius must be >= 0");
  const long side = 2 * N + 1;
  double size_check = 1.0;
  for (int i = 0; i < d; ++i) size_check *= static_cast<double>(side);
  if (size_check > static_cast<double>(budget.max_vertices))
    throw ResourceLimitError("box exceeds vertex budget: (2N+1)^d = " +
                             std::to_string(size_check));
  std::int64_t n_int = 1;
  for (int i = 0; i < d; ++i) n_int *= side;

  LatticeBox box;
  box.d = d;
  box.N = N;
  const std::size_t deg = model.offsets.size();

  // Pass 1: discover halo vertices in deterministic scan order.
  std::vector<long> x(d, -N);
  std::vector<long> t(d);
  std::vector<std::int64_t> halo_coords;
  lookup.clear();
  std::vector<std::uint32_t> halo_degree;
  const auto advance = [&]() {
    for (int i = d - 1; i >= 0; --i) {
      if (++x[i] <= N) return true;
      x[i] = -N;
    }
    return false;
  };
  do {
    for (std::size_t e = 0; e < deg; ++e) {
      bool inside = true;
      for (int i = 0; i < d; ++i) {
        t[i] = x[i] + model.offsets[e][i];
        inside = inside && (t[i] >= -N && t[i] <= N);
      }
      if (inside) continue;
      const std::uint64_t key = pack_coords(t);
      auto [it, fresh] = lookup.try_emplace(
          key, static_cast<VertexId>(n_int + static_cast<long>(halo_degree.size())));
      if (fresh) {
        for (int i = 0; i < d; ++i) halo_coords.push_back(t[i]);
        halo_degree.push_back(0);
      }
      ++halo_degree[it->second - n_int];
    }
  } while (advance());

  const std::int64_t n_total = n_int + static_cast<std::int64_t>(halo_degree.size());
  if (static_cast<double>(n_total) > static_cast<double>(budget.max_vertices))
    throw ResourceLimitError("box + halo exceeds vertex budget");

  Graph& g = box.graph;
  g.dim = d;
  g.coords.resize(static_cast<std::size_t>(n_total) * d);
  g.adj_off.assign(n_total + 1, 0);
  for (std::int64_t v = 0; v < n_int; ++v) g.adj_off[v + 1] = deg;
  for (std::size_t h = 0; h < halo_degree.size(); ++h)
    g.adj_off[n_int + h + 1] = halo_degree[h];
  for (std::int64_t v = 0; v < n_total; ++v) g.adj_off[v + 1] += g.adj_off[v];
  g.adj.resize(g.adj_off[n_total]);
  g.weight.resize(g.adj_off[n_total]);
  g.rate.assign(n_total, 0.0);

  // Pass 2: fill edges; halo rows are appended via per-row cursors.
  std::vector<std::uint64_t> cursor(g.adj_off.begin(), g.adj_off.end() - 1);
  std::fill(x.begin(), x.end(), -N);
  std::int64_t vid = 0;
  do {
    for (int i = 0; i < d; ++i) g.coords[vid * d + i] = x[i];
    for (std::size_t e = 0; e < deg; ++e) {
      bool inside = true;
      for (int i = 0; i < d; ++i) {
        t[i] = x[i] + model.offsets[e][i];
        inside = inside && (t[i] >= -N && t[i] <= N);
      }
      VertexId u;
      if (inside) {
        long id = 0;
        for (int i = 0; i < d; ++i) id = id * side + (t[i] + N);
        u = static_cast<VertexId>(id);
      } else {
        u = lookup.at(pack_coords(t));
        g.adj[cursor[u]] = static_cast<VertexId>(vid);
        g.weight[cursor[u]] = model.w[e];
        ++cursor[u];
        g.rate[u] += model.w[e];
      }
      g.adj[cursor[vid]] = u;
      g.weight[cursor[vid]] = model.w[e];
      ++cursor[vid];
      g.rate[vid] += model.w[e];
    }
    ++vid;
  } while (advance());
  for (std::size_t h = 0; h < halo_degree.size(); ++h)
    for (int i = 0; i < d; ++i)
      g.coords[(n_int + h) * d + i] = halo_coords[h * d + i];

  std::vector<std::uint8_t> mask(n_total, 0);
  std::fill(mask.begin(), mask.begin() + n_int, 1);
  box.domain = make_domain(g, mask);

  std::vector<long> zero(d, 0);
  box.origin = box.vertex_at(zero);
  return box;
}

}  // namespace

LatticeBox build_box(int d, long N, RateModel rate_model, const Budget& budget) {
  BoxEdgeModel model;
  const double w = rate_model == RateModel::UnitTotal ? 1.0 / (2.0 * d) : 1.0;
  for (int i = 0; i < d; ++i)
    for (long s : {-1L, 1L}) {
      std::array<long, 4> off{0, 0, 0, 0};
      off[i] = s;
      model.offsets.push_back(off);
      model.w.push_back(w);
    }
  std::unordered_map<std::uint64_t, VertexId> lookup;
  LatticeBox box = assemble_box(d, N, model, budget, lookup);
  box.halo_lookup_ = std::move(lookup);
  return box;
}

StepDistribution StepDistribution::make(std::vector<std::array<long, 2>> steps,
                                        std::vector<double> prob) {
  if (steps.size() != prob.size() || steps.empty())
    throw ConfigError("step law: empty or mismatched support");
  StepDistribution sd;
  double total = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i][0] == 0 && steps[i][1] == 0)
      throw ConfigError("step law: zero step in support");
    if (!(prob[i] > 0.0)) throw ConfigError("step law: nonpositive probability");
    for (std::size_t j = i + 1; j < steps.size(); ++j)
      if (steps[i] == steps[j]) throw ConfigError("step law: duplicate step");
    total += prob[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("step law: probabilities sum to " + std::to_string(total));
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::array<long, 2> neg{-steps[i][0], -steps[i][1]};
    bool matched = false;
    for (std::size_t j = 0; j < steps.size(); ++j)
      if (steps[j] == neg) {
        if (std::abs(prob[i] - prob[j]) > 1e-12)
          throw ConfigError("step law: p(s) != p(-s)");
        matched = true;
        break;
      }
    if (!matched) throw ConfigError("step law: support not symmetric");
  }
  sd.steps = std::move(steps);
  sd.prob = std::move(prob);
  for (std::size_t i = 0; i < sd.steps.size(); ++i)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        sd.cov[a][b] += sd.prob[i] * static_cast<double>(sd.steps[i][a]) *
                        static_cast<double>(sd.steps[i][b]);
  return sd;
}

StepDistribution StepDistribution::nearest_neighbor() {
  return make({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {0.25, 0.25, 0.25, 0.25});
}

LatticeBox build_step_box(const StepDistribution& sd, long N, const Budget& budget) {
  BoxEdgeModel model;
  for (std::size_t i = 0; i < sd.steps.size(); ++i) {
    model.offsets.push_back({sd.steps[i][0], sd.steps[i][1], 0, 0});
    model.w.push_back(sd.prob[i]);
  }
  std::unordered_map<std::uint64_t, VertexId> lookup;
  LatticeBox box = assemble_box(2, N, model, budget, lookup);
  box.halo_lookup_ = std::move(lookup);
  return box;
}

namespace {

// Generic planar lattice assembly from an explicit vertex/edge list.
Graph graph_from_lists(std::size_t n, const std::vector<double>& xy,
                       const std::vector<std::array<std::int64_t, 2>>& int_coords,
                       const std::vector<std::array<VertexId, 2>>& edges,
                       const std::vector<double>& w) {
  Graph g;
  g.dim = int_coords.empty() ? 0 : 2;
  g.xy = xy;
  for (const auto& c : int_coords) {
    g.coords.push_back(c[0]);
    g.coords.push_back(c[1]);
  }
  std::vector<std::uint32_t> degree(n, 0);
  for (const auto& e : edges) {
    ++degree[e[0]];
    ++degree[e[1]];
  }
  g.adj_off.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.adj_off[v + 1] = g.adj_off[v] + degree[v];
  g.adj.resize(g.adj_off[n]);
  g.weight.resize(g.adj_off[n]);
  g.rate.assign(n, 0.0);
  std::vector<std::uint64_t> cursor(g.adj_off.begin(), g.adj_off.end() - 1);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [a, b] = edges[i];
    g.adj[cursor[a]] = b;
    g.weight[cursor[a]++] = w[i];
    g.adj[cursor[b]] = a;
    g.weight[cursor[b]++] = w[i];
    g.rate[a] += w[i];
    g.rate[b] += w[i];
  }
  return g;
}

}  // namespace

Graph isoradial_square(long L) {
  if (L < 1) throw ConfigError("isoradial_square: L >= 1 required");
  const long side = 2 * L + 1;
  const auto id = [&](long i, long j) {
    return static_cast<VertexId>((i + L) * side + (j + L));
  };
  std::vector<double> xy;
  std::vector<std::array<std::int64_t, 2>> coords;
  for (long i = -L; i <= L; ++i)
    for (long j = -L; j <= L; ++j) {
      xy.push_back(static_cast<double>(i));
      xy.push_back(static_cast<double>(j));
      coords.push_back({i, j});
    }
  std::vector<std::array<VertexId, 2>> edges;
  const double w = std::tan(kPi / 4.0);
  for (long i = -L; i <= L; ++i)
    for (long j = -L; j <= L; ++j) {
      if (i < L) edges.push_back({id(i, j), id(i + 1, j)});
      if (j < L) edges.push_back({id(i, j), id(i, j + 1)});
    }
  return graph_from_lists(side * side, xy, coords,
                          edges, std::vector<double>(edges.size(), w));
}

Graph isoradial_triangular(long L) {
  if (L < 1) throw ConfigError("isoradial_triangular: L >= 1 required");
  const long side = 2 * L + 1;
  const auto id = [&](long i, long j) {
    return static_cast<VertexId>((i + L) * side + (j + L));
  };
  std::vector<double> xy;
  std::vector<std::array<std::int64_t, 2>> coords;
  for (long i = -L; i <= L; ++i)
    for (long j = -L; j <= L; ++j) {
      xy.push_back(static_cast<double>(i) + 0.5 * static_cast<double>(j));
      xy.push_back(0.8660254037844386 * static_cast<double>(j));
      coords.push_back({i, j});
    }
  std::vector<std::array<VertexId, 2>> edges;
  const double w = std::tan(kPi / 6.0);
  for (long i = -L; i <= L; ++i)
    for (long j = -L; j <= L; ++j) {
      if (i < L) edges.push_back({id(i, j), id(i + 1, j)});
      if (j < L) edges.push_back({id(i, j), id(i, j + 1)});
      if (i > -L && j < L) edges.push_back({id(i, j), id(i - 1, j + 1)});
    }
  return graph_from_lists(side * side, xy, coords,
                          edges, std::vector<double>(edges.size(), w));
}

Graph isoradial_hexagonal(long L) {
  if (L < 1) throw ConfigError("isoradial_hexagonal: L >= 1 required");
  const long side = 2 * L + 1;
  // Sublattice b in {0,1}: positions A(i,j) and B(i,j) = A(i,j) + (r3/2, 1/2).
  const auto id = [&](long i, long j, long b) {
    return static_cast<VertexId>(((i + L) * side + (j + L)) * 2 + b);
  };
  const double r3 = 1.7320508075688772;
  std::vector<double> xy;
  std::vector<std::array<std::int64_t, 2>> coords;
  for (long i = -L; i <= L; ++i)
    for (long j = -L; j <= L; ++j)
      for (long b = 0; b <= 1; ++b) {
        const double ax = r3 * static_cast<double>(i) + r3 / 2.0 * static_cast<double>(j);
        const double ay = 1.5 * static_cast<double>(j);
        xy.push_back(ax + (b ? r3 / 2.0 : 0.0));
        xy.push_back(ay + (b ? 0.5 : 0.0));
        coords.push_back({2 * i + b, 2 * j + b});
      }
  std::vector<std::array<VertexId, 2>> edges;
  const double w = std::tan(kPi / 3.0);
  for (long i = -L; i <= L; ++i)
    for (long j = -L; j <= L; ++j) {
      edges.push_back({id(i, j, 1), id(i, j, 0)});
      if (i < L) edges.push_back({id(i, j, 1), id(i + 1, j, 0)});
      if (j < L) edges.push_back({id(i, j, 1), id(i, j + 1, 0)});
    }
  return graph_from_lists(static_cast<std::size_t>(side) * side * 2, xy, coords,
                          edges, std::vector<double>(edges.size(), w));
}

Graph parse_isoradial(const std::string& text, double eta) {
  if (!(eta > 0.0 && eta < kPi / 4.0))
    throw ConfigError("isoradial: ellipticity eta must lie in (0, pi/4)");
  std::istringstream in(text);
  std::string line;
  std::vector<std::array<double, 2>> pos;
  std::vector<long> ids;
  std::vector<std::array<long, 3>> raw_edges;  // (id1, id2, line no)
  std::vector<double> thetas;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "V") {
      long id;
      double x, y;
      if (!(ls >> id >> x >> y))
        throw ConfigError("isoradial line " + std::to_string(line_no) + ": bad V record");
      ids.push_back(id);
      pos.push_back({x, y});
    } else if (tag == "E") {
      long a, b;
      double theta;
      if (!(ls >> a >> b >> theta))
        throw ConfigError("isoradial line " + std::to_string(line_no) + ": bad E record");
      if (!(theta > eta && theta < kPi / 2.0 - eta))
        throw ConfigError("isoradial line " + std::to_string(line_no) +
                          ": theta outside (eta, pi/2 - eta)");
      raw_edges.push_back({a, b, line_no});
      thetas.push_back(theta);
    } else {
      throw ConfigError("isoradial line " + std::to_string(line_no) +
                        ": unknown record '" + tag + "'");
    }
  }
  if (ids.empty()) throw ConfigError("isoradial: no vertices");
  std::unordered_map<long, VertexId> remap;
  std::vector<double> xy;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (!remap.emplace(ids[k], static_cast<VertexId>(k)).second)
      throw ConfigError("isoradial: duplicate vertex id " + std::to_string(ids[k]));
    xy.push_back(pos[k][0]);
    xy.push_back(pos[k][1]);
  }
  std::vector<std::array<VertexId, 2>> edges;
  std::vector<double> w;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  for (std::size_t k = 0; k < raw_edges.size(); ++k) {
    const auto ia = remap.find(raw_edges[k][0]);
    const auto ib = remap.find(raw_edges[k][1]);
    if (ia == remap.end() || ib == remap.end())
      throw ConfigError("isoradial line " + std::to_string(raw_edges[k][2]) +
                        ": edge references unknown vertex");
    VertexId a = ia->second, b = ib->second;
    if (a == b)
      throw ConfigError("isoradial line " + std::to_string(raw_edges[k][2]) +
                        ": self loop");
    if (a > b) std::swap(a, b);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    if (!seen.emplace(key, k).second)
      throw ConfigError("isoradial line " + std::to_string(raw_edges[k][2]) +
                        ": duplicate edge");
    edges.push_back({a, b});
    w.push_back(std::tan(thetas[k]));
  }
  return graph_from_lists(ids.size(), xy, {}, edges, w);
}

Graph load_isoradial(const std::string& path, double eta) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open isoradial file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_isoradial(buf.str(), eta);
}

Graph induced_subgraph(const Graph& g, const Domain& dom,
                       std::vector<VertexId>* old_to_new) {
  Graph out;
  out.dim = g.dim;
  const auto n = dom.interior.size();
  std::vector<VertexId> map(g.n(), kNoVertex);
  for (std::size_t i = 0; i < n; ++i) map[dom.interior[i]] = static_cast<VertexId>(i);
  if (old_to_new) *old_to_new = map;
  if (g.dim > 0) {
    out.coords.reserve(n * g.dim);
    for (VertexId v : dom.interior)
      for (int k = 0; k < g.dim; ++k) out.coords.push_back(g.coord(v, k));
  }
  if (!g.xy.empty()) {
    out.xy.reserve(n * 2);
    for (VertexId v : dom.interior) {
      out.xy.push_back(g.xy[2 * static_cast<std::size_t>(v)]);
      out.xy.push_back(g.xy[2 * static_cast<std::size_t>(v) + 1]);
    }
  }
  out.adj_off.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (VertexId u : g.neighbors(dom.interior[i]))
      if (map[u] != kNoVertex) ++out.adj_off[i + 1];
  }
  for (std::size_t i = 0; i < n; ++i) out.adj_off[i + 1] += out.adj_off[i];
  out.adj.resize(out.adj_off[n]);
  out.weight.resize(out.adj_off[n]);
  out.rate.assign(n, 0.0);
  std::vector<std::uint64_t> cursor(out.adj_off.begin(), out.adj_off.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId v = dom.interior[i];
    const auto nbrs = g.neighbors(v);
    const auto ws = g.edge_weights(v);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      const VertexId u = map[nbrs[e]];
      if (u == kNoVertex) continue;
      out.adj[cursor[i]] = u;
      out.weight[cursor[i]++] = ws[e];
      out.rate[i] += ws[e];
    }
  }
  return out;
}

}  // namespace ltlab
