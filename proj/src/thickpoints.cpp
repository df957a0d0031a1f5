#include "ltlab/thickpoints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ltlab/errors.hpp"
#include "ltlab/rng.hpp"

namespace ltlab {

namespace {

void require_scale(long N) {
  if (N < 2) throw ConfigError("thick: box radius must be >= 2");
}

}  // namespace

double thick_threshold_2d(double a, double g_slope, long N) {
  require_scale(N);
  if (!(a > 0.0) || !(g_slope > 0.0)) {
    throw ConfigError("thick: a and g_slope must be positive");
  }
  const double ln = std::log(static_cast<double>(N));
  return 2.0 * a * g_slope * ln * ln;
}

double thick_threshold_hd(double a, double g, long N) {
  require_scale(N);
  if (!(a > 0.0) || !(g > 0.0)) {
    throw ConfigError("thick: a and g must be positive");
  }
  return 2.0 * g * a * std::log(static_cast<double>(N));
}

ThickPointSet thick_set_2d(const LocalTimeField& field, const Domain& dom,
                           double a, double g_slope, long N) {
  ThickPointSet set;
  set.a = a;
  set.threshold = thick_threshold_2d(a, g_slope, N);
  for (const VertexId v : dom.interior) {
    const double ell = field.ltime[v];
    if (ell >= set.threshold) {
      set.vertices.push_back(v);
      set.ltimes.push_back(ell);
    }
  }
  return set;
}

ThickPointSet thick_set_hd(const LocalTimeField& field, double a, double g,
                           long N) {
  ThickPointSet set;
  set.a = a;
  set.threshold = thick_threshold_hd(a, g, N);
  std::vector<VertexId> order(field.visited);
  std::sort(order.begin(), order.end());
  for (const VertexId v : order) {
    const double ell = field.ltime[v];
    if (ell > set.threshold) {
      set.vertices.push_back(v);
      set.ltimes.push_back(ell);
    }
  }
  return set;
}

std::size_t PointMeasure::count_in(
    const std::vector<std::pair<double, double>>& box) const {
  if (static_cast<int>(box.size()) != d) {
    throw ConfigError("measure: region dimension mismatch");
  }
  std::size_t n = 0;
  for (const auto& p : points) {
    bool inside = true;
    for (int i = 0; i < d && inside; ++i) {
      inside = box[i].first <= p[i] && p[i] <= box[i].second;
    }
    if (inside) ++n;
  }
  return n;
}

double PointMeasure::mass_in(
    const std::vector<std::pair<double, double>>& box) const {
  return prefactor * static_cast<double>(count_in(box));
}

namespace {

PointMeasure measure_shell(const LatticeBox& box, double a) {
  PointMeasure m;
  m.d = box.d;
  m.N = box.N;
  m.a = a;
  m.prefactor = std::pow(static_cast<double>(box.N), -2.0 * (1.0 - a));
  return m;
}

std::array<double, 4> scaled_site(const LatticeBox& box, VertexId v) {
  std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};
  const double scale = 1.0 / static_cast<double>(box.N);
  for (int i = 0; i < box.d; ++i) {
    p[static_cast<std::size_t>(i)] =
        static_cast<double>(box.graph.coords[v * static_cast<std::size_t>(box.d) +
                                             static_cast<std::size_t>(i)]) *
        scale;
  }
  return p;
}

}  // namespace

PointMeasure nu_measure(const LatticeBox& box, const LocalTimeField& field,
                        double a, double g) {
  const ThickPointSet set = thick_set_hd(field, a, g, box.N);
  PointMeasure m = measure_shell(box, a);
  m.points.reserve(set.count());
  m.marks = set.ltimes;
  for (const VertexId v : set.vertices) m.points.push_back(scaled_site(box, v));
  return m;
}

PointMeasure mu_measure(const LatticeBox& box, const LocalTimeField& field,
                        double a, double g, std::uint64_t master_seed,
                        std::uint64_t replica) {
  const double threshold = thick_threshold_hd(a, g, box.N);
  std::vector<VertexId> order(field.visited);
  std::sort(order.begin(), order.end());
  Rng rng(master_seed, StreamPurpose::MuExponentials, replica);
  PointMeasure m = measure_shell(box, a);
  for (const VertexId v : order) {
    const double mark = rng.exponential(g);
    if (mark > threshold) {
      m.points.push_back(scaled_site(box, v));
      m.marks.push_back(mark);
    }
  }
  return m;
}

MaxLocalTime max_local_time_2d(const LocalTimeField& field, const Domain& dom,
                               long N) {
  require_scale(N);
  MaxLocalTime out;
  for (const VertexId v : dom.interior) {
    if (field.ltime[v] > out.max_ltime) {
      out.max_ltime = field.ltime[v];
      out.argmax = v;
    }
  }
  const double ln = std::log(static_cast<double>(N));
  out.lambda = out.max_ltime / (ln * ln);
  return out;
}

double centered_max_hd(const LocalTimeField& field, double g, long N) {
  require_scale(N);
  double mx = 0.0;
  for (const VertexId v : field.visited) mx = std::max(mx, field.ltime[v]);
  return mx - 2.0 * g * std::log(static_cast<double>(N));
}

void export_measure_csv(const PointMeasure& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("measure: cannot open " + path);
  std::fprintf(f, "# prefactor=%.17g a=%.17g N=%ld d=%d\n", m.prefactor, m.a,
               m.N, m.d);
  for (int i = 0; i < m.d; ++i) std::fprintf(f, "x%d,", i + 1);
  std::fprintf(f, "mark\n");
  for (std::size_t k = 0; k < m.points.size(); ++k) {
    for (int i = 0; i < m.d; ++i) {
      std::fprintf(f, "%.17g,", m.points[k][static_cast<std::size_t>(i)]);
    }
    std::fprintf(f, "%.17g\n", m.marks[k]);
  }
  std::fclose(f);
}

}  // namespace ltlab
