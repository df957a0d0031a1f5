#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ltlab/errors.hpp"
#include "ltlab/green.hpp"
#include "ltlab/lattice.hpp"
#include "ltlab/numeric.hpp"
#include "ltlab/thickpoints.hpp"
#include "ltlab/walker.hpp"

using namespace ltlab;

TEST_SUITE("thickpoints") {

TEST_CASE("threshold formulas") {
  const double g_slope = 2.0 / 3.14159265358979323846;
  const long N = 64;
  const double ln = std::log(double(N));
  CHECK(thick_threshold_2d(0.3, g_slope, N) ==
        doctest::Approx(2.0 * 0.3 * g_slope * ln * ln).epsilon(1e-14));
  const double g = 1.5163860591519780;
  CHECK(thick_threshold_hd(0.7, g, N) ==
        doctest::Approx(2.0 * g * 0.7 * ln).epsilon(1e-14));
  CHECK_THROWS_AS(thick_threshold_2d(0.3, g_slope, 1), ConfigError);
  CHECK_THROWS_AS(thick_threshold_hd(0.7, g, 1), ConfigError);
  CHECK_THROWS_AS(thick_threshold_2d(-0.1, g_slope, 64), ConfigError);
  CHECK_THROWS_AS(thick_threshold_hd(0.7, -1.0, 64), ConfigError);
}

TEST_CASE("planar selection is inclusive at the threshold") {
  auto box = build_box(2, 2);
  LocalTimeField field;
  field.attach(box.graph);
  // Synthetic field: origin exactly at the threshold, neighbour above,
  // another below; untouched sites stay at zero.
  const double a = 0.4, g_slope = 2.0 / 3.14159265358979323846;
  const long N = 2;
  const double thr = thick_threshold_2d(a, g_slope, N);
  const VertexId at = box.origin;
  const VertexId above = box.vertex_at(std::array<long, 2>{1, 0});
  const VertexId below = box.vertex_at(std::array<long, 2>{0, 1});
  field.ltime[at] = thr;
  field.ltime[above] = thr + 0.5;
  field.ltime[below] = thr - 1e-9;
  field.visited = {at, above, below};
  const auto set = thick_set_2d(field, box.domain, a, g_slope, N);
  CHECK(set.threshold == doctest::Approx(thr).epsilon(1e-15));
  REQUIRE(set.count() == 2);  // the boundary case is kept
  std::set<VertexId> got(set.vertices.begin(), set.vertices.end());
  CHECK(got.count(at) == 1);
  CHECK(got.count(above) == 1);
  CHECK(got.count(below) == 0);
}

TEST_CASE("transient selection is strict and id-ordered") {
  auto box = build_box(3, 2);
  LocalTimeField field;
  field.attach(box.graph);
  const double a = 0.5, g = 1.5163860591519780;
  const long N = 2;
  const double thr = thick_threshold_hd(a, g, N);
  const VertexId v1 = box.vertex_at(std::array<long, 3>{1, 0, 0});
  const VertexId v2 = box.vertex_at(std::array<long, 3>{-1, 0, 0});
  const VertexId v3 = box.origin;
  field.ltime[v1] = thr;         // exactly at: excluded (strict)
  field.ltime[v2] = thr + 0.25;  // above: kept
  field.ltime[v3] = thr + 0.50;  // above: kept
  field.visited = {v1, v3, v2};  // deliberately out of id order
  const auto set = thick_set_hd(field, a, g, N);
  REQUIRE(set.count() == 2);
  CHECK(set.vertices[0] == std::min(v2, v3));
  CHECK(set.vertices[1] == std::max(v2, v3));
  CHECK(set.ltimes[0] == field.ltime[set.vertices[0]]);
}

TEST_CASE("measures scale points into the unit box") {
  auto box = build_box(3, 4);
  LocalTimeField field;
  field.attach(box.graph);
  const double g = 1.5163860591519780;
  const double a = 0.5;
  const double thr = thick_threshold_hd(a, g, 4);
  const VertexId corner = box.vertex_at(std::array<long, 3>{4, -4, 2});
  field.ltime[box.origin] = thr + 1.0;
  field.ltime[corner] = thr + 2.0;
  field.visited = {box.origin, corner};
  const auto nu = nu_measure(box, field, a, g);
  CHECK(nu.d == 3);
  CHECK(nu.N == 4);
  CHECK(nu.prefactor == doctest::Approx(std::pow(4.0, -1.0)).epsilon(1e-14));
  REQUIRE(nu.points.size() == 2);
  CHECK(nu.marks[0] == doctest::Approx(thr + 1.0).epsilon(1e-15));
  // Corner scales to (1, -1, 0.5).
  CHECK(nu.points[1][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nu.points[1][1] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(nu.points[1][2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nu.total_mass() == doctest::Approx(2.0 * nu.prefactor).epsilon(1e-15));

  // Sub-box queries: closed boxes, origin only.
  const std::vector<std::pair<double, double>> centre{
      {-0.1, 0.1}, {-0.1, 0.1}, {-0.1, 0.1}};
  CHECK(nu.count_in(centre) == 1);
  CHECK(nu.mass_in(centre) == doctest::Approx(nu.prefactor).epsilon(1e-15));
  const std::vector<std::pair<double, double>> all{
      {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  CHECK(nu.count_in(all) == 2);
  CHECK_THROWS_AS(nu.count_in({{0.0, 1.0}}), ConfigError);
}

TEST_CASE("reference measure marks are independent of visit order") {
  auto box = build_box(3, 3);
  LocalTimeField a_field, b_field;
  a_field.attach(box.graph);
  b_field.attach(box.graph);
  const double g = 1.5163860591519780;
  const VertexId u = box.origin;
  const VertexId v = box.vertex_at(std::array<long, 3>{1, 1, 0});
  const VertexId w = box.vertex_at(std::array<long, 3>{-2, 0, 1});
  // Same visited set, different visit order and different local times.
  a_field.visited = {u, v, w};
  b_field.visited = {w, u, v};
  for (VertexId x : {u, v, w}) {
    a_field.ltime[x] = 99.0;
    b_field.ltime[x] = 1e-3;
  }
  const auto ma = mu_measure(box, a_field, 0.05, g, 555, 3);
  const auto mb = mu_measure(box, b_field, 0.05, g, 555, 3);
  // Draws attach to sites in id order, so the kept marks must agree site
  // for site no matter how the sites were first visited.
  REQUIRE(ma.points.size() == mb.points.size());
  for (std::size_t i = 0; i < ma.marks.size(); ++i) {
    CHECK(ma.marks[i] == mb.marks[i]);
    CHECK(ma.points[i][0] == mb.points[i][0]);
  }
  // Different replica: different draws.
  const auto mc = mu_measure(box, a_field, 0.05, g, 555, 4);
  bool any_diff = mc.points.size() != ma.points.size();
  for (std::size_t i = 0; !any_diff && i < std::min(ma.marks.size(),
                                                    mc.marks.size());
       ++i)
    any_diff = ma.marks[i] != mc.marks[i];
  CHECK(any_diff);
}

TEST_CASE("reference marks have the exponential mean") {
  auto box = build_box(3, 6);
  LocalTimeField field;
  field.attach(box.graph);
  // Mark every interior site as visited.
  field.visited = box.domain.interior;
  for (VertexId v : field.visited) field.ltime[v] = 1.0;
  const double g = 1.5163860591519780;
  const double a = 0.1;
  const double thr = thick_threshold_hd(a, g, box.N);
  KahanSum sum;
  std::size_t kept = 0, total = 0;
  for (std::uint64_t rep = 0; rep < 40; ++rep) {
    const auto mu = mu_measure(box, field, a, g, 777, rep);
    for (double m : mu.marks) sum.add(m);
    kept += mu.marks.size();
    total += field.visited.size();
  }
  // Memorylessness: a kept mark is threshold + Exp(g), and the keep rate
  // is exp(-threshold / g).
  const double mean = sum.value() / double(kept);
  CHECK(std::abs(mean - (thr + g)) < 4.0 * g / std::sqrt(double(kept)));
  const double p = std::exp(-thr / g);
  const double se_p = std::sqrt(p * (1.0 - p) / double(total));
  CHECK(std::abs(double(kept) / double(total) - p) < 4.0 * se_p);
}

TEST_CASE("planar maximum statistic") {
  auto box = build_box(2, 8);
  LocalTimeField field;
  field.attach(box.graph);
  const VertexId big = box.vertex_at(std::array<long, 2>{3, -2});
  field.ltime[big] = 17.0;
  field.ltime[box.origin] = 5.0;
  field.visited = {box.origin, big};
  const auto mx = max_local_time_2d(field, box.domain, 8);
  CHECK(mx.max_ltime == doctest::Approx(17.0).epsilon(1e-15));
  CHECK(mx.argmax == big);
  const double ln8 = std::log(8.0);
  CHECK(mx.lambda == doctest::Approx(17.0 / (ln8 * ln8)).epsilon(1e-14));
}

TEST_CASE("transient centered maximum") {
  auto box = build_box(3, 4);
  LocalTimeField field;
  field.attach(box.graph);
  field.ltime[box.origin] = 9.0;
  field.visited = {box.origin};
  const double g = 1.5163860591519780;
  CHECK(centered_max_hd(field, g, 4) ==
        doctest::Approx(9.0 - 2.0 * g * std::log(4.0)).epsilon(1e-13));
}

TEST_CASE("csv export is deterministic and carries the header") {
  auto box = build_box(2, 2);
  LocalTimeField field;
  field.attach(box.graph);
  field.ltime[box.origin] = 50.0;
  field.visited = {box.origin};
  // Large ltime clears any threshold at N=2.
  const auto nu = nu_measure(box, field, 0.3, 2.0 / 3.14159265358979323846);
  export_measure_csv(nu, "thick_csv_test.csv");
  const auto slurp = [](const std::string& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const std::string first = slurp("thick_csv_test.csv");
  export_measure_csv(nu, "thick_csv_test.csv");
  CHECK(first == slurp("thick_csv_test.csv"));
  CHECK(first.find("mark") != std::string::npos);
  std::remove("thick_csv_test.csv");
}

TEST_CASE("walk-driven planar thick sets shrink as a grows") {
  auto box = build_box(2, 12);
  LocalTimeField field;
  field.attach(box.graph);
  run_until_exit(box.graph, box.domain, box.origin, 2026, 0, field);
  const double g_slope = 2.0 / 3.14159265358979323846;
  const auto s1 = thick_set_2d(field, box.domain, 0.1, g_slope, 12);
  const auto s2 = thick_set_2d(field, box.domain, 0.3, g_slope, 12);
  const auto s3 = thick_set_2d(field, box.domain, 0.6, g_slope, 12);
  CHECK(s1.count() >= s2.count());
  CHECK(s2.count() >= s3.count());
  // Every reported site indeed clears its threshold.
  for (std::size_t i = 0; i < s2.count(); ++i) {
    CHECK(s2.ltimes[i] >= s2.threshold);
    CHECK(field.at(s2.vertices[i]) == s2.ltimes[i]);
  }
}

}  // TEST_SUITE
