#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "ltlab/errors.hpp"
#include "ltlab/green.hpp"
#include "ltlab/lattice.hpp"
#include "ltlab/numeric.hpp"
#include "ltlab/stats.hpp"
#include "ltlab/walker.hpp"

using namespace ltlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Survival function of the standard-Brownian exit time from [-1,1] in one
// dimension, from the Dirichlet eigenfunction expansion of the half Laplacian.
double interval_exit_survival(double t) {
  double s = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double lam = (2.0 * k + 1.0) * kPi / 2.0;
    const double term = 4.0 / kPi * ((k % 2 == 0) ? 1.0 : -1.0) /
                        (2.0 * k + 1.0) * std::exp(-lam * lam * t / 2.0);
    s += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::min(std::max(s, 0.0), 1.0);
}

}  // namespace

TEST_SUITE("green") {

TEST_CASE("segment green matches the closed form") {
  // Unit-rate walk on {-1,0,1} with absorbing ends: G(i,j) in path
  // coordinates i,j in {1,2,3} equals 2 min(i,j) (4 - max(i,j)) / 4.
  auto box = build_box(1, 1);
  const auto green = exact_green(box.graph, box.domain);
  CHECK(green.n() == 3);
  CHECK(green.residual_max < 1e-10);
  CHECK(green.sym_error < 1e-12);
  const auto vid = [&](long x) {
    return box.vertex_at(std::array<long, 1>{x});
  };
  const auto exact = [](int i, int j) {
    return 2.0 * std::min(i, j) * (4.0 - std::max(i, j)) / 4.0;
  };
  const std::array<long, 3> xs{-1, 0, 1};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(green.at(vid(xs[i]), vid(xs[j])) ==
            doctest::Approx(exact(i + 1, j + 1)).epsilon(1e-12));
}

TEST_CASE("single pinned vertex inverts the edge conductance") {
  // Two vertices joined by conductance tan(theta); killing at one leaves
  // G = 1 / W on the other.
  auto g = parse_isoradial("V 0 0 0\nV 1 1 0\nE 0 1 1.0471975511965976\n");
  const double w = std::tan(1.0471975511965976);  // pi/3
  const auto dom = make_domain(g, std::vector<std::uint8_t>{1, 0});
  const auto green = exact_green(g, dom);
  CHECK(green.n() == 1);
  CHECK(green.at(0, 0) == doctest::Approx(1.0 / w).epsilon(1e-12));
}

TEST_CASE("green diagonal equals expected local time from walks") {
  auto box = build_box(2, 4);
  const auto green = exact_green(box.graph, box.domain);
  LocalTimeField field;
  field.attach(box.graph);
  const int reps = 4000;
  const std::array<VertexId, 3> probes{
      box.origin, box.vertex_at(std::array<long, 2>{1, 0}),
      box.vertex_at(std::array<long, 2>{2, 2})};
  std::vector<std::vector<double>> ell(probes.size(),
                                       std::vector<double>(reps));
  for (int k = 0; k < reps; ++k) {
    run_until_exit(box.graph, box.domain, box.origin, 141421, k, field);
    for (std::size_t p = 0; p < probes.size(); ++p)
      ell[p][k] = field.at(probes[p]);
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto m = mean_se(ell[p]);
    CHECK(std::abs(m.mean - green.at(box.origin, probes[p])) < 4.0 * m.se);
  }
}

TEST_CASE("cg column reproduces the dense column") {
  auto box = build_box(2, 6);
  const auto green = exact_green(box.graph, box.domain);
  const auto col = green_column(box.graph, box.domain, box.origin, 1e-12);
  REQUIRE(col.size() ==
          static_cast<Eigen::Index>(box.domain.interior_count()));
  const auto xi = box.domain.interior_index[box.origin];
  double max_diff = 0.0;
  for (Eigen::Index i = 0; i < col.size(); ++i)
    max_diff = std::max(max_diff, std::abs(col[i] - green.G(i, xi)));
  CHECK(max_diff < 1e-8);
}

TEST_CASE("spectral diagonal agrees with the dense diagonal") {
  for (int d = 1; d <= 3; ++d) {
    const long N = d == 3 ? 2 : 3;
    for (auto model : {RateModel::UnitTotal, RateModel::Conductance}) {
      auto box = build_box(d, N, model);
      const auto green = exact_green(box.graph, box.domain);
      const auto diag = box_green_diagonal_spectral(d, N, model);
      REQUIRE(diag.size() == box.domain.interior_count());
      for (std::size_t i = 0; i < diag.size(); ++i) {
        const VertexId v = box.domain.interior[i];
        CHECK(diag[i] == doctest::Approx(green.at(v, v)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("killing constants against published values") {
  // Expected total local time at the origin of the transient unit-rate walk;
  // tabulated lattice Green constants.
  double err3 = 0.0, err4 = 0.0;
  const double g3 = lattice_green_constant(3, &err3);
  const double g4 = lattice_green_constant(4, &err4);
  CHECK(std::abs(g3 - 1.5163860591519780) < 1e-9);
  CHECK(std::abs(g4 - 1.2394671218472428) < 1e-9);
  CHECK(err3 > 0.0);
  CHECK(err3 < 1e-6);
  CHECK(err4 < 1e-6);
  CHECK_THROWS_AS(lattice_green_constant(2), ConfigError);
}

TEST_CASE("continuum prefactor closed forms") {
  CHECK(a_d_constant(3) == doctest::Approx(3.0 / (2.0 * kPi)).epsilon(1e-15));
  CHECK(a_d_constant(4) == doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-15));
  CHECK_THROWS_AS(a_d_constant(2), ConfigError);
}

TEST_CASE("one-dimensional brownian exit matches the eigen expansion") {
  const std::array<double, 1> x0{0.0};
  Rng rng(2718, StreamPurpose::Brownian, 0);
  const int n = 2000;
  const double dt = 1e-4;
  std::vector<double> taus(n);
  for (int k = 0; k < n; ++k) {
    const auto s = sample_brownian_exit(1, x0, dt, rng);
    taus[k] = s.tau_raw;
    CHECK(std::abs(s.z[0]) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto m = mean_se(taus);
  CHECK(std::abs(m.mean - 1.0) < std::max(4.0 * m.se, 0.02));
  // Distributional check against the exact survival series.
  const auto ks = ks_test(
      taus, [](double t) { return 1.0 - interval_exit_survival(t); }, 0.01);
  CHECK(ks.pass);
  // Frozen point value of the same series.
  CHECK(1.0 - interval_exit_survival(1.0) ==
        doctest::Approx(0.6292225702).epsilon(1e-9));
}

TEST_CASE("cube exit time mean in three dimensions") {
  // E[tau_raw] for standard BM from the centre of [-1,1]^3, from a dense
  // finite-difference solve of (1/2) Lap u = -1 (frozen oracle).
  const std::array<double, 3> x0{0.0, 0.0, 0.0};
  Rng rng(2718, StreamPurpose::Brownian, 1);
  const int n = 1500;
  const double dt = 2e-4;
  std::vector<double> taus(n);
  for (int k = 0; k < n; ++k)
    taus[k] = sample_brownian_exit(3, x0, dt, rng).tau_raw;
  const auto m = mean_se(taus);
  CHECK(std::abs(m.mean - 0.4497022615) < std::max(4.0 * m.se, 0.03 * 0.45));
}

TEST_CASE("walk on spheres reproduces euler harmonic measure") {
  const std::array<double, 3> x0{0.3, 0.2, -0.1};
  const std::array<double, 3> y{1.5, 0.0, 0.0};

  Rng rng(909, StreamPurpose::QBank, 0);
  const int n = 4000;
  std::vector<double> qs(n);
  for (int k = 0; k < n; ++k) {
    const auto z = wos_exit_point(3, x0, 1e-6, rng);
    // Exactly one coordinate is clamped to a face.
    int on_face = 0;
    double max_abs = 0.0;
    for (int i = 0; i < 3; ++i) {
      max_abs = std::max(max_abs, std::abs(z[i]));
      if (std::abs(z[i]) == 1.0) ++on_face;
    }
    CHECK(max_abs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(on_face >= 1);
    const double r = std::sqrt((y[0] - z[0]) * (y[0] - z[0]) +
                               (y[1] - z[1]) * (y[1] - z[1]) +
                               (y[2] - z[2]) * (y[2] - z[2]));
    qs[k] = 1.0 / r;
  }
  const auto mw = mean_se(qs);

  const auto bank = sample_harmonic_bank(3, x0, 4000, 2e-4, 909);
  double se_b = 0.0;
  const double qb = bank.q_at(y, &se_b);
  CHECK(se_b > 0.0);
  // Euler exits carry an O(sqrt(dt)) placement bias; allow it on top of SE.
  const double tol = 4.0 * std::sqrt(mw.se * mw.se + se_b * se_b) + 0.01;
  CHECK(std::abs(mw.mean - qb) < tol);
}

TEST_CASE("harmonic bank q decays with distance") {
  const std::array<double, 3> x0{0.0, 0.0, 0.0};
  const auto bank = sample_harmonic_bank(3, x0, 1500, 5e-4, 11);
  CHECK(bank.size() == 1500);
  const std::array<double, 3> near{1.2, 0.0, 0.0};
  const std::array<double, 3> far{3.0, 0.0, 0.0};
  CHECK(bank.q_at(near) > bank.q_at(far));
  CHECK(bank.q_at(far) > 0.0);
}

TEST_CASE("qkernel snaps nearby sources to one bank") {
  QKernel kern(3, 400, 5e-4, 77, 0.02);
  const std::array<double, 3> a{0.100, 0.200, 0.300};
  const std::array<double, 3> b{0.101, 0.201, 0.299};  // same snap cell
  const std::array<double, 3> c{0.500, -0.400, 0.000};
  const std::array<double, 3> y{2.0, 0.0, 0.0};
  const double qa = kern.q(a, y);
  (void)kern.q(b, y);
  CHECK(kern.bank_count() == 1);
  (void)kern.q(c, y);
  CHECK(kern.bank_count() == 2);

  // Request order does not change any answer (streams keyed by snap cell).
  QKernel kern2(3, 400, 5e-4, 77, 0.02);
  const double qc2 = kern2.q(c, y);
  const double qa2 = kern2.q(a, y);
  QKernel kern3(3, 400, 5e-4, 77, 0.02);
  const double qa3 = kern3.q(a, y);
  const double qc3 = kern3.q(c, y);
  CHECK(qa2 == qa3);
  CHECK(qc2 == qc3);
  CHECK(qa == qa2);
}

TEST_CASE("planar potential slope on the plain box") {
  // Unit-rate nearest-neighbour walk: G_N(0,0) grows like (2/pi) log N.
  const std::array<long, 4> sizes{6, 10, 14, 20};
  const auto res = potential_slope_check_2d(
      [](long L) {
        auto box = build_box(2, L, RateModel::UnitTotal);
        return BuiltDomain{box.graph, box.domain, box.origin};
      },
      sizes);
  REQUIRE(res.diag.size() == 4);
  CHECK(res.diag[0] < res.diag[3]);  // monotone growth
  CHECK(res.fit.slope ==
        doctest::Approx(2.0 / kPi).epsilon(0.05));
}

TEST_CASE("audit reports connectivity and diagonal margins") {
  auto box = build_box(2, 4);
  const double bound = 2.0 * std::log(9.0) * std::log(9.0);
  const auto audit = audit_green_assumptions(box.graph, box.domain, bound);
  CHECK(audit.connected);
  CHECK(audit.interior == 81);
  CHECK(audit.conductance_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(audit.max_diag > 0.0);
  CHECK(audit.diag_margin == doctest::Approx(bound - audit.max_diag));
  const auto js = audit.to_json();
  CHECK(js.find("diag_margin") != std::string::npos);

  // Two sites with no interior path between them: flagged, and the dense
  // route refuses to factor the operator.
  std::vector<std::uint8_t> mask(box.graph.n(), 0);
  mask[box.vertex_at(std::array<long, 2>{-4, -4})] = 1;
  mask[box.vertex_at(std::array<long, 2>{4, 4})] = 1;
  const auto split = make_domain(box.graph, mask);
  const auto audit2 = audit_green_assumptions(box.graph, split, bound);
  CHECK_FALSE(audit2.connected);
}

TEST_CASE("dense budget is enforced") {
  auto box = build_box(2, 10);
  CHECK_THROWS_AS(exact_green(box.graph, box.domain, 50), ResourceLimitError);
}

TEST_CASE("save and load round trip with checksum") {
  auto box = build_box(2, 2);
  const auto green = exact_green(box.graph, box.domain);
  save_green("green_roundtrip_test", green);
  const auto loaded = load_green("green_roundtrip_test");
  REQUIRE(loaded.n() == green.n());
  CHECK((loaded.G - green.G).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.interior == green.interior);
  for (VertexId v : green.interior) {
    CHECK(loaded.interior_index[v] == green.interior_index[v]);
    CHECK(loaded.at(v, v) == green.at(v, v));
  }

  // Flip one payload byte: the checksum must catch it.
  {
    std::fstream f("green_roundtrip_test.bin",
                   std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(f.good());
    f.seekp(16);
    char b = 0;
    f.seekg(16);
    f.read(&b, 1);
    b = static_cast<char>(b ^ 0x40);
    f.seekp(16);
    f.write(&b, 1);
  }
  CHECK_THROWS_AS(load_green("green_roundtrip_test"), ConfigError);
  std::remove("green_roundtrip_test.bin");
  std::remove("green_roundtrip_test.json");
}

}  // TEST_SUITE
