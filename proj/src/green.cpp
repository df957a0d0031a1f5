#include "ltlab/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

namespace ltlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_connected_interior(const Graph& g, const Domain& dom) {
  if (dom.interior.empty()) throw ConfigError("green: empty interior");
  std::vector<std::uint8_t> seen(g.n(), 0);
  std::deque<VertexId> queue{dom.interior.front()};
  seen[dom.interior.front()] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (VertexId u : g.neighbors(v))
      if (dom.is_interior(u) && !seen[u]) {
        seen[u] = 1;
        ++reached;
        queue.push_back(u);
      }
  }
  if (reached != dom.interior.size())
    throw ConfigError("green: interior is not connected");
}

// y += (-L) x on the interior: (-L)x(v) = rate[v] x(v) - sum_{u interior} W_vu x(u).
void apply_neg_generator(const Graph& g, const Domain& dom,
                         const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const auto& idx = dom.interior_index;
  const std::size_t n = dom.interior.size();
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId v = dom.interior[i];
    double acc = g.rate[v] * x[static_cast<Eigen::Index>(i)];
    const auto nbrs = g.neighbors(v);
    const auto ws = g.edge_weights(v);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      const std::int32_t j = idx[nbrs[e]];
      if (j >= 0) acc -= ws[e] * x[j];
    }
    y[static_cast<Eigen::Index>(i)] = acc;
  }
}

}  // namespace

GreenOperator exact_green(const Graph& g, const Domain& dom, std::size_t budget) {
  const std::size_t n = dom.interior.size();
  if (n == 0) throw ConfigError("exact_green: empty interior");
  if (n > budget)
    throw ResourceLimitError("exact_green: interior " + std::to_string(n) +
                             " exceeds dense budget " + std::to_string(budget));
  check_connected_interior(g, dom);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId v = dom.interior[i];
    A(i, i) = g.rate[v];
    const auto nbrs = g.neighbors(v);
    const auto ws = g.edge_weights(v);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      const std::int32_t j = dom.interior_index[nbrs[e]];
      if (j >= 0) A(i, j) -= ws[e];
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw ConfigError("exact_green: generator is not positive definite");

  GreenOperator op;
  op.interior = dom.interior;
  op.interior_index = dom.interior_index;
  op.G = llt.solve(Eigen::MatrixXd::Identity(n, n));

  op.sym_error = (op.G - op.G.transpose()).cwiseAbs().maxCoeff();
  // Backward-stable solve; the residual is verified on every column up to a
  // size cutoff, beyond it on a deterministic stride of 64 columns.
  const std::size_t stride = n <= 5000 ? 1 : std::max<std::size_t>(1, n / 64);
  Eigen::VectorXd col(n), res(n);
  double worst = 0.0;
  for (std::size_t j = 0; j < n; j += stride) {
    col = op.G.col(j);
    apply_neg_generator(g, dom, col, res);
    res[static_cast<Eigen::Index>(j)] -= 1.0;
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  op.residual_max = worst;
  return op;
}

Eigen::VectorXd green_column(const Graph& g, const Domain& dom, VertexId y,
                             double tol, std::size_t max_iter) {
  const std::size_t n = dom.interior.size();
  if (y < 0 || y >= g.n() || !dom.is_interior(y))
    throw ConfigError("green_column: target must be interior");
  check_connected_interior(g, dom);

  // Textbook conjugate gradients; the operator is a symmetric M-matrix.
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[dom.interior_index[y]] = 1.0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b, p = b, ap(n);
  double rs = r.squaredNorm();
  const double stop = tol * tol * b.squaredNorm();
  for (std::size_t it = 0; it < max_iter && rs > stop; ++it) {
    apply_neg_generator(g, dom, p, ap);
    const double alpha = rs / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  if (rs > stop)
    throw ResourceLimitError("green_column: CG failed to reach tolerance");
  return x;
}

std::vector<double> box_green_diagonal_spectral(int d, long N,
                                                RateModel rate_model) {
  if (d < 1 || d > 4) throw ConfigError("spectral diagonal: d must be 1..4");
  if (N < 0) throw ConfigError("spectral diagonal: N >= 0");
  const long side = 2 * N + 1;
  const long period = side + 1;  // 2N + 2
  std::vector<double> sin2(static_cast<std::size_t>(side) * side);
  for (long m = 1; m <= side; ++m)
    for (long xs = 0; xs < side; ++xs) {
      const double s =
          std::sin(kPi * static_cast<double>(m) * static_cast<double>(xs + 1) /
                   static_cast<double>(period));
      sin2[static_cast<std::size_t>(m - 1) * side + xs] =
          2.0 / static_cast<double>(period) * s * s;
    }
  std::vector<double> cosv(side);
  for (long m = 1; m <= side; ++m)
    cosv[m - 1] = std::cos(kPi * static_cast<double>(m) / static_cast<double>(period));

  // Diagonal is invariant under coordinate permutations and sign flips, so
  // only sorted nonnegative representatives are summed explicitly.
  std::vector<long> rep(d, 0);
  std::map<std::vector<long>, double> rep_val;
  const std::function<void(int, long)> enumerate = [&](int pos, long lo) {
    if (pos == d) {
      std::vector<long> m(d, 1);
      double total = 0.0;
      for (;;) {
        double num = 1.0, csum = 0.0;
        for (int i = 0; i < d; ++i) {
          num *= sin2[static_cast<std::size_t>(m[i] - 1) * side + (rep[i] + N)];
          csum += cosv[m[i] - 1];
        }
        const double lam = 1.0 - csum / static_cast<double>(d);
        total += num / lam;
        int i = d - 1;
        while (i >= 0 && ++m[i] > side) m[i--] = 1;
        if (i < 0) break;
      }
      rep_val[rep] = total;
      return;
    }
    for (long v = lo; v <= N; ++v) {
      rep[pos] = v;
      enumerate(pos + 1, v);
    }
  };
  enumerate(0, 0);

  std::int64_t n_int = 1;
  for (int i = 0; i < d; ++i) n_int *= side;
  std::vector<double> diag(static_cast<std::size_t>(n_int));
  const double scale = rate_model == RateModel::UnitTotal ? 1.0 : 1.0 / (2.0 * d);
  std::vector<long> x(d, -N), key(d);
  std::int64_t vid = 0;
  for (;;) {
    for (int i = 0; i < d; ++i) key[i] = std::labs(x[i]);
    std::sort(key.begin(), key.end());
    diag[vid++] = scale * rep_val.at(key);
    int i = d - 1;
    while (i >= 0 && ++x[i] > N) x[i--] = -N;
    if (i < 0) break;
  }
  return diag;
}

namespace {

// Scaled modified Bessel function i0e(x) = e^{-x} I_0(x) via the periodic
// trapezoid rule on (1/pi) int_0^pi exp(x (cos t - 1)) dt; spectrally accurate
// for analytic periodic integrands, node count grows like sqrt(x).
double bessel_i0e(double x) {
  const int nodes = 64 + 8 * static_cast<int>(std::ceil(std::sqrt(std::max(0.0, x))));
  const double h = kPi / nodes;
  double acc = 0.5 * (1.0 + std::exp(-2.0 * x));  // endpoints t = 0, pi
  for (int k = 1; k < nodes; ++k)
    acc += std::exp(x * (std::cos(h * k) - 1.0));
  return acc * h / kPi;
}

double green_constant_main(int d, double T, int panels_per_unit) {
  // 32-point Gauss-Legendre nodes/weights on [-1, 1].
  static const double gl_x[16] = {
      0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
      0.3318686022821276498, 0.4213512761306353453, 0.5068999089322293900,
      0.5877157572407623290, 0.6630442669302152009, 0.7321821187402896804,
      0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
      0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354,
      0.9972638618494815635};
  static const double gl_w[16] = {
      0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
      0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
      0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
      0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
      0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
      0.0070186100094700966};
  const auto f = [&](double t) {
    return std::pow(bessel_i0e(t / d), d);
  };
  const int panels = static_cast<int>(T) * panels_per_unit;
  const double w = T / panels;
  KahanSum total;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * w, half = 0.5 * w;
    for (int k = 0; k < 16; ++k)
      total.add(half * gl_w[k] *
                (f(mid - half * gl_x[k]) + f(mid + half * gl_x[k])));
  }
  return total.value();
}

// Tail int_T^inf i0e(t/d)^d dt from the asymptotic series
// i0e(x) ~ (2 pi x)^{-1/2} (1 + 1/(8x) + 9/(128 x^2) + 75/(1024 x^3)).
double green_constant_tail(int d, double T, double* next_term) {
  const double a1 = 1.0 / 8.0, a2 = 9.0 / 128.0, a3 = 75.0 / 1024.0;
  const double dd = d;
  const double c1 = dd * a1;
  const double c2 = dd * a2 + dd * (dd - 1.0) / 2.0 * a1 * a1;
  const double c3 = dd * a3 + dd * (dd - 1.0) * a1 * a2 +
                    dd * (dd - 1.0) * (dd - 2.0) / 6.0 * a1 * a1 * a1;
  const double pref = std::pow(dd / (2.0 * kPi), dd / 2.0);
  const double h = dd / 2.0;  // t-exponent offset
  const auto piece = [&](double c, int j) {
    return c * std::pow(dd, j) * std::pow(T, 1.0 - h - j) / (h - 1.0 + j);
  };
  const double tail = pref * (piece(1.0, 0) + piece(c1, 1) + piece(c2, 2) + piece(c3, 3));
  if (next_term) *next_term = std::abs(pref * piece(c3 * dd * a1, 4));
  return tail;
}

}  // namespace

double lattice_green_constant(int d, double* quad_error) {
  if (d < 3) throw ConfigError("lattice_green_constant: requires d >= 3");
  if (d > 12) throw ConfigError("lattice_green_constant: d unreasonably large");
  const double T = 400.0;
  const double coarse = green_constant_main(d, T, 1);
  const double fine = green_constant_main(d, T, 2);
  double tail_next = 0.0;
  const double tail = green_constant_tail(d, T, &tail_next);
  if (quad_error)
    *quad_error = std::abs(fine - coarse) + tail_next + 1e-13 * (fine + tail);
  return fine + tail;
}

double a_d_constant(int d) {
  if (d < 3) throw ConfigError("a_d_constant: requires d >= 3");
  return 0.5 * d * std::tgamma(0.5 * d - 1.0) * std::pow(kPi, -0.5 * d);
}

BrownianExitSample sample_brownian_exit(int d, std::span<const double> x0,
                                        double dt, Rng& rng) {
  if (d < 1 || d > 4) throw ConfigError("brownian exit: d must be 1..4");
  if (!(dt > 0.0 && dt < 0.5)) throw ConfigError("brownian exit: bad dt");
  std::array<double, 4> x{0, 0, 0, 0};
  for (int i = 0; i < d; ++i) {
    x[i] = x0.empty() ? 0.0 : x0[i];
    if (std::abs(x[i]) >= 1.0)
      throw ConfigError("brownian exit: start outside the open cube");
  }
  const double s = std::sqrt(dt);
  BrownianExitSample out;
  std::uint64_t steps = 0;
  for (;;) {
    bool outside = false;
    for (int i = 0; i < d; ++i) {
      x[i] += s * rng.normal();
      outside = outside || std::abs(x[i]) >= 1.0;
    }
    ++steps;
    if (outside) break;
  }
  out.tau_raw = static_cast<double>(steps) * dt;
  for (int i = 0; i < d; ++i) out.z[i] = std::clamp(x[i], -1.0, 1.0);
  return out;
}

std::array<double, 4> wos_exit_point(int d, std::span<const double> x0,
                                     double eps, Rng& rng) {
  if (d < 2 || d > 4) throw ConfigError("wos: d must be 2..4");
  if (!(eps > 0.0 && eps < 0.1)) throw ConfigError("wos: bad absorption shell");
  std::array<double, 4> x{0, 0, 0, 0};
  for (int i = 0; i < d; ++i) {
    x[i] = x0.empty() ? 0.0 : x0[i];
    if (std::abs(x[i]) > 1.0) throw ConfigError("wos: start outside the cube");
  }
  for (;;) {
    double r = 1.0;
    int face = 0;
    for (int i = 0; i < d; ++i) {
      const double gap = 1.0 - std::abs(x[i]);
      if (gap < r) {
        r = gap;
        face = i;
      }
    }
    if (r < eps) {
      x[face] = x[face] >= 0.0 ? 1.0 : -1.0;
      return x;
    }
    // Uniform direction: normalized Gaussian vector.
    std::array<double, 4> u{0, 0, 0, 0};
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int i = 0; i < d; ++i) {
        u[i] = rng.normal();
        norm2 += u[i] * u[i];
      }
    } while (norm2 < 1e-12);
    const double scale = r / std::sqrt(norm2);
    for (int i = 0; i < d; ++i) x[i] += scale * u[i];
  }
}

double HarmonicBank::q_at(std::span<const double> y, double* se) const {
  const std::size_t m = size();
  if (m == 0) throw ConfigError("harmonic bank: empty");
  const double expo = 2.0 - d;
  KahanSum acc, acc2;
  for (std::size_t k = 0; k < m; ++k) {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double dd = y[i] - z[k * d + i];
      r2 += dd * dd;
    }
    const double val = std::pow(std::max(r2, 1e-24), 0.5 * expo);
    acc.add(val);
    acc2.add(val * val);
  }
  const double mean = acc.value() / static_cast<double>(m);
  if (se) {
    const double var =
        std::max(0.0, acc2.value() / static_cast<double>(m) - mean * mean);
    *se = std::sqrt(var / static_cast<double>(m));
  }
  return mean;
}

HarmonicBank sample_harmonic_bank(int d, std::span<const double> x0,
                                  std::size_t n, double dt, std::uint64_t seed,
                                  int threads) {
  if (n == 0) throw ConfigError("harmonic bank: n must be positive");
  HarmonicBank bank;
  bank.d = d;
  bank.dt = dt;
  for (int i = 0; i < d; ++i) bank.x0[i] = x0.empty() ? 0.0 : x0[i];
  bank.z.resize(n * d);
  bank.tau_raw.resize(n);

  std::uint64_t salt = fnv1a64(&d, sizeof d);
  salt = fnv1a64(bank.x0.data(), sizeof bank.x0, salt);
  salt = fnv1a64(&dt, sizeof dt, salt);

  const auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      // Full 64-bit stream per sample so distinct banks never collide.
      Rng rng(seed, fnv1a64(&k, sizeof k, salt));
      const auto s = sample_brownian_exit(d, {bank.x0.data(), static_cast<std::size_t>(d)}, dt, rng);
      for (int i = 0; i < d; ++i) bank.z[k * d + i] = s.z[i];
      bank.tau_raw[k] = s.tau_raw;
    }
  };
  const int nt = std::max(1, threads);
  if (nt == 1 || n < 1024) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      const std::size_t lo = std::min(n, t * chunk);
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return bank;
}

QKernel::QKernel(int d, std::size_t bank_n, double dt, std::uint64_t seed,
                 double snap_tol, int threads)
    : d_(d), bank_n_(bank_n), dt_(dt), seed_(seed), threads_(threads) {
  if (d < 3 || d > 4) throw ConfigError("q kernel: d must be 3 or 4");
  if (!(snap_tol > 0.0)) throw ConfigError("q kernel: snap tolerance must be > 0");
  cell_ = 2.0 * snap_tol / std::sqrt(static_cast<double>(d));
}

QKernel::Key QKernel::snap(std::span<const double> x) const {
  Key key{0, 0, 0, 0};
  for (int i = 0; i < d_; ++i)
    key[i] = static_cast<std::int32_t>(std::llround(x[i] / cell_));
  return key;
}

const HarmonicBank& QKernel::bank(std::span<const double> x) {
  const Key key = snap(x);
  const auto it = banks_.find(key);
  if (it != banks_.end()) return it->second;
  std::array<double, 4> x0{0, 0, 0, 0};
  for (int i = 0; i < d_; ++i)
    x0[i] = std::clamp(key[i] * cell_, -0.999999, 0.999999);
  const std::uint64_t bank_seed =
      fnv1a64(key.data(), sizeof key, seed_ ^ 0x71c9a1b4d2e5f683ull);
  return banks_
      .emplace(key, sample_harmonic_bank(
                        d_, {x0.data(), static_cast<std::size_t>(d_)}, bank_n_,
                        dt_, bank_seed, threads_))
      .first->second;
}

double QKernel::q(std::span<const double> x, std::span<const double> y,
                  double* se) {
  return bank(x).q_at(y, se);
}

void QKernel::export_bank_csv(const std::string& path, std::span<const double> x) {
  const HarmonicBank& b = bank(x);
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("cannot open for writing: " + path);
  std::fprintf(f, "sample");
  for (int i = 0; i < b.d; ++i) std::fprintf(f, ",z%d", i + 1);
  std::fprintf(f, ",tau_raw\n");
  for (std::size_t k = 0; k < b.size(); ++k) {
    std::fprintf(f, "%zu", k);
    for (int i = 0; i < b.d; ++i) std::fprintf(f, ",%.17g", b.z[k * b.d + i]);
    std::fprintf(f, ",%.17g\n", b.tau_raw[k]);
  }
  std::fclose(f);
}

SlopeCheckResult potential_slope_check_2d(
    const std::function<BuiltDomain(long)>& build, std::span<const long> sizes) {
  if (sizes.size() < 3)
    throw ConfigError("slope check: need at least 3 sizes");
  SlopeCheckResult out;
  std::vector<double> logn;
  for (long N : sizes) {
    const BuiltDomain bd = build(N);
    const Eigen::VectorXd col = green_column(bd.graph, bd.domain, bd.center);
    out.sizes.push_back(N);
    out.diag.push_back(col[bd.domain.interior_index[bd.center]]);
    logn.push_back(std::log(static_cast<double>(N)));
  }
  out.fit = linear_fit(logn, out.diag);
  if (sizes.size() >= 4) {
    // The diagonal carries a strong O(1/N) boundary correction (lattices
    // whose graph balls are far from round feel it hardest), so with
    // enough sizes fit  G = a log N + b + c/N  and report a.  The plain
    // two-parameter fit is kept for r2.
    const auto m = static_cast<Eigen::Index>(sizes.size());
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      X(i, 0) = logn[static_cast<std::size_t>(i)];
      X(i, 1) = 1.0;
      X(i, 2) = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(i)]);
      y[i] = out.diag[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd xtx = X.transpose() * X;
    const Eigen::VectorXd beta = xtx.ldlt().solve(X.transpose() * y);
    out.fit.slope = beta[0];
    out.fit.intercept = beta[1];
    if (m > 3) {
      const double rss = (y - X * beta).squaredNorm();
      const double sigma2 = rss / static_cast<double>(m - 3);
      out.fit.se_slope = std::sqrt(sigma2 * xtx.inverse()(0, 0));
    } else {
      out.fit.se_slope = 0.0;  // exact interpolation, no residual dof
    }
  }
  return out;
}

GreenAudit audit_green_assumptions(const Graph& g, const Domain& dom,
                                   double diag_bound, std::size_t budget) {
  GreenAudit a;
  a.interior = dom.interior.size();
  a.diag_bound = diag_bound;
  a.min_conductance = std::numeric_limits<double>::infinity();
  a.min_rate = std::numeric_limits<double>::infinity();
  for (VertexId v : dom.interior) {
    a.min_rate = std::min(a.min_rate, g.rate[v]);
    a.max_rate = std::max(a.max_rate, g.rate[v]);
    for (double w : g.edge_weights(v)) {
      a.min_conductance = std::min(a.min_conductance, w);
      a.max_conductance = std::max(a.max_conductance, w);
    }
  }
  a.conductance_ratio = a.max_conductance / a.min_conductance;
  try {
    check_connected_interior(g, dom);
    a.connected = true;
  } catch (const ConfigError&) {
    a.connected = false;
  }
  if (a.connected) {
    const GreenOperator op = exact_green(g, dom, budget);
    a.max_diag = op.G.diagonal().maxCoeff();
    a.diag_margin = diag_bound - a.max_diag;
  }
  return a;
}

std::string GreenAudit::to_json() const {
  nlohmann::json j;
  j["interior"] = interior;
  j["connected"] = connected;
  j["min_conductance"] = min_conductance;
  j["max_conductance"] = max_conductance;
  j["conductance_ratio"] = conductance_ratio;
  j["min_rate"] = min_rate;
  j["max_rate"] = max_rate;
  j["max_diag"] = max_diag;
  j["diag_bound"] = diag_bound;
  j["diag_margin"] = diag_margin;
  return j.dump(2);
}

void save_green(const std::string& path_base, const GreenOperator& op) {
  const std::string bin = path_base + ".bin";
  std::FILE* f = std::fopen(bin.c_str(), "wb");
  if (!f) throw ConfigError("cannot open for writing: " + bin);
  const std::size_t n = op.n();
  std::vector<double> row(n);
  std::uint64_t checksum = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = op.G(i, j);
    checksum = fnv1a64(row.data(), n * sizeof(double), checksum);
    if (std::fwrite(row.data(), sizeof(double), n, f) != n) {
      std::fclose(f);
      throw ConfigError("short write: " + bin);
    }
  }
  std::fclose(f);
  nlohmann::json j;
  j["n"] = n;
  j["layout"] = "row-major-f64";
  j["interior"] = op.interior;
  j["residual_max"] = op.residual_max;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(checksum));
  j["fnv1a64"] = hex;
  std::ofstream sidecar(path_base + ".json");
  if (!sidecar) throw ConfigError("cannot open for writing: " + path_base + ".json");
  sidecar << j.dump(2) << "\n";
}

GreenOperator load_green(const std::string& path_base) {
  std::ifstream sidecar(path_base + ".json");
  if (!sidecar) throw ConfigError("cannot open: " + path_base + ".json");
  nlohmann::json j;
  sidecar >> j;
  const std::size_t n = j.at("n").get<std::size_t>();
  GreenOperator op;
  op.interior = j.at("interior").get<std::vector<VertexId>>();
  op.residual_max = j.at("residual_max").get<double>();
  VertexId max_id = 0;
  for (VertexId v : op.interior) max_id = std::max(max_id, v);
  op.interior_index.assign(max_id + 1, -1);
  for (std::size_t i = 0; i < op.interior.size(); ++i)
    op.interior_index[op.interior[i]] = static_cast<std::int32_t>(i);

  const std::string bin = path_base + ".bin";
  std::FILE* f = std::fopen(bin.c_str(), "rb");
  if (!f) throw ConfigError("cannot open: " + bin);
  op.G.resize(n, n);
  std::vector<double> row(n);
  std::uint64_t checksum = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fread(row.data(), sizeof(double), n, f) != n) {
      std::fclose(f);
      throw ConfigError("short read: " + bin);
    }
    checksum = fnv1a64(row.data(), n * sizeof(double), checksum);
    for (std::size_t jj = 0; jj < n; ++jj) op.G(i, jj) = row[jj];
  }
  std::fclose(f);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(checksum));
  if (j.at("fnv1a64").get<std::string>() != hex)
    throw ConfigError("green matrix checksum mismatch: " + bin);
  return op;
}

}  // namespace ltlab
