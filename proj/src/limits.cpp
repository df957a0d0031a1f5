#include "ltlab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

#include "ltlab/errors.hpp"
#include "ltlab/green.hpp"
#include "ltlab/rng.hpp"
#include "vendor/json.hpp"

namespace ltlab {

std::uint64_t stirling_partition(int k, int q) {
  if (k < 0 || q < 0) throw ConfigError("stirling: negative argument");
  if (q > k) return 0;
  if (k == 0) return 1;  // q == 0 here
  if (q == 0) return 0;
  // Rolling row of S(i, *) for i = 1..k.
  std::vector<std::uint64_t> row(static_cast<std::size_t>(q) + 1, 0);
  row[std::min(q, 1)] = 1;  // S(1,1) = 1
  for (int i = 2; i <= k; ++i) {
    for (int j = std::min(i, q); j >= 1; --j) {
      std::uint64_t scaled = 0;
      if (__builtin_mul_overflow(row[static_cast<std::size_t>(j)],
                                 static_cast<std::uint64_t>(j), &scaled) ||
          __builtin_add_overflow(scaled, row[static_cast<std::size_t>(j) - 1],
                                 &row[static_cast<std::size_t>(j)])) {
        throw OverflowError("stirling: partition count exceeds 64 bits");
      }
    }
  }
  return row[static_cast<std::size_t>(q)];
}

double poisson_moment(int k, double lambda) {
  if (k < 0) throw ConfigError("poisson moment: negative order");
  if (!(lambda >= 0.0)) throw ConfigError("poisson moment: negative mean");
  if (k == 0) return 1.0;
  KahanSum sum;
  double lam_pow = 1.0;
  for (int q = 1; q <= k; ++q) {
    lam_pow *= lambda;
    sum.add(static_cast<double>(stirling_partition(k, q)) * lam_pow);
  }
  return sum.value();
}

double erlang_tail(int k, double theta, double T) {
  if (k < 1) throw ConfigError("erlang tail: k must be >= 1");
  if (!(theta > 0.0)) throw ConfigError("erlang tail: scale must be positive");
  if (T <= 0.0) return 1.0;
  const double x = T / theta;
  double term = 1.0;
  KahanSum sum;
  sum.add(1.0);
  for (int j = 1; j < k; ++j) {
    term *= x / j;
    sum.add(term);
  }
  return std::exp(-x) * sum.value();
}

GammaTailBound gamma_tail_bound(int k, int p, double theta, double T) {
  if (p < 1) throw ConfigError("gamma tail bound: p must be >= 1");
  GammaTailBound out;
  out.lhs = std::pow(erlang_tail(k, theta, T), p);
  out.rhs = erlang_tail(p * (k - 1) + 1, theta, p * T);
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

std::vector<double> TauSampleBank::tau_over_g(double g) const {
  if (!(g > 0.0)) throw ConfigError("tau bank: g must be positive");
  std::vector<double> out(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) out[i] = tau[i] / g;
  return out;
}

MeanSe TauSampleBank::tau_mean() const { return mean_se(tau); }

TauSampleBank sample_tau_bank(int d, std::size_t n, double dt,
                              std::uint64_t seed, int threads) {
  if (d < 1 || d > 4) throw ConfigError("tau bank: d must be 1..4");
  const std::array<double, 4> origin{0, 0, 0, 0};
  HarmonicBank hb = sample_harmonic_bank(
      d, {origin.data(), static_cast<std::size_t>(d)}, n, dt, seed, threads);
  TauSampleBank bank;
  bank.d = d;
  bank.dt = dt;
  bank.tau_raw = std::move(hb.tau_raw);
  bank.z = std::move(hb.z);
  bank.tau.resize(n);
  // The walk-matched clock runs d times faster than the standard Brownian
  // one; the scaling is exact in floating point (multiplication by a small
  // integer).
  for (std::size_t i = 0; i < n; ++i) {
    bank.tau[i] = static_cast<double>(d) * bank.tau_raw[i];
  }
  return bank;
}

void save_tau_bank(const TauSampleBank& bank, const std::string& stem) {
  const std::string bin = stem + ".bin";
  std::FILE* f = std::fopen(bin.c_str(), "wb");
  if (!f) throw ConfigError("cannot open for writing: " + bin);
  const std::size_t n = bank.size();
  std::uint64_t checksum = 0xcbf29ce484222325ull;
  checksum = fnv1a64(bank.tau_raw.data(), n * sizeof(double), checksum);
  checksum = fnv1a64(bank.z.data(), bank.z.size() * sizeof(double), checksum);
  bool ok = std::fwrite(bank.tau_raw.data(), sizeof(double), n, f) == n;
  ok = ok && std::fwrite(bank.z.data(), sizeof(double), bank.z.size(), f) ==
                 bank.z.size();
  std::fclose(f);
  if (!ok) throw ConfigError("short write: " + bin);

  nlohmann::json j;
  j["n"] = n;
  j["d"] = bank.d;
  j["dt"] = bank.dt;
  j["layout"] = "tau_raw[n] z[n*d] f64";
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(checksum));
  j["fnv1a64"] = hex;
  std::ofstream sidecar(stem + ".json");
  if (!sidecar) throw ConfigError("cannot open for writing: " + stem + ".json");
  sidecar << j.dump(2) << "\n";
}

TauSampleBank load_tau_bank(const std::string& stem) {
  std::ifstream sidecar(stem + ".json");
  if (!sidecar) throw ConfigError("cannot open: " + stem + ".json");
  nlohmann::json j;
  sidecar >> j;
  TauSampleBank bank;
  bank.d = j.at("d").get<int>();
  bank.dt = j.at("dt").get<double>();
  const auto n = j.at("n").get<std::size_t>();
  if (bank.d < 1 || bank.d > 4) throw ConfigError("tau bank: bad dimension");

  const std::string bin = stem + ".bin";
  std::ifstream f(bin, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + bin);
  bank.tau_raw.resize(n);
  bank.z.resize(n * static_cast<std::size_t>(bank.d));
  f.read(reinterpret_cast<char*>(bank.tau_raw.data()),
         static_cast<std::streamsize>(n * sizeof(double)));
  f.read(reinterpret_cast<char*>(bank.z.data()),
         static_cast<std::streamsize>(bank.z.size() * sizeof(double)));
  if (!f) throw ConfigError("short read: " + bin);

  std::uint64_t checksum = 0xcbf29ce484222325ull;
  checksum = fnv1a64(bank.tau_raw.data(), n * sizeof(double), checksum);
  checksum = fnv1a64(bank.z.data(), bank.z.size() * sizeof(double), checksum);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(checksum));
  if (j.at("fnv1a64").get<std::string>() != hex) {
    throw ConfigError("tau bank: checksum mismatch in " + bin);
  }
  bank.tau.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    bank.tau[i] = static_cast<double>(bank.d) * bank.tau_raw[i];
  }
  return bank;
}

namespace {

MeanSe bank_average(const TauSampleBank& bank, double g,
                    double (*transform)(double r, double param), double param) {
  if (!(g > 0.0)) throw ConfigError("tau bank: g must be positive");
  if (bank.size() == 0) throw ConfigError("tau bank: empty");
  std::vector<double> vals(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    vals[i] = transform(bank.tau[i] / g, param);
  }
  return mean_se(vals);
}

}  // namespace

MeanSe subcritical_mass_cdf(double t, const TauSampleBank& bank, double g) {
  return bank_average(
      bank, g, [](double r, double t_) { return r <= t_ ? 1.0 : 0.0; }, t);
}

MeanSe critical_count_pmf(int k, const TauSampleBank& bank, double g) {
  if (k < 0) throw ConfigError("critical pmf: negative count");
  return bank_average(
      bank, g,
      [](double r, double kd) {
        double term = std::exp(-r);
        const int k_ = static_cast<int>(kd);
        for (int j = 1; j <= k_; ++j) term *= r / j;
        return term;
      },
      static_cast<double>(k));
}

MeanSe gumbel_cdf(double t, const TauSampleBank& bank, double g) {
  // At t = 0 the weight e^{-t/g} is exactly 1 and the average reduces
  // bitwise to the k = 0 critical probability.
  const double w = std::exp(-t / g);
  return bank_average(
      bank, g, [](double r, double w_) { return std::exp(-r * w_); }, w);
}

MMomentResult m_moment(int k, int d,
                       const std::vector<std::pair<double, double>>& region,
                       double g, std::size_t mc_samples,
                       std::size_t wos_samples, std::uint64_t seed, int threads,
                       const std::pair<double, double>* time_window) {
  if (k < 1 || k > 6) throw ConfigError("m-moment: order must be 1..6");
  if (d < 3 || d > 4) throw ConfigError("m-moment: d must be 3 or 4");
  if (static_cast<int>(region.size()) != d) {
    throw ConfigError("m-moment: region dimension mismatch");
  }
  if (mc_samples < 100) throw ConfigError("m-moment: needs >= 100 samples");
  if (wos_samples < 16) throw ConfigError("m-moment: needs >= 16 exit draws");
  if (!(g > 0.0)) throw ConfigError("m-moment: g must be positive");
  double volume = 1.0;
  for (const auto& [lo, hi] : region) {
    if (!(lo < hi) || lo < -1.0 || hi > 1.0) {
      throw ConfigError("m-moment: region must be a nonempty sub-box of the cube");
    }
    volume *= hi - lo;
  }
  double window_factor = 1.0;
  if (time_window) {
    const auto [lo, hi] = *time_window;
    if (!(0.0 <= lo && lo < hi)) throw ConfigError("m-moment: bad time window");
    window_factor = std::exp(-lo / g) - std::exp(-hi / g);
  }

  const double expo = 2.0 - d;
  const double ad = a_d_constant(d);
  const std::size_t nodes = static_cast<std::size_t>(k) + 1;  // origin + draws

  std::vector<double> values(mc_samples);
  const auto worker = [&](std::size_t lo_i, std::size_t hi_i) {
    std::vector<double> y(nodes * static_cast<std::size_t>(d), 0.0);
    std::vector<double> ghat(nodes * nodes);
    std::vector<char> have(nodes * nodes);
    std::vector<int> perm(static_cast<std::size_t>(k));
    for (std::size_t i = lo_i; i < hi_i; ++i) {
      Rng rng(seed, StreamPurpose::Scratch, i);
      for (int j = 1; j <= k; ++j) {
        for (int c = 0; c < d; ++c) {
          const auto [lo, hi] = region[static_cast<std::size_t>(c)];
          y[static_cast<std::size_t>(j * d + c)] = lo + (hi - lo) * rng.uniform();
        }
      }
      std::fill(have.begin(), have.end(), 0);
      // One unbiased harmonic average per ordered chain edge; products over
      // a permutation touch each edge once, so factors stay independent.
      const auto edge = [&](int a, int b) -> double {
        const std::size_t key =
            static_cast<std::size_t>(a) * nodes + static_cast<std::size_t>(b);
        if (have[key]) return ghat[key];
        const double* ya = &y[static_cast<std::size_t>(a * d)];
        const double* yb = &y[static_cast<std::size_t>(b * d)];
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double dd = yb[c] - ya[c];
          r2 += dd * dd;
        }
        r2 = std::max(r2, 1e-24);
        const double direct = std::pow(r2, 0.5 * expo);
        KahanSum qsum;
        for (std::size_t w = 0; w < wos_samples; ++w) {
          const auto zex = wos_exit_point(
              d, {ya, static_cast<std::size_t>(d)}, 1e-6, rng);
          double rz2 = 0.0;
          for (int c = 0; c < d; ++c) {
            const double dd = yb[c] - zex[static_cast<std::size_t>(c)];
            rz2 += dd * dd;
          }
          rz2 = std::max(rz2, 1e-24);
          qsum.add(std::pow(rz2, 0.5 * expo));
        }
        const double val =
            direct - qsum.value() / static_cast<double>(wos_samples);
        ghat[key] = val;
        have[key] = 1;
        return val;
      };

      std::iota(perm.begin(), perm.end(), 1);
      KahanSum chain_sum;
      do {
        double prod = 1.0;
        int prev = 0;
        for (int j = 0; j < k; ++j) {
          prod *= edge(prev, perm[static_cast<std::size_t>(j)]);
          prev = perm[static_cast<std::size_t>(j)];
        }
        chain_sum.add(prod);
      } while (std::next_permutation(perm.begin(), perm.end()));

      double scale = window_factor * ad / g * volume;
      double total = chain_sum.value();
      for (int j = 0; j < k; ++j) total *= scale;
      values[i] = total;
    }
  };

  const int nt = std::max(1, threads);
  if (nt == 1 || mc_samples < 512) {
    worker(0, mc_samples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (mc_samples + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      const std::size_t lo = std::min(mc_samples, t * chunk);
      const std::size_t hi = std::min(mc_samples, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  const MeanSe ms = mean_se(values);
  MMomentResult out;
  out.k = k;
  out.value = ms.mean;
  out.se = ms.se;
  out.samples = mc_samples;
  return out;
}

}  // namespace ltlab
