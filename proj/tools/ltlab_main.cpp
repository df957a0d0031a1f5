// ltlab command-line driver: thin wrappers over the library modules plus
// the canned experiments.  Exit codes: 0 success, 2 a statistical or
// acceptance check failed, 3 configuration/usage error, 4 resource budget
// exceeded, 1 unexpected failure.

#include <array>
#include <cstdio>
#include <exception>
#include <numbers>
#include <string>
#include <vector>

#include "ltlab/config.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/experiments.hpp"
#include "ltlab/gff.hpp"
#include "ltlab/green.hpp"
#include "ltlab/isomorph.hpp"
#include "ltlab/lattice.hpp"
#include "ltlab/limits.hpp"
#include "ltlab/numeric.hpp"
#include "ltlab/thickpoints.hpp"
#include "ltlab/walker.hpp"
#include "vendor/CLI11.hpp"

namespace {

using namespace ltlab;

ltlab::RateModel parse_model(const std::string& name) {
  if (name == "unit") return RateModel::UnitTotal;
  if (name == "conductance") return RateModel::Conductance;
  throw ConfigError("rate model must be unit or conductance");
}

int cmd_green(int d, long n, const std::string& model, bool spectral,
              bool constant, const std::string& save) {
  if (constant) {
    double err = 0.0;
    const double g = lattice_green_constant(d, &err);
    std::printf("g(%d) = %.17g   (quadrature error <= %.3g)\n", d, g, err);
    std::printf("a_%d  = %.17g\n", d, a_d_constant(d));
    return 0;
  }
  const RateModel rm = parse_model(model);
  if (spectral) {
    const auto diag = box_green_diagonal_spectral(d, n, rm);
    const LatticeBox box = build_box(d, n, rm);
    const auto idx = static_cast<std::size_t>(box.domain.interior_index[box.origin]);
    std::printf("interior = %zu\n", diag.size());
    std::printf("G(0,0) = %.17g\n", diag[idx]);
    return 0;
  }
  const LatticeBox box = build_box(d, n, rm);
  const GreenOperator green = exact_green(box.graph, box.domain);
  std::printf("interior = %zu\n", green.n());
  std::printf("G(0,0) = %.17g\n", green.at(box.origin, box.origin));
  std::printf("residual_max = %.3g  sym_error = %.3g\n", green.residual_max,
               green.sym_error);
  if (!save.empty()) {
    save_green(save, green);
    std::printf("saved %s.bin / %s.json\n", save.c_str(), save.c_str());
  }
  return 0;
}

int cmd_walk(int d, long n, std::size_t replicas, std::uint64_t seed,
             const std::string& model, const std::string& export_summary,
             const std::string& export_ltimes) {
  const LatticeBox box = build_box(d, n, parse_model(model));
  LocalTimeField field;
  field.attach(box.graph);
  std::vector<double> taus(replicas);
  std::vector<double> jumps(replicas);
  std::vector<WalkSummary> rows(replicas);
  for (std::size_t k = 0; k < replicas; ++k) {
    field.reset();
    run_until_exit(box.graph, box.domain, box.origin, seed, k, field);
    taus[k] = field.tau;
    jumps[k] = static_cast<double>(field.jumps);
    rows[k] = {k, field.tau, field.jumps, field.stop_vertex};
  }
  const MeanSe tau = mean_se(taus);
  const MeanSe jmp = mean_se(jumps);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  std::printf("replicas = %zu\n", replicas);
  std::printf("tau mean = %.17g  se = %.3g\n", tau.mean, tau.se);
  std::printf("tau/N^2 mean = %.17g  se = %.3g\n", tau.mean / n2, tau.se / n2);
  std::printf("jumps mean = %.17g\n", jmp.mean);
  if (!export_summary.empty()) {
    export_walk_summaries(export_summary, box.graph, rows);
    std::printf("wrote %s\n", export_summary.c_str());
  }
  if (!export_ltimes.empty()) {
    // Field of the last replica, in canonical site order.
    export_local_times(export_ltimes, box.graph, field);
    std::printf("wrote %s\n", export_ltimes.c_str());
  }
  return 0;
}

int cmd_gff(long n, std::size_t samples, std::uint64_t seed) {
  const LatticeBox box = build_box(2, n);
  const GreenOperator green = exact_green(box.graph, box.domain);
  const GffSampler sampler = make_dirichlet_sampler(green, box.graph.n());
  std::vector<double> sq(samples);
  const auto c = static_cast<Eigen::Index>(box.domain.interior_index[box.origin]);
  for (std::size_t k = 0; k < samples; ++k) {
    Rng rng(seed, StreamPurpose::Gff, k);
    const Eigen::VectorXd phi = sampler.sample_support(rng);
    sq[k] = phi[c] * phi[c];
  }
  const MeanSe var = mean_se(sq);
  const double exact = green.at(box.origin, box.origin);
  std::printf("samples = %zu\n", samples);
  std::printf("var(phi(0)) = %.17g  se = %.3g  exact = %.17g  z = %.3g\n",
              var.mean, var.se, exact, (var.mean - exact) / var.se);
  return 0;
}

int cmd_limits(int d, std::size_t bank_n, double dt, std::uint64_t seed,
               int threads, const std::string& save, const std::string& load,
               int pmf_k, double gumbel_t, bool run_moment) {
  TauSampleBank bank;
  if (!load.empty()) {
    bank = load_tau_bank(load);
    std::printf("loaded %zu samples (d=%d, dt=%g)\n", bank.size(), bank.d,
                bank.dt);
  } else {
    bank = sample_tau_bank(d, bank_n, dt, seed, threads);
  }
  const MeanSe tau = bank.tau_mean();
  std::printf("tau mean = %.17g  se = %.3g\n", tau.mean, tau.se);
  const double g = lattice_green_constant(bank.d);
  if (pmf_k >= 0) {
    const MeanSe p = critical_count_pmf(pmf_k, bank, g);
    std::printf("P(K = %d) = %.17g  se = %.3g\n", pmf_k, p.mean, p.se);
  }
  if (!std::isnan(gumbel_t)) {
    const MeanSe p = gumbel_cdf(gumbel_t, bank, g);
    std::printf("P(L <= %.17g) = %.17g  se = %.3g\n", gumbel_t, p.mean, p.se);
  }
  if (run_moment) {
    const std::vector<std::pair<double, double>> cube(
        static_cast<std::size_t>(bank.d), {-1.0, 1.0});
    const MMomentResult m1 =
        m_moment(1, bank.d, cube, g, 20000, 128, seed, threads);
    std::printf("m1 = %.17g  se = %.3g  (bank E[tau]/g = %.17g)\n", m1.value,
                m1.se, tau.mean / g);
  }
  if (!save.empty()) {
    save_tau_bank(bank, save);
    std::printf("saved %s.bin / %s.json\n", save.c_str(), save.c_str());
  }
  return 0;
}

int cmd_experiment(const std::string& id, const std::string& config_path,
                   const std::string& out_dir, std::uint64_t seed,
                   int threads) {
  Config cfg = config_path.empty() ? Config::parse_string("")
                                   : Config::parse_file(config_path);
  const ExperimentResult res = run_experiment(id, cfg, out_dir, seed, threads);
  for (const auto& f : res.outputs) {
    std::printf("wrote %s/%s\n", out_dir.c_str(), f.c_str());
  }
  std::printf("%s: %s\n", res.id.c_str(), res.pass ? "PASS" : "FAIL");
  return res.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local-time lab: walks, Green operators, fields, thick points"};
  app.require_subcommand(1);

  std::uint64_t seed = 12345;
  int threads = 1;
  std::string out_dir = "out";
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--out", out_dir, "output directory for experiments");

  // green
  auto* green = app.add_subcommand("green", "Green operators and constants");
  int g_d = 2;
  long g_n = 8;
  std::string g_model = "unit", g_save;
  bool g_spectral = false, g_constant = false;
  green->add_option("--d", g_d, "dimension")->check(CLI::Range(1, 4));
  green->add_option("--n", g_n, "box radius");
  green->add_option("--model", g_model, "unit|conductance");
  green->add_flag("--spectral", g_spectral, "diagonal via the sine eigenbasis");
  green->add_flag("--constant", g_constant, "print g(d) and a_d only");
  green->add_option("--save", g_save, "save operator to <stem>.bin/.json");

  // walk
  auto* walk = app.add_subcommand("walk", "exit-time walks and local times");
  int w_d = 2;
  long w_n = 16;
  std::size_t w_replicas = 100;
  std::string w_model = "unit", w_summary, w_ltimes;
  walk->add_option("--d", w_d)->check(CLI::Range(1, 4));
  walk->add_option("--n", w_n, "box radius");
  walk->add_option("--replicas", w_replicas);
  walk->add_option("--model", w_model, "unit|conductance");
  walk->add_option("--export-summaries", w_summary, "CSV path");
  walk->add_option("--export-ltimes", w_ltimes, "CSV path");

  // gff
  auto* gff = app.add_subcommand("gff", "field samples on a planar box");
  long f_n = 4;
  std::size_t f_samples = 1000;
  gff->add_option("--n", f_n, "box radius");
  gff->add_option("--samples", f_samples);

  // iso
  auto* iso = app.add_subcommand("iso", "isoradial potential slope");
  std::string i_family = "square";
  std::string i_sizes = "8,12,16,24";
  iso->add_option("--family", i_family, "square|triangular|hexagonal");
  iso->add_option("--sizes", i_sizes, "comma-separated radii");

  // thick
  auto* thick = app.add_subcommand("thick", "thick-point statistics");
  int t_d = 2;
  long t_n = 64;
  std::size_t t_replicas = 20;
  double t_a = 0.5;
  thick->add_option("--d", t_d)->check(CLI::Range(2, 4));
  thick->add_option("--n", t_n, "box radius");
  thick->add_option("--replicas", t_replicas);
  thick->add_option("--a", t_a, "thickness level");

  // limits
  auto* limits = app.add_subcommand("limits", "Brownian tau bank and limit laws");
  int l_d = 3;
  std::size_t l_bank = 4096;
  double l_dt = kBrownianDtDefault;
  std::string l_save, l_load;
  int l_pmf = -1;
  double l_gumbel = std::nan("");
  bool l_moment = false;
  limits->add_option("--d", l_d)->check(CLI::Range(1, 4));
  limits->add_option("--bank-n", l_bank, "samples to draw");
  limits->add_option("--dt", l_dt, "Euler step");
  limits->add_option("--save", l_save, "save bank to <stem>.bin/.json");
  limits->add_option("--load", l_load, "load bank from <stem>");
  limits->add_option("--pmf", l_pmf, "critical count k");
  limits->add_option("--gumbel", l_gumbel, "centered-max level t");
  limits->add_flag("--moment", l_moment, "first chain moment vs bank mean");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a canned experiment");
  std::string e_id, e_config;
  exp->add_option("--id", e_id, "experiment id")->required();
  exp->add_option("--config", e_config, "key = value file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (green->parsed()) {
      return cmd_green(g_d, g_n, g_model, g_spectral, g_constant, g_save);
    }
    if (walk->parsed()) {
      return cmd_walk(w_d, w_n, w_replicas, seed, w_model, w_summary, w_ltimes);
    }
    if (gff->parsed()) return cmd_gff(f_n, f_samples, seed);
    if (iso->parsed()) {
      Config cfg = Config::parse_string("slope.families = " + i_family +
                                        "\nslope.sizes = " + i_sizes + "\n");
      const ExperimentResult res =
          run_experiment("isoradial-slope", cfg, out_dir, seed, threads);
      std::printf("%s: %s\n", res.id.c_str(), res.pass ? "PASS" : "FAIL");
      return res.pass ? 0 : 2;
    }
    if (thick->parsed()) {
      Config cfg = Config::parse_string(
          t_d == 2 ? "thick2d.n = " + std::to_string(t_n) +
                         "\nthick2d.replicas = " + std::to_string(t_replicas) +
                         "\nthick2d.a = " + std::to_string(t_a) + "\n"
                   : "thickhd.d = " + std::to_string(t_d) +
                         "\nthickhd.n = " + std::to_string(t_n) +
                         "\nthickhd.replicas = " + std::to_string(t_replicas) +
                         "\nthickhd.a = " + std::to_string(t_a) + "\n");
      const ExperimentResult res = run_experiment(
          t_d == 2 ? "thick-2d" : "thick-hd", cfg, out_dir, seed, threads);
      std::printf("%s: %s\n", res.id.c_str(), res.pass ? "PASS" : "FAIL");
      return res.pass ? 0 : 2;
    }
    if (limits->parsed()) {
      return cmd_limits(l_d, l_bank, l_dt, seed, threads, l_save, l_load, l_pmf,
                        l_gumbel, l_moment);
    }
    if (exp->parsed()) {
      return cmd_experiment(e_id, e_config, out_dir, seed, threads);
    }
    std::fprintf(stderr, "no subcommand\n");
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ResourceLimitError& e) {
    std::fprintf(stderr, "resource limit: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected: %s\n", e.what());
    return 1;
  }
}
