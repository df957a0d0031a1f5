#include "ltlab/isomorph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "ltlab/errors.hpp"
#include "ltlab/numeric.hpp"
#include "ltlab/walker.hpp"

namespace ltlab {

namespace {

std::string join_terms(const char* head, const std::vector<std::string>& parts) {
  std::string out = head;
  out += '(';
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  out += ')';
  return out;
}

}  // namespace

TestFunctional TestFunctional::polynomial(
    std::vector<std::pair<VertexId, int>> powers) {
  std::vector<Term> terms;
  std::vector<std::string> parts;
  for (const auto& [v, p] : powers) {
    if (p < 1) throw ConfigError("functional: polynomial power must be >= 1");
    terms.push_back({v, static_cast<double>(p), 0.0});
    parts.push_back("v" + std::to_string(v) + "^" + std::to_string(p));
  }
  if (terms.empty()) throw ConfigError("functional: no terms");
  return TestFunctional(FunctionalKind::Polynomial, std::move(terms),
                        join_terms("poly", parts));
}

TestFunctional TestFunctional::exp_decay(
    std::vector<std::pair<VertexId, double>> rates) {
  std::vector<Term> terms;
  std::vector<std::string> parts;
  for (const auto& [v, c] : rates) {
    if (!(c >= 0.0)) throw ConfigError("functional: decay rate must be >= 0");
    terms.push_back({v, c, 0.0});
    parts.push_back("v" + std::to_string(v));
  }
  if (terms.empty()) throw ConfigError("functional: no terms");
  return TestFunctional(FunctionalKind::ExpDecay, std::move(terms),
                        join_terms("expdecay", parts));
}

TestFunctional TestFunctional::box_indicator(
    std::vector<std::tuple<VertexId, double, double>> boxes) {
  std::vector<Term> terms;
  std::vector<std::string> parts;
  for (const auto& [v, lo, hi] : boxes) {
    if (!(lo <= hi)) throw ConfigError("functional: empty box");
    terms.push_back({v, lo, hi});
    parts.push_back("v" + std::to_string(v));
  }
  if (terms.empty()) throw ConfigError("functional: no terms");
  return TestFunctional(FunctionalKind::BoxIndicator, std::move(terms),
                        join_terms("box", parts));
}

double TestFunctional::operator()(const std::vector<double>& field) const {
  switch (kind_) {
    case FunctionalKind::Polynomial: {
      double out = 1.0;
      for (const auto& t : terms_) {
        const double v = field[t.vertex];
        for (int p = 0; p < static_cast<int>(t.a); ++p) out *= v;
      }
      return out;
    }
    case FunctionalKind::ExpDecay: {
      double expo = 0.0;
      for (const auto& t : terms_) expo += t.a * field[t.vertex];
      return std::exp(-expo);
    }
    case FunctionalKind::BoxIndicator: {
      for (const auto& t : terms_) {
        const double v = field[t.vertex];
        if (v < t.a || v > t.b) return 0.0;
      }
      return 1.0;
    }
  }
  return 0.0;
}

nlohmann::json IdentityReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"label", r.label},
                         {"lhs_mean", r.lhs_mean},
                         {"lhs_se", r.lhs_se},
                         {"rhs_mean", r.rhs_mean},
                         {"rhs_se", r.rhs_se},
                         {"z", r.z},
                         {"threshold", r.threshold},
                         {"pass", r.pass}});
  }
  return {{"identity", identity},
          {"replicas", replicas},
          {"base_z", base_z},
          {"rows", rows_json},
          {"control_detected", control_detected},
          {"pass", pass}};
}

namespace {

double two_sample_z(const MeanSe& a, const MeanSe& b) {
  const double se = std::sqrt(a.se * a.se + b.se * b.se);
  if (se == 0.0) return a.mean == b.mean ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(a.mean - b.mean) / se;
}

double one_sample_z(const MeanSe& a, double exact) {
  if (a.se == 0.0) {
    return a.mean == exact ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(a.mean - exact) / a.se;
}

IdentityCheckRow make_row(std::string label, const MeanSe& lhs, const MeanSe& rhs,
                          double threshold) {
  IdentityCheckRow row;
  row.label = std::move(label);
  row.lhs_mean = lhs.mean;
  row.lhs_se = lhs.se;
  row.rhs_mean = rhs.mean;
  row.rhs_se = rhs.se;
  row.z = two_sample_z(lhs, rhs);
  row.threshold = threshold;
  row.pass = row.z <= threshold;
  return row;
}

IdentityCheckRow make_exact_row(std::string label, const MeanSe& side,
                                double exact, double threshold) {
  IdentityCheckRow row;
  row.label = std::move(label);
  row.lhs_mean = side.mean;
  row.lhs_se = side.se;
  row.rhs_mean = exact;
  row.rhs_se = 0.0;
  row.z = one_sample_z(side, exact);
  row.threshold = threshold;
  row.pass = row.z <= threshold;
  return row;
}

}  // namespace

IdentityReport verify_eisenbaum(const Graph& g, const Domain& dom, VertexId x0,
                                double s,
                                const std::vector<TestFunctional>& functionals,
                                std::size_t replicas, std::uint64_t seed,
                                double base_z) {
  if (s == 0.0) throw ConfigError("eisenbaum: tilt level s must be nonzero");
  if (replicas < 100) throw ConfigError("eisenbaum: needs >= 100 replicas");
  if (dom.interior_index[x0] < 0) {
    throw ConfigError("eisenbaum: start vertex must be interior");
  }

  const GreenOperator green = exact_green(g, dom);
  const GffSampler sampler = make_dirichlet_sampler(green, g.n());

  // The first probe f(v) = v[x0] has the same closed form on both sides:
  // E ell_{x0} + E (phi_{x0}+s)^2 / 2 = G(x0,x0) + (G(x0,x0) + s^2)/2.
  std::vector<TestFunctional> probes;
  probes.push_back(TestFunctional::polynomial({{x0, 1}}));
  for (const auto& f : functionals) probes.push_back(f);
  const double exact_probe = 1.5 * green.at(x0, x0) + 0.5 * s * s;

  const std::size_t nf = probes.size();
  std::vector<std::vector<double>> lhs_vals(nf), rhs_vals(nf);
  for (auto& v : lhs_vals) v.reserve(replicas);
  for (auto& v : rhs_vals) v.reserve(replicas);
  std::vector<double> rhs_unweighted;  // negative control: density dropped
  rhs_unweighted.reserve(replicas);

  LocalTimeField field;
  field.attach(g);
  std::vector<double> combined(g.n(), 0.0);
  for (std::size_t k = 0; k < replicas; ++k) {
    // Left side: walk local times plus an independent field.
    field.reset();
    run_until_exit(g, dom, x0, seed, k, field);
    Rng rng_l(seed, StreamPurpose::Gff, k);
    const std::vector<double> phi = sampler.sample(rng_l);
    for (std::size_t v = 0; v < combined.size(); ++v) {
      const double w = phi[v] + s;
      combined[v] = field.ltime[v] + 0.5 * w * w;
    }
    for (std::size_t i = 0; i < nf; ++i) lhs_vals[i].push_back(probes[i](combined));

    // Right side: field alone, reweighted by 1 + phi(x0)/s.
    Rng rng_r(seed, StreamPurpose::GffRhs, k);
    const std::vector<double> psi = sampler.sample(rng_r);
    for (std::size_t v = 0; v < combined.size(); ++v) {
      const double w = psi[v] + s;
      combined[v] = 0.5 * w * w;
    }
    const double density = 1.0 + psi[x0] / s;
    for (std::size_t i = 0; i < nf; ++i) {
      const double fv = probes[i](combined);
      rhs_vals[i].push_back(density * fv);
      if (i == 0) rhs_unweighted.push_back(fv);
    }
  }

  IdentityReport report;
  report.identity = "eisenbaum";
  report.replicas = replicas;
  report.base_z = base_z;
  const std::size_t n_rows = nf + 2;  // probes + two exact-value rows
  const double threshold = bonferroni_z(base_z, static_cast<int>(n_rows));

  MeanSe probe_lhs, probe_rhs;
  for (std::size_t i = 0; i < nf; ++i) {
    const MeanSe lhs = mean_se(lhs_vals[i]);
    const MeanSe rhs = mean_se(rhs_vals[i]);
    if (i == 0) {
      probe_lhs = lhs;
      probe_rhs = rhs;
    }
    report.rows.push_back(make_row(probes[i].label(), lhs, rhs, threshold));
  }
  report.rows.push_back(
      make_exact_row("lhs-vs-closed-form", probe_lhs, exact_probe, threshold));
  report.rows.push_back(
      make_exact_row("rhs-vs-closed-form", probe_rhs, exact_probe, threshold));

  // Negative control: with the density dropped, the right side of the probe
  // loses exactly G(x0,x0); the harness must notice at the same threshold.
  const MeanSe control = mean_se(rhs_unweighted);
  report.control_detected = two_sample_z(probe_lhs, control) > threshold;

  report.pass = report.control_detected;
  for (const auto& r : report.rows) report.pass = report.pass && r.pass;
  return report;
}

IdentityReport verify_ray_knight(const Graph& g, VertexId x0,
                                 const std::vector<double>& levels,
                                 std::size_t replicas, std::uint64_t seed,
                                 double base_z) {
  if (levels.empty()) throw ConfigError("ray-knight: no levels");
  for (double u : levels) {
    if (!(u > 0.0)) throw ConfigError("ray-knight: levels must be positive");
  }
  if (replicas < 100) throw ConfigError("ray-knight: needs >= 100 replicas");

  const GffSampler sampler = make_pinned_sampler(g, x0);
  const auto& support = sampler.support();
  const std::size_t nv = support.size();

  IdentityReport report;
  report.identity = "ray-knight";
  report.replicas = replicas;
  report.base_z = base_z;

  // Rows: per level and support vertex, first and second moments of the
  // two sides plus the exact mean of the bare local time.
  const std::size_t n_rows = levels.size() * nv * 3;
  const double threshold = bonferroni_z(base_z, static_cast<int>(n_rows));

  bool control_seen = false;
  LocalTimeField field;
  field.attach(g);
  for (std::size_t ui = 0; ui < levels.size(); ++ui) {
    const double u = levels[ui];
    const double shift = std::sqrt(2.0 * u);
    std::vector<std::vector<double>> lhs(nv), rhs(nv), bare(nv);
    for (auto& v : lhs) v.reserve(replicas);
    for (auto& v : rhs) v.reserve(replicas);
    for (auto& v : bare) v.reserve(replicas);

    for (std::size_t k = 0; k < replicas; ++k) {
      const std::uint64_t rep = ui * replicas + k;
      field.reset();
      run_until_local_time(g, x0, u, x0, seed, rep, field);
      Rng rng_l(seed, StreamPurpose::Gff, rep);
      const Eigen::VectorXd psi = sampler.sample_support(rng_l);
      Rng rng_r(seed, StreamPurpose::GffRhs, rep);
      const Eigen::VectorXd chi = sampler.sample_support(rng_r);
      for (std::size_t i = 0; i < nv; ++i) {
        const double ell = field.ltime[support[i]];
        const double a = ell + 0.5 * psi[static_cast<Eigen::Index>(i)] *
                                   psi[static_cast<Eigen::Index>(i)];
        const double w = chi[static_cast<Eigen::Index>(i)] + shift;
        lhs[i].push_back(a);
        rhs[i].push_back(0.5 * w * w);
        bare[i].push_back(ell);
      }
    }

    for (std::size_t i = 0; i < nv; ++i) {
      const std::string tag =
          "u=" + std::to_string(u) + ",y=" + std::to_string(support[i]);
      const MeanSe l1 = mean_se(lhs[i]);
      const MeanSe r1 = mean_se(rhs[i]);
      report.rows.push_back(make_row(tag + ",m1", l1, r1, threshold));

      std::vector<double> l2v(lhs[i].size()), r2v(rhs[i].size());
      for (std::size_t k = 0; k < lhs[i].size(); ++k) l2v[k] = lhs[i][k] * lhs[i][k];
      for (std::size_t k = 0; k < rhs[i].size(); ++k) r2v[k] = rhs[i][k] * rhs[i][k];
      report.rows.push_back(
          make_row(tag + ",m2", mean_se(l2v), mean_se(r2v), threshold));

      // Symmetric conductances: the stationary measure is uniform, so each
      // vertex accumulates mean local time exactly u by time tau_u.
      report.rows.push_back(
          make_exact_row(tag + ",mean-ell", mean_se(bare[i]), u, threshold));

      // Negative control: the bare local time (field half removed) must be
      // distinguishable from the right side -- the means differ by half the
      // pinned variance.
      if (two_sample_z(mean_se(bare[i]), r1) > threshold) control_seen = true;
    }
  }

  report.control_detected = control_seen;
  report.pass = control_seen;
  for (const auto& r : report.rows) report.pass = report.pass && r.pass;
  return report;
}

nlohmann::json DominationReport::to_json() const {
  return {{"u", u},
          {"replicas", replicas},
          {"min_margin", min_margin},
          {"band", band},
          {"alpha", alpha},
          {"pass", pass}};
}

DominationReport stochastic_domination_check(const Graph& g, VertexId x0,
                                             double u, std::size_t replicas,
                                             std::uint64_t seed, double alpha) {
  if (!(u > 0.0)) throw ConfigError("domination: level must be positive");
  if (replicas < 100) throw ConfigError("domination: needs >= 100 replicas");
  const GffSampler sampler = make_pinned_sampler(g, x0);
  const double shift = std::sqrt(2.0 * u);

  std::vector<double> m_walk, m_field;
  m_walk.reserve(replicas);
  m_field.reserve(replicas);
  LocalTimeField field;
  field.attach(g);
  for (std::size_t k = 0; k < replicas; ++k) {
    field.reset();
    run_until_local_time(g, x0, u, x0, seed, k, field);
    double mw = 0.0;
    for (VertexId v = 0; v < g.n(); ++v) {
      mw = std::max(mw, std::sqrt(field.ltime[v]));
    }
    m_walk.push_back(mw);

    Rng rng(seed, StreamPurpose::GffRhs, k);
    const std::vector<double> psi = sampler.sample(rng);
    double mf = 0.0;
    for (VertexId v = 0; v < g.n(); ++v) {
      mf = std::max(mf, std::abs(psi[v] + shift) / std::numbers::sqrt2);
    }
    m_field.push_back(mf);
  }

  std::sort(m_walk.begin(), m_walk.end());
  std::sort(m_field.begin(), m_field.end());

  // One-sided merge scan: domination means F_walk >= F_field pointwise, so
  // the minimum of (F_walk - F_field) over the pooled sample points must
  // stay above minus the two-sided DKW band.
  double min_margin = 0.0;
  std::size_t iw = 0, jf = 0;
  const auto nw = m_walk.size(), nf = m_field.size();
  while (iw < nw || jf < nf) {
    double t;
    if (jf >= nf || (iw < nw && m_walk[iw] <= m_field[jf])) {
      t = m_walk[iw];
    } else {
      t = m_field[jf];
    }
    while (iw < nw && m_walk[iw] <= t) ++iw;
    while (jf < nf && m_field[jf] <= t) ++jf;
    const double margin = static_cast<double>(iw) / static_cast<double>(nw) -
                          static_cast<double>(jf) / static_cast<double>(nf);
    min_margin = std::min(min_margin, margin);
  }

  DominationReport rep;
  rep.u = u;
  rep.replicas = replicas;
  rep.alpha = alpha;
  rep.band = dkw_epsilon(replicas, alpha / 2) + dkw_epsilon(replicas, alpha / 2);
  rep.min_margin = min_margin;
  rep.pass = min_margin >= -rep.band;
  return rep;
}

}  // namespace ltlab
