#include "smk/bayes.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "smk/error.hpp"
#include "smk/kernel_io.hpp"
#include "smk/metrics.hpp"

namespace smk {
namespace {

constexpr double kConfidence = 0.99;

MassEstimate estimate(std::size_t hits, std::size_t samples) {
  MassEstimate m;
  m.hits = hits;
  m.samples = samples;
  m.mass = samples ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
  m.ci = wilson_interval(hits, samples, kConfidence);
  return m;
}

void require_samples(std::size_t mc_samples) {
  if (mc_samples < 1) config_error("bad_mc_samples", "mc_samples must be positive");
}

}  // namespace

DirichletSmk::DirichletSmk(StateSpace states, std::size_t k_max, std::vector<double> concentration)
    : states_(std::move(states)), k_max_(k_max), concentration_(std::move(concentration)) {
  if (k_max_ < 1) config_error("bad_k_max", "k_max must be positive");
  if (concentration_.size() != size() * row_cells()) {
    config_error("shape_mismatch", "concentration table has the wrong size");
  }
  for (double a : concentration_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      config_error("bad_concentration", "Dirichlet concentrations must be finite and positive");
    }
  }
}

DirichletSmk DirichletSmk::uniform(StateSpace states, std::size_t k_max, double alpha) {
  const std::size_t n = states.size();
  return DirichletSmk(std::move(states), k_max, std::vector<double>(n * n * k_max, alpha));
}

std::vector<std::uint64_t> transition_counts(const Trajectory& traj, std::size_t states,
                                             std::size_t k_max) {
  std::vector<std::uint64_t> counts(states * states * k_max, 0);
  for (std::size_t l = 1; l <= traj.n(); ++l) {
    const double s = traj.sojourn(l);
    const double k = std::round(s);
    if (std::abs(s - k) > 1e-9 || k < 1.0 || k > static_cast<double>(k_max)) {
      config_error("trajectory_exceeds_support",
                   "trajectory exceeds prior support at step " + std::to_string(l));
    }
    const std::size_t x = traj.states[l - 1];
    const std::size_t y = traj.states[l];
    if (x >= states || y >= states) config_error("trajectory_format", "state index out of range");
    ++counts[(x * states + y) * k_max + static_cast<std::size_t>(k) - 1];
  }
  return counts;
}

DirichletSmk posterior_update(const DirichletSmk& prior, const Trajectory& traj) {
  const auto counts = transition_counts(traj, prior.size(), prior.k_max());
  std::vector<double> post(prior.concentration().begin(), prior.concentration().end());
  for (std::size_t i = 0; i < post.size(); ++i) post[i] += static_cast<double>(counts[i]);
  return DirichletSmk(prior.states(), prior.k_max(), std::move(post));
}

DiscreteSmk posterior_sample(const DirichletSmk& posterior, Rng& rng) {
  const std::size_t cells = posterior.row_cells();
  std::vector<double> table(posterior.size() * cells);
  for (std::size_t x = 0; x < posterior.size(); ++x) {
    const auto alpha = posterior.row(x);
    double total = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      table[x * cells + c] = rng.gamma(alpha[c]);
      total += table[x * cells + c];
    }
    if (!(total > 0.0)) {
      // Every gamma draw underflowed; only possible for tiny concentrations.
      numeric_error("dirichlet_underflow", "Dirichlet draw underflowed to zero");
    }
    for (std::size_t c = 0; c < cells; ++c) table[x * cells + c] /= total;
  }
  return DiscreteSmk(posterior.states(), posterior.k_max(), std::move(table));
}

std::vector<DiscreteSmk> posterior_sample(const DirichletSmk& posterior, std::uint64_t seed,
                                          std::size_t count) {
  std::vector<DiscreteSmk> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, "posterior", i);
    out.push_back(posterior_sample(posterior, rng));
  }
  return out;
}

DiscreteSmk posterior_mean(const DirichletSmk& posterior) {
  const std::size_t cells = posterior.row_cells();
  std::vector<double> table(posterior.size() * cells);
  for (std::size_t x = 0; x < posterior.size(); ++x) {
    const auto alpha = posterior.row(x);
    double total = 0.0;
    for (double a : alpha) total += a;
    for (std::size_t c = 0; c < cells; ++c) table[x * cells + c] = alpha[c] / total;
  }
  return DiscreteSmk(posterior.states(), posterior.k_max(), std::move(table));
}

MassEstimate prior_mass_kl(const DirichletSmk& prior, const DiscreteSmk& q0, double eps,
                           std::size_t n, std::size_t mc_samples, std::uint64_t seed,
                           bool include_initial) {
  require_samples(mc_samples);
  if (!(eps > 0.0)) config_error("bad_epsilon", "epsilon must be positive");
  if (!(prior.states() == q0.states()) || prior.k_max() != q0.k_max()) {
    config_error("kernel_mismatch", "q0 is not on the prior's grid");
  }
  const Kernel k0{q0};
  const double budget = static_cast<double>(n) * eps * eps;
  KlOptions options;
  options.include_initial = include_initial;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    Rng rng(seed, "prior-kl", i);
    const Kernel q{posterior_sample(prior, rng)};
    // K is affine in n; its n = 0 evaluation is cheap and screens most draws
    // before the variance recursion runs.
    const KlFunctionals f0 = kl_functionals(k0, q, 0, options);
    if (f0.infinite) continue;
    if (f0.initial_kl + static_cast<double>(n) * f0.per_step_kl > budget) continue;
    hits += in_kl_neighborhood(q, k0, eps, n, options).inside;
  }
  return estimate(hits, mc_samples);
}

bool FloorSieve::contains(const DiscreteSmk& q) const {
  for (double v : q.table()) {
    if (v < floor) return false;
  }
  return true;
}

double default_sieve_floor(std::size_t n) {
  const double d = static_cast<double>(n);
  return 1.0 / (d * d * d * d);
}

MassEstimate sieve_mass(const DirichletSmk& prior, const FloorSieve& sieve,
                        std::size_t mc_samples, std::uint64_t seed) {
  require_samples(mc_samples);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    Rng rng(seed, "sieve", i);
    outside += !sieve.contains(posterior_sample(prior, rng));
  }
  return estimate(outside, mc_samples);
}

double default_eps_rule(std::size_t n) {
  const double d = static_cast<double>(n);
  return std::sqrt(std::log(d) / d);
}

ConcentrationCurve concentration_curve(const DiscreteSmk& q0, const DirichletSmk& prior,
                                       const ConcentrationConfig& config) {
  if (config.replications < 1) config_error("bad_replications", "replications must be positive");
  require_samples(config.mc_samples);
  if (!(prior.states() == q0.states()) || prior.k_max() != q0.k_max()) {
    config_error("kernel_mismatch", "q0 is not on the prior's grid");
  }
  for (double m : config.m_values) {
    if (!(m >= 0.0)) config_error("bad_m", "M must be >= 0");
  }
  const Kernel k0{q0};
  const Matrix p0 = emc_transition(k0);
  const Vector nu = config.nu_star ? *config.nu_star
                                   : minorization(p0, smallest_minorizing_k(p0), 1).nu_star;
  const TransitionSampler sampler(k0);
  const double z = normal_quantile_two_sided(kConfidence);

  ConcentrationCurve curve;
  const std::size_t nm = config.m_values.size();
  for (std::size_t n : config.n_grid) {
    const double eps = config.eps_rule(n);
    const std::string tag = std::to_string(n);
    // Per replication and M: fraction of posterior draws outside the ball.
    std::vector<Moments> per_m(nm);
    std::vector<std::size_t> pooled(nm, 0);
    for (std::size_t r = 0; r < config.replications; ++r) {
      Rng data(config.seed, "curve/data/" + tag, r);
      const Trajectory traj = sample_trajectory(sampler, n, InitialLaw::stationary(), data);
      const DirichletSmk post = posterior_update(prior, traj);
      std::vector<std::size_t> outside(nm, 0);
      Rng draws(config.seed, "curve/posterior/" + tag, r);
      for (std::size_t s = 0; s < config.mc_samples; ++s) {
        const Kernel q{posterior_sample(post, draws)};
        const double d = semi_distance(hellinger_sq(k0, q), nu);
        for (std::size_t j = 0; j < nm; ++j) outside[j] += d > config.m_values[j] * eps;
      }
      for (std::size_t j = 0; j < nm; ++j) {
        per_m[j].add(static_cast<double>(outside[j]) / static_cast<double>(config.mc_samples));
        pooled[j] += outside[j];
      }
    }
    for (std::size_t j = 0; j < nm; ++j) {
      ConcentrationRow row;
      row.n = n;
      row.eps_n = eps;
      row.m = config.m_values[j];
      row.posterior_mass_outside = per_m[j].mean();
      row.mc_samples = config.mc_samples;
      row.replications = config.replications;
      // Spread across replications, floored by the binomial noise of the
      // pooled draws so that an all-zero column still carries its MC error.
      const double spread = config.replications > 1 ? z * per_m[j].mean_se() : 0.0;
      const double binomial =
          wilson_interval(pooled[j], config.replications * config.mc_samples, kConfidence)
              .half_width();
      row.ci = std::max(spread, binomial);
      curve.rows.push_back(row);
    }
  }
  curve.monotone.assign(nm, true);
  for (std::size_t i = 1; i < config.n_grid.size(); ++i) {
    for (std::size_t j = 0; j < nm; ++j) {
      const auto& prev = curve.rows[(i - 1) * nm + j];
      const auto& cur = curve.rows[i * nm + j];
      if (cur.posterior_mass_outside > prev.posterior_mass_outside + prev.ci + cur.ci) {
        curve.monotone[j] = false;
      }
    }
  }
  return curve;
}

void write_concentration_csv(const ConcentrationCurve& curve, std::ostream& out) {
  out << "n,eps_n,M,posterior_mass_outside,mc_samples,ci\n";
  for (const auto& r : curve.rows) {
    out << r.n << ',' << format_double(r.eps_n) << ',' << format_double(r.m) << ','
        << format_double(r.posterior_mass_outside) << ',' << r.mc_samples << ','
        << format_double(r.ci) << '\n';
  }
}

FeasibilityReport h3_h4_feasibility(const DirichletSmk& prior, const DiscreteSmk& q0,
                                    const FeasibilityConfig& config) {
  FeasibilityReport report;
  std::vector<MassEstimate> kl_mass, sieve;
  for (std::size_t n : config.n_grid) {
    const double eps = config.eps_rule(n);
    kl_mass.push_back(prior_mass_kl(prior, q0, eps, n, config.mc_samples,
                                    derive_seed(config.seed, "feasibility/kl", n)));
    sieve.push_back(sieve_mass(prior, FloorSieve{config.sieve_floor(n)}, config.mc_samples,
                               derive_seed(config.seed, "feasibility/sieve", n)));
  }
  for (double c : config.c_grid) {
    bool all = true;
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
      const std::size_t n = config.n_grid[i];
      FeasibilityRow row;
      row.c = c;
      row.n = n;
      row.eps_n = config.eps_rule(n);
      const double rate = static_cast<double>(n) * row.eps_n * row.eps_n;
      row.prior_kl = kl_mass[i];
      row.h3_bound = std::exp(-c * rate);
      row.h3_holds = row.prior_kl.mass > row.h3_bound;
      row.sieve = sieve[i];
      row.h4_bound = std::exp(-2.0 * (c + 1.0) * rate);
      row.h4_holds = row.sieve.mass <= row.h4_bound;
      row.feasible = row.h3_holds && row.h4_holds;
      all = all && row.feasible;
      report.rows.push_back(row);
    }
    if (all && !config.n_grid.empty()) report.feasible_c.push_back(c);
  }
  return report;
}

void write_feasibility_csv(const FeasibilityReport& report, std::ostream& out) {
  out << "c,n,eps_n,prior_kl_mass,prior_kl_ci,h3_bound,h3_holds,sieve_mass,sieve_ci,h4_bound,"
         "h4_holds,feasible\n";
  for (const auto& r : report.rows) {
    out << format_double(r.c) << ',' << r.n << ',' << format_double(r.eps_n) << ','
        << format_double(r.prior_kl.mass) << ',' << format_double(r.prior_kl.ci.half_width())
        << ',' << format_double(r.h3_bound) << ',' << (r.h3_holds ? "true" : "false") << ','
        << format_double(r.sieve.mass) << ',' << format_double(r.sieve.ci.half_width()) << ','
        << format_double(r.h4_bound) << ',' << (r.h4_holds ? "true" : "false") << ','
        << (r.feasible ? "true" : "false") << '\n';
  }
}

}  // namespace smk
