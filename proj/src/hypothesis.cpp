#include "smk/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string_view>

#include "smk/error.hpp"
#include "smk/kernel_io.hpp"
#include "smk/stats.hpp"

namespace smk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSeparationSlack = 1e-12;

void hash_doubles(std::uint64_t& h, std::span<const double> values) {
  const std::string_view bytes(reinterpret_cast<const char*>(values.data()),
                               values.size() * sizeof(double));
  h = fnv1a(bytes) ^ splitmix64(h);
}

double nu_distance(const Kernel& a, const Kernel& b, const Vector& nu) {
  return semi_distance(hellinger_sq(a, b), nu);
}

// Multiplicative perturbation of a probability row on the Hellinger sphere:
// with E_q[g] = 0 and E_q[g^2] = 1, the row q (cos t + sin t g)^2 is again a
// probability row and its squared Hellinger distance to q is exactly 1 - cos t.
std::vector<double> perturb_row(std::span<const double> row, double theta, Rng& rng) {
  std::vector<std::size_t> support;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] > 0.0) support.push_back(c);
  }
  std::vector<double> out(row.begin(), row.end());
  if (support.size() < 2 || theta <= 0.0) return out;
  std::vector<double> g(support.size());
  for (int shrink = 0; shrink < 60; ++shrink, theta *= 0.5) {
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    for (int attempt = 0; attempt < 50; ++attempt) {
      double mean = 0.0;
      for (std::size_t i = 0; i < support.size(); ++i) {
        g[i] = rng.normal();
        mean += row[support[i]] * g[i];
      }
      double var = 0.0;
      for (std::size_t i = 0; i < support.size(); ++i) {
        g[i] -= mean;
        var += row[support[i]] * g[i] * g[i];
      }
      if (!(var > 0.0)) continue;
      const double scale = 1.0 / std::sqrt(var);
      bool ok = true;
      double total = 0.0;
      for (std::size_t i = 0; i < support.size() && ok; ++i) {
        const double v = ct + st * g[i] * scale;
        if (v < 0.0) {
          ok = false;
          break;
        }
        out[support[i]] = row[support[i]] * v * v;
        total += out[support[i]];
      }
      if (!ok) continue;
      for (std::size_t c : support) out[c] /= total;
      return out;
    }
  }
  return {row.begin(), row.end()};
}

std::vector<Kernel> discrete_probes(const DiscreteSmk& center, double radius,
                                    const Vector& eta_star, std::size_t count,
                                    std::uint64_t seed) {
  const std::size_t n = center.size();
  std::vector<Kernel> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, "probe", i);
    const double total = radius * radius * rng.open_uniform();
    std::vector<double> weights(n, 0.0);
    double wsum = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      if (eta_star(x) > 0.0) {
        weights[x] = rng.gamma(1.0);
        wsum += weights[x];
      }
    }
    std::vector<double> table(center.table().begin(), center.table().end());
    for (std::size_t x = 0; x < n; ++x) {
      if (!(weights[x] > 0.0)) continue;
      const double h2 = std::min(0.5, total * weights[x] / wsum / eta_star(x));
      const double theta = 2.0 * std::asin(std::sqrt(0.5 * h2));
      const auto row = perturb_row(center.row(x), theta, rng);
      std::copy(row.begin(), row.end(), table.begin() + x * center.row_cells());
    }
    out.emplace_back(DiscreteSmk(center.states(), center.k_max(), std::move(table)));
  }
  return out;
}

SojournDensity jitter(const SojournDensity& f, double sigma, Rng& rng) {
  const auto p = f.parameters();
  auto scaled = [&](double v) { return v * std::exp(sigma * rng.normal()); };
  switch (f.family()) {
    case SojournFamily::kExponential: return SojournDensity::exponential(scaled(p[0]));
    case SojournFamily::kWeibull: return SojournDensity::weibull(scaled(p[0]), scaled(p[1]));
    case SojournFamily::kGamma: return SojournDensity::gamma(scaled(p[0]), scaled(p[1]));
    case SojournFamily::kRootMix: break;
  }
  config_error("bad_probe_center", "ball probes need parametric sojourn families");
}

std::vector<Kernel> continuous_probes(const ContinuousSmk& center, double radius,
                                      const Vector& eta_star, std::size_t count,
                                      std::uint64_t seed) {
  const std::size_t n = center.size();
  const Kernel c{center};
  std::vector<Kernel> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, "probe", i);
    double sigma = 0.5;
    bool placed = false;
    for (int attempt = 0; attempt < 60 && !placed; ++attempt, sigma *= 0.5) {
      std::vector<SojournDensity> sojourns;
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
          sojourns.push_back(center.p()(x, y) > 0.0 ? jitter(center.sojourn(x, y), sigma, rng)
                                                    : center.sojourn(x, y));
        }
      }
      Kernel probe = ContinuousSmk(center.states(), center.p(), std::move(sojourns));
      if (nu_distance(c, probe, eta_star) <= radius) {
        out.push_back(std::move(probe));
        placed = true;
      }
    }
    if (!placed) out.push_back(c);
  }
  return out;
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t cell) {
  return derive_seed(master, "study-cell", cell);
}

}  // namespace

double k_lambda(double lambda, double xi) {
  return ((1.0 - 3.0 * lambda) / (1.0 - lambda)) * (1.0 - kIota) -
         8.0 * ((1.0 - lambda) / lambda) * xi * xi;
}

double default_xi(double lambda) {
  if (!(lambda > 0.0 && lambda < 0.25)) config_error("bad_lambda", "lambda must lie in (0, 1/4)");
  for (int i = 99; i >= 1; --i) {
    const double xi = i / 100.0;
    if (k_lambda(lambda, xi) > 0.0) return xi;
  }
  config_error("infeasible_xi", "no xi in {0.01..0.99} makes K(lambda) positive");
}

TestConstants test_constants(double lambda, double xi, unsigned kappa) {
  TestConstants c;
  c.lambda = lambda;
  c.xi = xi;
  c.kappa = kappa;
  c.k = (1.0 - lambda) * (1.0 - lambda) / kappa;
  c.k_lambda = k_lambda(lambda, xi);
  c.k_tilde = c.k_lambda / kappa;
  return c;
}

std::string alternative_name(AlternativeKind kind) {
  switch (kind) {
    case AlternativeKind::kSimple: return "simple";
    case AlternativeKind::kBall: return "ball";
    case AlternativeKind::kNet: return "net";
  }
  return "unknown";
}

double TestPlan::type_i_bound(std::size_t n) const {
  const double b = std::exp(-constants.k * static_cast<double>(n) * epsilon * epsilon);
  if (kind == AlternativeKind::kNet) {
    return std::min(1.0, static_cast<double>(alternatives.size()) * b);
  }
  return b;
}

double TestPlan::type_ii_bound(std::size_t n) const {
  const double rate = kind == AlternativeKind::kSimple ? constants.k : constants.k_tilde;
  return std::exp(-rate * static_cast<double>(n) * epsilon * epsilon);
}

TestPlan make_plan(const Kernel& q0, AlternativeKind kind, std::vector<Kernel> alternatives,
                   const PlanOptions& options) {
  if (!(options.lambda > 0.0 && options.lambda < 0.25)) {
    config_error("bad_lambda", "lambda must lie in (0, 1/4)");
  }
  const double xi = options.xi ? *options.xi : default_xi(options.lambda);
  if (!(xi > 0.0 && xi < 1.0)) config_error("bad_xi", "xi must lie in (0, 1)");
  if (!(k_lambda(options.lambda, xi) > 0.0)) {
    config_error("infeasible_xi", "K(lambda) is not positive for this (lambda, xi)");
  }
  if (alternatives.empty()) config_error("empty_alternative", "no alternative kernels given");
  if (kind != AlternativeKind::kNet && alternatives.size() != 1) {
    config_error("bad_alternative", "simple and ball plans take exactly one alternative");
  }
  for (const auto& a : alternatives) require_comparable(q0, a);

  const Matrix p0 = emc_transition(q0);
  const unsigned k = options.k ? *options.k : smallest_minorizing_k(p0);
  unsigned l = options.l ? *options.l : 1;
  if (kind == AlternativeKind::kSimple) {
    if (options.l && *options.l != 1) config_error("bad_block", "simple plans use l = 1");
    l = 1;
  }
  if (k < 1 || l < 1) config_error("bad_block", "k and l must be positive");
  const MinorizationConstants minor = minorization(p0, k, l);
  if (minor.vacuous) {
    config_error("vacuous_minorization",
                 "H1 minorization vacuous at k = " + std::to_string(k));
  }

  double min_sep = kInf;
  for (const auto& a : alternatives) min_sep = std::min(min_sep, nu_distance(q0, a, minor.nu_star));
  double eps = options.epsilon ? *options.epsilon : min_sep;
  if (kind == AlternativeKind::kNet && !options.epsilon) {
    config_error("bad_epsilon", "net plans need an explicit epsilon");
  }
  if (!(eps > 0.0) || !(min_sep > 0.0)) {
    config_error("not_separated", "hypotheses not epsilon-separated (epsilon = 0)");
  }
  if (min_sep < eps * (1.0 - kSeparationSlack)) {
    config_error("not_separated", "hypotheses not epsilon-separated: d_nu* = " +
                                      format_double(min_sep) + " < " + format_double(eps));
  }

  TestPlan plan{q0, kind, std::move(alternatives), {}, {}, minor, {}, eps, k, l, options.seed};
  plan.constants = test_constants(options.lambda, xi, k + l);
  for (const auto& a : plan.alternatives) {
    if (kind == AlternativeKind::kSimple) {
      plan.test_kernels.push_back(a);
    } else {
      plan.test_kernels.push_back(least_favorable(q0, a, options.lambda).q2);
    }
    plan.test_digests.push_back(kernel_digest(plan.test_kernels.back()));
  }
  return plan;
}

TestPlan make_net_plan(const Kernel& q0, const CoveringNet& net, const PlanOptions& options) {
  if (net.size() == 0) config_error("empty_net", "covering net has no points");
  std::vector<Kernel> points;
  for (std::size_t i = 0; i < net.size(); ++i) points.push_back(net.point(i));
  PlanOptions o = options;
  if (!o.epsilon) o.epsilon = net.radius;
  return make_plan(q0, AlternativeKind::kNet, std::move(points), o);
}

BlockDraw draw_block_indices(std::size_t n, unsigned k, unsigned l, Rng& rng) {
  if (k < 1 || l < 1) config_error("bad_block", "k and l must be positive");
  const std::size_t kappa = k + l;
  if (n < kappa) numeric_error("trajectory_too_short", "trajectory too short for one block");
  BlockDraw out;
  out.blocks = n / kappa;
  out.tau.reserve(out.blocks);
  for (std::size_t i = 1; i <= out.blocks; ++i) {
    const std::size_t y = k == 1 ? 1 : static_cast<std::size_t>(rng.uniform_int(1, k));
    out.tau.push_back(kappa * (i - 1) + l + y);
  }
  return out;
}

BlockDraw draw_block_indices(std::size_t n, unsigned k, unsigned l, std::uint64_t seed) {
  Rng rng(seed, "tau");
  return draw_block_indices(n, k, l, rng);
}

Statistic test_statistic(const Trajectory& traj, const Kernel& q0, const Kernel& q_test,
                         const std::vector<std::size_t>& tau) {
  Statistic out;
  double sum = 0.0;
  for (std::size_t t : tau) {
    if (t < 1 || t > traj.n()) config_error("bad_tau", "block index outside the trajectory");
    const std::size_t x = traj.states[t - 1];
    const std::size_t y = traj.states[t];
    const double s = traj.sojourn(t);
    const double v0 = density(q0, x, y, s);
    const double v1 = density(q_test, x, y, s);
    if (!(v0 > 0.0) && !(v1 > 0.0)) {
      numeric_error("off_support", "off-support evaluation at transition " + std::to_string(t));
    }
    double term;
    if (!(v0 > 0.0)) {
      term = kInf;
    } else if (!(v1 > 0.0)) {
      term = -kInf;
    } else {
      term = 0.5 * std::log(v1 / v0);
    }
    if (std::isinf(term) && !out.infinite_at) out.infinite_at = t;
    sum += term;
  }
  if (std::isnan(sum)) {
    numeric_error("off_support", "statistic has both +inf and -inf terms");
  }
  out.value = sum;
  return out;
}

TestOutcome run_test(const Trajectory& traj, const TestPlan& plan, Rng& aux) {
  const BlockDraw draw = draw_block_indices(traj.n(), plan.k, plan.l, aux);
  TestOutcome out;
  out.blocks = draw.blocks;
  out.statistic = -kInf;
  for (std::size_t j = 0; j < plan.test_kernels.size(); ++j) {
    const double t = test_statistic(traj, plan.q0, plan.test_kernels[j], draw.tau).value;
    out.constituent_statistics.push_back(t);
    out.statistic = std::max(out.statistic, t);
    if (t > 0.0 && !out.rejecting_index) out.rejecting_index = j;
  }
  out.reject_null = out.rejecting_index.has_value();
  out.tau = draw.tau;
  out.test_digest = plan.test_digests.front();
  return out;
}

TestOutcome run_test(const Trajectory& traj, const TestPlan& plan) {
  Rng aux(plan.seed, "tau");
  return run_test(traj, plan, aux);
}

TestOutcome psi_ball(const Trajectory& traj, const TestPlan& plan, Rng& aux) {
  if (plan.kind != AlternativeKind::kBall) config_error("bad_alternative", "plan is not a ball plan");
  return run_test(traj, plan, aux);
}

TestOutcome psi_simple(const Trajectory& traj, const TestPlan& plan, Rng& aux) {
  if (plan.kind != AlternativeKind::kSimple) {
    config_error("bad_alternative", "plan is not a simple plan");
  }
  return run_test(traj, plan, aux);
}

TestOutcome psi_aggregate(const Trajectory& traj, const TestPlan& plan, Rng& aux) {
  if (plan.kind != AlternativeKind::kNet) config_error("bad_alternative", "plan is not a net plan");
  return run_test(traj, plan, aux);
}

Kernel embed_markov_null(const MarkovNull& null, const Kernel& alternative) {
  if (null.generator) {
    if (is_discrete(alternative)) {
      config_error("kernel_mismatch", "a generator null needs a continuous alternative");
    }
    const ContinuousSmk e = embed_markov_continuous(null.matrix);
    if (e.size() != states_of(alternative).size()) {
      config_error("kernel_mismatch", "null and alternative have different state counts");
    }
    std::vector<SojournDensity> sojourns;
    for (std::size_t x = 0; x < e.size(); ++x) {
      for (std::size_t y = 0; y < e.size(); ++y) sojourns.push_back(e.sojourn(x, y));
    }
    return ContinuousSmk(states_of(alternative), e.p(), std::move(sojourns));
  }
  const auto* d = std::get_if<DiscreteSmk>(&alternative);
  if (!d) config_error("kernel_mismatch", "a transition-matrix null needs a discrete alternative");
  const DiscreteSmk e = embed_markov_discrete(null.matrix, d->k_max());
  if (e.size() != d->size()) {
    config_error("kernel_mismatch", "null and alternative have different state counts");
  }
  return DiscreteSmk(d->states(), d->k_max(), {e.table().begin(), e.table().end()});
}

TestPlan markov_vs_semimarkov_plan(const MarkovNull& null, const Kernel& alternative,
                                   const PlanOptions& options) {
  return make_plan(embed_markov_null(null, alternative), AlternativeKind::kBall, {alternative},
                   options);
}

TestOutcome markov_vs_semimarkov(const Trajectory& traj, const TestPlan& plan, Rng& aux) {
  return psi_ball(traj, plan, aux);
}

std::vector<Kernel> ball_probes(const Kernel& center, double radius, const Vector& eta_star,
                                std::size_t count, std::uint64_t seed) {
  if (!(radius >= 0.0)) config_error("bad_radius", "radius must be >= 0");
  if (static_cast<std::size_t>(eta_star.size()) != states_of(center).size() ||
      (eta_star.array() < 0.0).any()) {
    config_error("shape_mismatch", "eta_star must be a nonnegative vector over the states");
  }
  if (const auto* d = std::get_if<DiscreteSmk>(&center)) {
    return discrete_probes(*d, radius, eta_star, count, seed);
  }
  return continuous_probes(std::get<ContinuousSmk>(center), radius, eta_star, count, seed);
}

ErrorStudy error_study(const StudyConfig& config) {
  if (config.replications < 1) config_error("bad_replications", "replications must be positive");
  ErrorStudy study;
  study.confidence = config.confidence;
  std::size_t cell_index = 0;
  for (const auto& cell : config.cells) {
    const TestPlan& plan = cell.plan;
    const TransitionSampler null_sampler(plan.q0);
    std::vector<TransitionSampler> alt_samplers;
    for (const auto& a : cell.alternatives) alt_samplers.emplace_back(a);

    for (std::size_t n : config.n_grid) {
      const std::uint64_t cs = cell_seed(config.seed, cell_index++);
      StudyRow row;
      row.n = n;
      row.epsilon = plan.epsilon;
      row.replications = config.replications;
      row.type_i_bound = plan.type_i_bound(n);
      row.type_ii_bound = plan.type_ii_bound(n);
      if (n < plan.kappa()) {
        row.skipped = true;
        row.skip_reason = "n < kappa";
        study.rows.push_back(row);
        continue;
      }

      std::size_t rejections = 0;
      for (std::size_t r = 0; r < config.replications; ++r) {
        Rng data(cs, "type_i/data", r);
        Rng aux(cs, "type_i/aux", r);
        const Trajectory traj = sample_trajectory(null_sampler, n, InitialLaw::stationary(), data);
        rejections += run_test(traj, plan, aux).reject_null;
      }
      const Interval ci_i = wilson_interval(rejections, config.replications, config.confidence);
      row.type_i_rate = static_cast<double>(rejections) / config.replications;
      row.type_i_ci_half_width = ci_i.half_width();
      row.type_i_flagged = row.type_i_rate > row.type_i_bound + row.type_i_ci_half_width;

      for (std::size_t a = 0; a < alt_samplers.size(); ++a) {
        const std::string data_tag = "type_ii/data/" + std::to_string(a);
        const std::string aux_tag = "type_ii/aux/" + std::to_string(a);
        std::size_t accepts = 0;
        for (std::size_t r = 0; r < config.replications; ++r) {
          Rng data(cs, data_tag, r);
          Rng aux(cs, aux_tag, r);
          const Trajectory traj =
              sample_trajectory(alt_samplers[a], n, InitialLaw::stationary(), data);
          accepts += !run_test(traj, plan, aux).reject_null;
        }
        const double rate = static_cast<double>(accepts) / config.replications;
        if (a == 0 || rate > row.type_ii_rate) {
          row.type_ii_rate = rate;
          row.type_ii_ci_half_width =
              wilson_interval(accepts, config.replications, config.confidence).half_width();
        }
      }
      row.type_ii_flagged =
          !alt_samplers.empty() && row.type_ii_rate > row.type_ii_bound + row.type_ii_ci_half_width;
      study.rows.push_back(row);
    }
  }
  return study;
}

void write_study_csv(const ErrorStudy& study, std::ostream& out) {
  out << "n,epsilon,type_i_rate,type_ii_rate,type_i_bound,type_ii_bound,replications,"
         "type_i_ci_half_width,type_ii_ci_half_width,type_i_flagged,type_ii_flagged\n";
  for (const auto& r : study.rows) {
    if (r.skipped) continue;
    out << r.n << ',' << format_double(r.epsilon) << ',' << format_double(r.type_i_rate) << ','
        << format_double(r.type_ii_rate) << ',' << format_double(r.type_i_bound) << ','
        << format_double(r.type_ii_bound) << ',' << r.replications << ','
        << format_double(r.type_i_ci_half_width) << ',' << format_double(r.type_ii_ci_half_width)
        << ',' << (r.type_i_flagged ? "true" : "false") << ','
        << (r.type_ii_flagged ? "true" : "false") << '\n';
  }
}

CorollaryBounds corollary_bounds(const TestConstants& constants, std::size_t n, double eps_n,
                                 double m) {
  const double base = static_cast<double>(n) * eps_n * eps_n;
  CorollaryBounds b;
  b.type_i_m_squared = std::exp(-constants.k * base * m * m / 4.0);
  b.type_i_m_linear = std::exp(-constants.k * base * m / 4.0);
  b.type_ii_m_squared = std::exp(-constants.k_tilde * base * m * m / 4.0);
  b.type_ii_m_linear = std::exp(-constants.k_tilde * base * m / 4.0);
  return b;
}

std::uint64_t kernel_digest(const Kernel& kernel) {
  std::uint64_t h = 0;
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel)) {
    hash_doubles(h, d->table());
    return h;
  }
  const auto& c = std::get<ContinuousSmk>(kernel);
  hash_doubles(h, std::span<const double>(c.p().data(), c.p().size()));
  for (std::size_t x = 0; x < c.size(); ++x) {
    for (std::size_t y = 0; y < c.size(); ++y) {
      const auto p = c.sojourn(x, y).parameters();
      hash_doubles(h, p);
    }
  }
  return h;
}

}  // namespace smk
