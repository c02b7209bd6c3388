#include "smk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "smk/error.hpp"
#include "smk/kernel_io.hpp"
#include "smk/stats.hpp"

namespace smk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cumulative sums of `weights` with the entries from the last positive weight
// onwards pinned to exactly 1, so that inversion never lands on a zero cell.
void append_cumulative(std::span<const double> weights, std::vector<double>& out) {
  const std::size_t start = out.size();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    out.push_back(acc);
    if (weights[i] > 0.0) last = i;
  }
  for (std::size_t i = last; i < weights.size(); ++i) out[start + i] = 1.0;
}

std::size_t invert(const double* cumulative, std::size_t count, double u) {
  const double* it = std::upper_bound(cumulative, cumulative + count, u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative, count - 1));
}

std::size_t draw_index(const Vector& p, double u) {
  std::vector<double> cum;
  std::vector<double> w(p.data(), p.data() + p.size());
  append_cumulative(w, cum);
  return invert(cum.data(), cum.size(), u);
}

LogLikelihood log_likelihood_with(const Kernel& kernel, const std::optional<StationaryPair>& pair,
                                  const Trajectory& traj, bool include_initial) {
  LogLikelihood out;
  const std::size_t n = traj.n();
  if (include_initial && traj.stationary_start()) {
    out.initial_included = true;
    const double v = rho_tilde_density(kernel, *pair, traj.states[0], traj.sojourn(0));
    if (!(v > 0.0)) {
      out.value = -kInf;
      out.first_zero_step = 0;
      return out;
    }
    out.value += std::log(v);
  }
  for (std::size_t l = 1; l <= n; ++l) {
    const double v = density(kernel, traj.states[l - 1], traj.states[l], traj.sojourn(l));
    if (!(v > 0.0)) {
      out.value = -kInf;
      out.first_zero_step = l;
      return out;
    }
    out.value += std::log(v);
  }
  return out;
}

std::optional<StationaryPair> stationary_of(const Kernel& kernel) {
  return stationary_pair(kernel, stationary_emc(emc_transition(kernel)));
}

// Per-transition moments of the log ratio l = log(q0 / q) under q0:
// a = P0(j,y), b = E0[l; j->y], c = E0[l^2; j->y], and the same for the
// initial pair with rho_tilde in place of q.
struct StepMoments {
  std::size_t n = 0;
  std::vector<double> a, b, c;     // [j*n + y]
  std::vector<double> a0, b0, c0;  // [y]
  bool infinite = false;
};

void accumulate(double p0, double pq, double& a, double& b, double& c, bool& infinite) {
  if (!(p0 > 0.0)) return;
  if (!(pq > 0.0)) {
    infinite = true;
    return;
  }
  const double l = std::log(p0 / pq);
  a += p0;
  b += p0 * l;
  c += p0 * l * l;
}

StepMoments discrete_moments(const DiscreteSmk& q0, const DiscreteSmk& q,
                             const StationaryPair& s0, const StationaryPair& sq) {
  StepMoments m;
  const std::size_t n = q0.size();
  const std::size_t km = q0.k_max();
  m.n = n;
  m.a.assign(n * n, 0.0);
  m.b.assign(n * n, 0.0);
  m.c.assign(n * n, 0.0);
  m.a0.assign(n, 0.0);
  m.b0.assign(n, 0.0);
  m.c0.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t k = 1; k <= km; ++k) {
        accumulate(q0.q(j, y, k), q.q(j, y, k), m.a[j * n + y], m.b[j * n + y], m.c[j * n + y],
                   m.infinite);
      }
    }
  }
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t k = 1; k <= km; ++k) {
      const std::size_t cell = y * km + k - 1;
      accumulate(s0.rho_tilde[cell], sq.rho_tilde[cell], m.a0[y], m.b0[y], m.c0[y], m.infinite);
    }
  }
  return m;
}

// Integrates p0(t) * {1, l, l^2} with l = log(p0(t) / pq(t)) over `w`.
template <class F0, class Fq>
void integrate_moments(const F0& p0, const Fq& pq, const Window& w, double& a, double& b,
                       double& c, bool& infinite) {
  bool zero_q = false;
  auto moment = [&](int power) {
    return integrate_window(
        [&](double t) {
          const double v0 = p0(t);
          if (!(v0 > 0.0)) return 0.0;
          const double vq = pq(t);
          if (!(vq > 0.0)) {
            zero_q = true;
            return 0.0;
          }
          const double l = std::log(v0 / vq);
          return power == 1 ? v0 * l : v0 * l * l;
        },
        w);
  };
  b += moment(1);
  c += moment(2);
  a += integrate_window(p0, w);
  if (zero_q) infinite = true;
}

StepMoments continuous_moments(const ContinuousSmk& q0, const ContinuousSmk& q,
                               const StationaryPair& s0, const StationaryPair& sq) {
  StepMoments m;
  const std::size_t n = q0.size();
  m.n = n;
  m.a.assign(n * n, 0.0);
  m.b.assign(n * n, 0.0);
  m.c.assign(n * n, 0.0);
  m.a0.assign(n, 0.0);
  m.b0.assign(n, 0.0);
  m.c0.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t y = 0; y < n; ++y) {
      const double p0 = q0.p()(j, y);
      if (p0 <= 0.0) continue;
      if (q.p()(j, y) <= 0.0) {
        m.infinite = true;
        continue;
      }
      const auto& f0 = q0.sojourn(j, y);
      const auto& fq = q.sojourn(j, y);
      integrate_moments([&](double t) { return q0.q(j, y, t); },
                        [&](double t) { return q.q(j, y, t); }, merge(f0.window(), fq.window()),
                        m.a[j * n + y], m.b[j * n + y], m.c[j * n + y], m.infinite);
      // Use the exact mass rather than its quadrature estimate.
      m.a[j * n + y] = p0;
    }
  }
  const Kernel k0{q0};
  const Kernel kq{q};
  for (std::size_t y = 0; y < n; ++y) {
    std::optional<Window> w;
    for (std::size_t x = 0; x < n; ++x) {
      for (const auto* k : {&q0, &q}) {
        if (k->p()(x, y) <= 0.0) continue;
        const Window wx = k->sojourn(x, y).window();
        w = w ? merge(*w, wx) : wx;
      }
    }
    if (!w) continue;
    integrate_moments([&](double t) { return rho_tilde_density(k0, s0, y, t); },
                      [&](double t) { return rho_tilde_density(kq, sq, y, t); }, *w, m.a0[y],
                      m.b0[y], m.c0[y], m.infinite);
    m.a0[y] = s0.rho(y);
  }
  return m;
}

}  // namespace

InitialLaw InitialLaw::fixed(std::size_t state, std::size_t size) {
  if (state >= size) config_error("bad_initial_law", "initial state out of range");
  Vector d = Vector::Zero(size);
  d(state) = 1.0;
  return {d};
}

TransitionSampler::TransitionSampler(const Kernel& kernel)
    : kernel_(kernel), n_(states_of(kernel).size()) {
  const Matrix p = emc_transition(kernel_);
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel_)) {
    k_max_ = d->k_max();
    for (std::size_t x = 0; x < n_; ++x) append_cumulative(d->row(x), cumulative_);
  } else {
    for (std::size_t x = 0; x < n_; ++x) {
      std::vector<double> row(n_);
      for (std::size_t y = 0; y < n_; ++y) row[y] = p(x, y);
      append_cumulative(row, cumulative_);
    }
  }
  if (is_irreducible(p)) {
    const Vector rho = stationary_emc(p);
    std::vector<double> w(rho.data(), rho.data() + rho.size());
    append_cumulative(w, rho_cumulative_);
  }
}

TransitionSampler::Draw TransitionSampler::next(std::size_t x, Rng& rng) const {
  const double u = rng.uniform();
  if (k_max_ > 0) {
    const std::size_t cells = n_ * k_max_;
    const std::size_t c = invert(cumulative_.data() + x * cells, cells, u);
    return {c / k_max_, static_cast<double>(c % k_max_ + 1)};
  }
  const std::size_t y = invert(cumulative_.data() + x * n_, n_, u);
  const auto& c = std::get<ContinuousSmk>(kernel_);
  return {y, c.sojourn(x, y).sample(rng)};
}

TransitionSampler::Draw TransitionSampler::stationary(Rng& rng) const {
  if (rho_cumulative_.empty()) {
    numeric_error("reducible_emc", "stationary start needs an irreducible EMC");
  }
  const std::size_t x = invert(rho_cumulative_.data(), n_, rng.uniform());
  return next(x, rng);
}

Trajectory sample_trajectory(const TransitionSampler& sampler, std::size_t n,
                             const InitialLaw& init, Rng& rng) {
  Trajectory traj;
  traj.states.reserve(n + 1);
  traj.jump_times.reserve(n + 1);
  if (init.distribution) {
    const Vector& d = *init.distribution;
    if (static_cast<std::size_t>(d.size()) != sampler.size() || (d.array() < 0.0).any() ||
        std::abs(d.sum() - 1.0) > 1e-9) {
      config_error("bad_initial_law", "initial law must be a probability vector over the states");
    }
    traj.states.push_back(draw_index(d, rng.uniform()));
    traj.jump_times.push_back(0.0);
  } else {
    const auto first = sampler.stationary(rng);
    traj.states.push_back(first.state);
    traj.jump_times.push_back(first.sojourn);
  }
  for (std::size_t l = 1; l <= n; ++l) {
    const auto step = sampler.next(traj.states.back(), rng);
    traj.states.push_back(step.state);
    traj.jump_times.push_back(traj.jump_times.back() + step.sojourn);
  }
  return traj;
}

Trajectory sample_trajectory(const Kernel& kernel, std::size_t n, const InitialLaw& init,
                             std::uint64_t seed) {
  const TransitionSampler sampler(kernel);
  Rng rng(seed);
  return sample_trajectory(sampler, n, init, rng);
}

LogLikelihood log_likelihood(const Kernel& kernel, const Trajectory& traj, bool include_initial) {
  if (traj.states.empty() || traj.states.size() != traj.jump_times.size()) {
    config_error("trajectory_format", "trajectory is empty or inconsistent");
  }
  std::optional<StationaryPair> pair;
  if (include_initial && traj.stationary_start()) pair = stationary_of(kernel);
  return log_likelihood_with(kernel, pair, traj, include_initial);
}

KlFunctionals kl_functionals(const Kernel& q0, const Kernel& q, std::size_t n,
                             const KlOptions& options) {
  require_comparable(q0, q);
  const StationaryPair s0 = *stationary_of(q0);
  KlFunctionals out;
  out.method = options.method;

  if (options.method == KlMethod::kMonteCarlo) {
    if (options.replications < 2) config_error("bad_replications", "need at least 2 replications");
    const std::optional<StationaryPair> p0{s0};
    // q may have a reducible EMC; its initial factor is then undefined and the
    // log ratio is taken over transitions only.
    std::optional<StationaryPair> pq;
    const bool with_initial = options.include_initial && is_irreducible(emc_transition(q));
    if (with_initial) pq = stationary_of(q);
    const TransitionSampler sampler(q0);
    Moments moments;
    for (std::size_t r = 0; r < options.replications; ++r) {
      Rng rng(options.seed, "kl", r);
      const Trajectory traj = sample_trajectory(sampler, n, InitialLaw::stationary(), rng);
      const double l0 = log_likelihood_with(q0, p0, traj, with_initial).value;
      const double lq = log_likelihood_with(q, pq, traj, with_initial).value;
      if (!std::isfinite(lq)) {
        out.infinite = true;
        break;
      }
      moments.add(l0 - lq);
    }
    out.replications = moments.count();
    if (out.infinite) {
      out.kl = out.v0 = kInf;
      return out;
    }
    out.kl = moments.mean();
    out.v0 = moments.variance();
    out.kl_se = moments.mean_se();
    out.v0_se = moments.variance_se();
    return out;
  }

  std::optional<StationaryPair> sq;
  if (is_irreducible(emc_transition(q))) {
    sq = stationary_of(q);
  } else if (options.include_initial) {
    out.infinite = true;
    out.kl = out.v0 = kInf;
    return out;
  }
  if (!sq) sq = s0;  // initial term unused below
  StepMoments m;
  if (const auto* d0 = std::get_if<DiscreteSmk>(&q0)) {
    m = discrete_moments(*d0, std::get<DiscreteSmk>(q), s0, *sq);
  } else {
    m = continuous_moments(std::get<ContinuousSmk>(q0), std::get<ContinuousSmk>(q), s0, *sq);
  }
  if (!options.include_initial) {
    std::fill(m.b0.begin(), m.b0.end(), 0.0);
    std::fill(m.c0.begin(), m.c0.end(), 0.0);
  }
  if (m.infinite) {
    out.infinite = true;
    out.kl = out.v0 = kInf;
    return out;
  }

  const std::size_t s = m.n;
  double rate = 0.0;
  for (std::size_t j = 0; j < s; ++j) {
    for (std::size_t y = 0; y < s; ++y) rate += s0.rho(j) * m.b[j * s + y];
  }
  double initial = 0.0;
  for (std::size_t y = 0; y < s; ++y) initial += m.b0[y];
  out.per_step_kl = rate;
  out.initial_kl = initial;
  out.kl = initial + static_cast<double>(n) * rate;

  // Moments of the centred log ratio sum, jointly with the current state.
  // Centring each step by its stationary mean keeps the variance free of
  // cancellation for large n.
  std::vector<double> bt(s * s), ct(s * s);
  for (std::size_t i = 0; i < s * s; ++i) {
    bt[i] = m.b[i] - rate * m.a[i];
    ct[i] = m.c[i] - 2.0 * rate * m.b[i] + rate * rate * m.a[i];
  }
  std::vector<double> m0(s), m1(s), m2(s);
  for (std::size_t y = 0; y < s; ++y) {
    m0[y] = m.a0[y];
    m1[y] = m.b0[y] - initial * m.a0[y];
    m2[y] = m.c0[y] - 2.0 * initial * m.b0[y] + initial * initial * m.a0[y];
  }
  std::vector<double> n0(s), n1(s), n2(s);
  for (std::size_t step = 0; step < n; ++step) {
    std::fill(n0.begin(), n0.end(), 0.0);
    std::fill(n1.begin(), n1.end(), 0.0);
    std::fill(n2.begin(), n2.end(), 0.0);
    for (std::size_t j = 0; j < s; ++j) {
      for (std::size_t y = 0; y < s; ++y) {
        const std::size_t i = j * s + y;
        n0[y] += m0[j] * m.a[i];
        n1[y] += m1[j] * m.a[i] + m0[j] * bt[i];
        n2[y] += m2[j] * m.a[i] + 2.0 * m1[j] * bt[i] + m0[j] * ct[i];
      }
    }
    m0.swap(n0);
    m1.swap(n1);
    m2.swap(n2);
  }
  double second = 0.0;
  for (std::size_t y = 0; y < s; ++y) second += m2[y];
  out.v0 = std::max(0.0, second);
  return out;
}

KlMembership in_kl_neighborhood(const Kernel& q, const Kernel& q0, double eps, std::size_t n,
                                const KlOptions& options) {
  if (!(eps > 0.0)) config_error("bad_epsilon", "epsilon must be positive");
  KlMembership out;
  out.functionals = kl_functionals(q0, q, n, options);
  const double budget = static_cast<double>(n) * eps * eps;
  if (out.functionals.infinite) {
    out.kl_margin = out.v0_margin = -kInf;
    return out;
  }
  const double z = options.method == KlMethod::kMonteCarlo ? normal_quantile_two_sided(0.99) : 0.0;
  out.kl_margin = budget - (out.functionals.kl + z * out.functionals.kl_se);
  out.v0_margin = budget - (out.functionals.v0 + z * out.functionals.v0_se);
  out.inside = out.kl_margin >= 0.0 && out.v0_margin >= 0.0;
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const StateSpace& states, std::ostream& out) {
  out << "index,state,jump_time\n";
  for (std::size_t l = 0; l < traj.states.size(); ++l) {
    out << l << ',' << states.label(traj.states[l]) << ',' << format_double(traj.jump_times[l])
        << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in, const StateSpace& states) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,state,jump_time", 0) != 0) {
    config_error("trajectory_format", "expected header index,state,jump_time");
  }
  Trajectory traj;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string index, label, time;
    if (!std::getline(row, index, ',') || !std::getline(row, label, ',') ||
        !std::getline(row, time)) {
      config_error("trajectory_format", "malformed row: " + line);
    }
    std::size_t idx = 0;
    double t = 0.0;
    try {
      idx = std::stoul(index);
      t = std::stod(time);
    } catch (const std::exception&) {
      config_error("trajectory_format", "malformed row: " + line);
    }
    if (idx != expected++) config_error("trajectory_format", "indices must count up from 0");
    const auto s = states.index_of(label);
    if (!s) config_error("trajectory_format", "unknown state '" + label + "'");
    if (!traj.jump_times.empty() && !(t > traj.jump_times.back())) {
      config_error("trajectory_format", "jump times must increase strictly");
    }
    if (t < 0.0) config_error("trajectory_format", "jump times must be >= 0");
    traj.states.push_back(*s);
    traj.jump_times.push_back(t);
  }
  if (traj.states.empty()) config_error("trajectory_format", "trajectory has no rows");
  return traj;
}

}  // namespace smk
