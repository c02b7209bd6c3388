#include "smk/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "smk/error.hpp"

namespace smk {
namespace {

constexpr double kStationaryTolerance = 1e-10;
constexpr std::size_t kDirectSolveLimit = 64;

void require_square_stochastic(const Matrix& p, const char* what) {
  if (p.rows() != p.cols() || p.rows() < 1) {
    config_error("shape_mismatch", std::string(what) + " must be square");
  }
  for (Eigen::Index x = 0; x < p.rows(); ++x) {
    for (Eigen::Index y = 0; y < p.cols(); ++y) {
      if (!(p(x, y) >= 0.0) || p(x, y) > 1.0 + kStochasticTolerance) {
        config_error("not_stochastic", std::string(what) + " has an entry outside [0,1]");
      }
    }
    if (std::abs(p.row(x).sum() - 1.0) > kStochasticTolerance) {
      config_error("not_stochastic", std::string(what) + " row " +
                                         std::to_string(x) + " does not sum to 1");
    }
  }
}

// Reachability from `start` along positive entries, forwards or backwards.
std::vector<bool> reachable(const Matrix& p, std::size_t start, bool forward) {
  const auto n = static_cast<std::size_t>(p.rows());
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = forward ? p(u, v) : p(v, u);
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

std::string state_list(const StateSpace& states, const std::vector<std::size_t>& idx) {
  std::ostringstream os;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) os << ',';
    os << states.label(idx[i]);
  }
  return os.str();
}

double integer_sojourn(double s) {
  const double r = std::round(s);
  return std::abs(s - r) < 1e-9 ? r : -1.0;
}

}  // namespace

// ---------------------------------------------------------------------------

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    config_error("state_space", "a state space needs at least two states");
  }
  std::set<std::string> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size()) {
    config_error("state_space", "state labels must be distinct");
  }
}

StateSpace StateSpace::numbered(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return StateSpace(std::move(labels));
}

std::optional<std::size_t> StateSpace::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

DiscreteSmk::DiscreteSmk(StateSpace states, std::size_t k_max, std::vector<double> q)
    : states_(std::move(states)), k_max_(k_max), table_(std::move(q)) {
  if (k_max_ < 1) config_error("bad_k_max", "k_max must be positive");
  if (table_.size() != size() * row_cells()) {
    config_error("shape_mismatch", "kernel table has " + std::to_string(table_.size()) +
                                       " entries, expected " +
                                       std::to_string(size() * row_cells()));
  }
  for (std::size_t x = 0; x < size(); ++x) {
    double total = 0.0;
    for (double v : row(x)) {
      if (!(v >= 0.0) || v > 1.0) {
        config_error("not_stochastic", "kernel entry outside [0,1] in row " + states_.label(x));
      }
      total += v;
    }
    if (std::abs(total - 1.0) > kStochasticTolerance) {
      config_error("not_stochastic", "kernel row " + states_.label(x) + " sums to " +
                                         std::to_string(total));
    }
  }
}

ContinuousSmk::ContinuousSmk(StateSpace states, Matrix p, std::vector<SojournDensity> sojourns)
    : states_(std::move(states)), p_(std::move(p)), sojourns_(std::move(sojourns)) {
  if (static_cast<std::size_t>(p_.rows()) != size()) {
    config_error("shape_mismatch", "transition matrix size differs from state count");
  }
  require_square_stochastic(p_, "EMC transition matrix");
  if (sojourns_.size() != size() * size()) {
    config_error("shape_mismatch", "need one sojourn density per (x,y) pair");
  }
}

const StateSpace& states_of(const Kernel& kernel) {
  return std::visit([](const auto& k) -> const StateSpace& { return k.states(); }, kernel);
}

bool is_discrete(const Kernel& kernel) {
  return std::holds_alternative<DiscreteSmk>(kernel);
}

double density(const Kernel& kernel, std::size_t x, std::size_t y, double sojourn) {
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel)) {
    const double k = integer_sojourn(sojourn);
    if (k < 1.0 || k > static_cast<double>(d->k_max())) return 0.0;
    return d->q(x, y, static_cast<std::size_t>(k));
  }
  return std::get<ContinuousSmk>(kernel).q(x, y, sojourn);
}

void require_comparable(const Kernel& a, const Kernel& b) {
  if (a.index() != b.index()) {
    config_error("kernel_mismatch", "kernels differ in kind (discrete vs continuous)");
  }
  if (!(states_of(a) == states_of(b))) {
    config_error("kernel_mismatch", "kernels have different state spaces");
  }
  if (const auto* da = std::get_if<DiscreteSmk>(&a)) {
    if (da->k_max() != std::get<DiscreteSmk>(b).k_max()) {
      config_error("kernel_mismatch", "kernels have different k_max");
    }
  }
}

// ---------------------------------------------------------------------------

Matrix emc_transition(const Kernel& kernel) {
  if (const auto* c = std::get_if<ContinuousSmk>(&kernel)) return c->p();
  const auto& d = std::get<DiscreteSmk>(kernel);
  const std::size_t n = d.size();
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      double s = 0.0;
      for (std::size_t k = 1; k <= d.k_max(); ++k) s += d.q(x, y, k);
      p(x, y) = s;
    }
  }
  return p;
}

Matrix n_step_transition(const Matrix& p, unsigned n) {
  if (p.rows() != p.cols()) config_error("shape_mismatch", "transition matrix must be square");
  Matrix result = Matrix::Identity(p.rows(), p.cols());
  Matrix base = p;
  while (n > 0) {
    if (n & 1u) result = result * base;
    n >>= 1u;
    if (n > 0) base = base * base;
  }
  return result;
}

bool is_irreducible(const Matrix& p) {
  const auto fwd = reachable(p, 0, true);
  const auto bwd = reachable(p, 0, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

std::size_t emc_period(const Matrix& p) {
  if (!is_irreducible(p)) numeric_error("reducible_emc", "period requires an irreducible EMC");
  const auto n = static_cast<std::size_t>(p.rows());
  std::vector<long> level(n, -1);
  std::queue<std::size_t> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push(v);
      }
    }
  }
  long g = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (p(u, v) > 0.0) g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
    }
  }
  return static_cast<std::size_t>(g);
}

Vector stationary_emc(const Matrix& p) {
  if (p.rows() != p.cols()) config_error("shape_mismatch", "transition matrix must be square");
  if (!is_irreducible(p)) numeric_error("reducible_emc", "reducible EMC");
  const auto n = static_cast<std::size_t>(p.rows());
  Vector rho;
  if (n <= kDirectSolveLimit) {
    // (P^T - I) rho = 0 with the last equation replaced by sum(rho) = 1.
    Matrix a = p.transpose() - Matrix::Identity(n, n);
    a.row(n - 1).setOnes();
    Vector b = Vector::Zero(n);
    b(n - 1) = 1.0;
    rho = a.colPivHouseholderQr().solve(b);
  } else {
    // The lazy chain (I + P) / 2 shares rho and is aperiodic.
    const Matrix lazy = 0.5 * (Matrix::Identity(n, n) + p);
    rho = Vector::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < 100000; ++it) {
      Vector next = lazy.transpose() * rho;
      next /= next.sum();
      const double change = (next - rho).cwiseAbs().maxCoeff();
      rho = next;
      if (change < 1e-12) break;
    }
  }
  rho = rho.cwiseMax(0.0);
  rho /= rho.sum();
  return rho;
}

StationaryPair stationary_pair(const Kernel& kernel, const Vector& rho) {
  const Matrix p = emc_transition(kernel);
  const auto n = static_cast<std::size_t>(p.rows());
  if (static_cast<std::size_t>(rho.size()) != n) {
    config_error("shape_mismatch", "rho has the wrong length");
  }
  if ((rho.array() < 0.0).any() || std::abs(rho.sum() - 1.0) > kStationaryTolerance) {
    numeric_error("not_stationary", "rho is not a probability vector");
  }
  const Vector rho_p = p.transpose() * rho;
  if ((rho_p - rho).cwiseAbs().maxCoeff() > kStationaryTolerance) {
    numeric_error("not_stationary", "rho P differs from rho");
  }

  StationaryPair out;
  out.rho = rho;
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel)) {
    const std::size_t km = d->k_max();
    out.rho_tilde.assign(n * km, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t k = 1; k <= km; ++k) {
          out.rho_tilde[y * km + k - 1] += rho(x) * d->q(x, y, k);
        }
      }
    }
    // One step of the (J, X) chain from rho_tilde: only the J marginal of the
    // current pair drives the next transition.
    std::vector<double> marginal(n, 0.0);
    double mass = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t k = 1; k <= km; ++k) marginal[y] += out.rho_tilde[y * km + k - 1];
      mass += marginal[y];
    }
    double residual = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      for (std::size_t k = 1; k <= km; ++k) {
        double next = 0.0;
        for (std::size_t y = 0; y < n; ++y) next += marginal[y] * d->q(y, z, k);
        residual = std::max(residual, std::abs(next - out.rho_tilde[z * km + k - 1]));
      }
    }
    out.invariance_residual = residual;
    out.mass_residual = std::abs(mass - 1.0);
  } else {
    out.rho_tilde.assign(n * n, 0.0);
    std::vector<double> marginal(n, 0.0);
    double mass = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const double w = rho(x) * p(x, y);
        out.rho_tilde[x * n + y] = w;
        marginal[y] += w;
        mass += w;
      }
    }
    // rho_tilde Q has weights marginal(y) P(y,z) on f_yz, to be compared with
    // rho(y) P(y,z) on the same densities.
    double residual = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < n; ++z) {
        residual = std::max(residual, std::abs(marginal[y] - rho(y)) * p(y, z));
      }
    }
    out.invariance_residual = residual;
    out.mass_residual = std::abs(mass - 1.0);
  }
  if (out.invariance_residual > kStationaryTolerance) {
    numeric_error("not_stationary", "rho_tilde fails the invariance equation");
  }
  return out;
}

double rho_tilde_density(const Kernel& kernel, const StationaryPair& pair, std::size_t y,
                         double sojourn) {
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel)) {
    const double k = integer_sojourn(sojourn);
    if (k < 1.0 || k > static_cast<double>(d->k_max())) return 0.0;
    return pair.rho_tilde[y * d->k_max() + static_cast<std::size_t>(k) - 1];
  }
  const auto& c = std::get<ContinuousSmk>(kernel);
  const std::size_t n = c.size();
  double v = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double w = pair.rho_tilde[x * n + y];
    if (w > 0.0) v += w * c.sojourn(x, y).pdf(sojourn);
  }
  return v;
}

MeanSojourn mean_sojourn(const Kernel& kernel) {
  const Matrix p = emc_transition(kernel);
  const auto n = static_cast<std::size_t>(p.rows());
  MeanSojourn out;
  out.per_state = Vector::Zero(n);
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel)) {
    for (std::size_t x = 0; x < n; ++x) {
      double m = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t k = 1; k <= d->k_max(); ++k) m += static_cast<double>(k) * d->q(x, y, k);
      }
      out.per_state(x) = m;
    }
  } else {
    const auto& c = std::get<ContinuousSmk>(kernel);
    for (std::size_t x = 0; x < n; ++x) {
      double m = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        if (c.p()(x, y) <= 0.0) continue;
        const auto& f = c.sojourn(x, y);
        m += c.p()(x, y) *
             integrate_window([&f](double t) { return t * f.pdf(t); }, f.window(1e-16));
      }
      out.per_state(x) = m;
    }
  }
  if (is_irreducible(p)) {
    out.stationary = stationary_emc(p).dot(out.per_state);
  } else {
    out.stationary = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

AssumptionReport validate_assumptions(const Kernel& kernel) {
  const StateSpace& states = states_of(kernel);
  const Matrix p = emc_transition(kernel);
  const auto n = static_cast<std::size_t>(p.rows());
  AssumptionReport report;

  // A1
  report.irreducible = is_irreducible(p);
  if (report.irreducible) {
    report.period = emc_period(p);
    report.a1.satisfied = true;
    report.a1.witness = report.period == 1
                            ? "irreducible, aperiodic"
                            : "irreducible, period " + std::to_string(report.period) +
                                  " (stationary law unique; chain is periodic)";
  } else {
    const auto fwd = reachable(p, 0, true);
    const auto bwd = reachable(p, 0, false);
    std::vector<std::size_t> cut;
    for (std::size_t v = 0; v < n; ++v) {
      if (!fwd[v] || !bwd[v]) cut.push_back(v);
    }
    report.a1.satisfied = false;
    report.a1.witness = "not strongly connected with state " + states.label(0) +
                        ": " + state_list(states, cut);
  }

  // A2
  const MeanSojourn means = mean_sojourn(kernel);
  report.mean_sojourn = means.per_state;
  report.stationary_mean_sojourn = means.stationary;
  report.a2.satisfied = means.per_state.allFinite();
  report.a2.witness = report.a2.satisfied ? "all mean sojourns finite"
                                          : "infinite mean sojourn";

  // A3: every conditional sojourn law given (x, y) with P(x,y) > 0.
  std::vector<std::string> degenerate;
  if (const auto* d = std::get_if<DiscreteSmk>(&kernel)) {
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        if (p(x, y) <= 0.0) continue;
        std::size_t support = 0;
        for (std::size_t k = 1; k <= d->k_max(); ++k) support += d->q(x, y, k) > 0.0;
        if (support <= 1) degenerate.push_back(states.label(x) + "->" + states.label(y));
      }
    }
  } else {
    const auto& c = std::get<ContinuousSmk>(kernel);
    double worst = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        if (p(x, y) <= 0.0) continue;
        const auto& f = c.sojourn(x, y);
        const double mass = integrate_window([&f](double t) { return f.pdf(t); }, f.window());
        worst = std::max(worst, std::abs(mass - 1.0) * p(x, y));
      }
    }
    report.normalisation_error = worst;
  }
  report.a3.satisfied = degenerate.empty();
  if (report.a3.satisfied) {
    report.a3.witness = "no point-mass sojourn law";
  } else {
    std::ostringstream os;
    os << "point-mass sojourn for ";
    for (std::size_t i = 0; i < degenerate.size(); ++i) os << (i ? "," : "") << degenerate[i];
    report.a3.witness = os.str();
  }
  return report;
}

MinorizationConstants minorization(const Matrix& p, unsigned k, unsigned l) {
  if (k < 1 || l < 1) config_error("bad_block", "k and l must be positive");
  const auto n = static_cast<std::size_t>(p.rows());
  MinorizationConstants out;
  out.k = k;
  out.l = l;
  out.kappa = k + l;

  Matrix cesaro = Matrix::Zero(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (unsigned u = 1; u <= k; ++u) {
    power = power * p;
    cesaro += power;
  }
  cesaro /= static_cast<double>(k);
  out.nu_star = cesaro.colwise().minCoeff().transpose();
  out.eta_star = n_step_transition(p, l).colwise().maxCoeff().transpose();
  out.nu_mass = out.nu_star.sum();
  out.eta_mass = out.eta_star.sum();
  out.vacuous = !(out.nu_mass > 0.0);
  out.uniform_constant = cesaro.minCoeff();
  return out;
}

unsigned smallest_minorizing_k(const Matrix& p, unsigned max_k) {
  for (unsigned k = 1; k <= max_k; ++k) {
    if (!minorization(p, k, 1).vacuous) return k;
  }
  numeric_error("vacuous_minorization",
                "no k <= " + std::to_string(max_k) + " gives a nonzero minorant");
}

DiscreteSmk embed_markov_discrete(const Matrix& p_tilde, std::size_t k_max) {
  require_square_stochastic(p_tilde, "Markov transition matrix");
  if (k_max < 1) config_error("bad_k_max", "k_max must be positive");
  const auto n = static_cast<std::size_t>(p_tilde.rows());
  for (std::size_t x = 0; x < n; ++x) {
    if (p_tilde(x, x) >= 1.0) {
      numeric_error("absorbing_state", "absorbing state " + std::to_string(x + 1));
    }
  }
  std::vector<double> q(n * n * k_max, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const double stay = p_tilde(x, x);
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const double jump = p_tilde(x, y);
      double geom = 1.0;  // stay^(k-1)
      for (std::size_t k = 1; k < k_max; ++k) {
        q[(x * n + y) * k_max + k - 1] = jump * geom;
        geom *= stay;
      }
      q[(x * n + y) * k_max + k_max - 1] = jump * geom / (1.0 - stay);
    }
  }
  return DiscreteSmk(StateSpace::numbered(n), k_max, std::move(q));
}

ContinuousSmk embed_markov_continuous(const Matrix& generator) {
  if (generator.rows() != generator.cols() || generator.rows() < 2) {
    config_error("shape_mismatch", "generator must be square");
  }
  const auto n = static_cast<std::size_t>(generator.rows());
  Matrix p = Matrix::Zero(n, n);
  std::vector<SojournDensity> sojourns;
  sojourns.reserve(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    const double rate = -generator(x, x);
    if (!std::isfinite(rate)) numeric_error("infinite_rate", "a_x must be finite");
    if (!(rate > 0.0)) {
      numeric_error("absorbing_state", "absorbing state " + std::to_string(x + 1));
    }
    double off = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      if (generator(x, y) < 0.0) {
        config_error("bad_generator", "off-diagonal generator entries must be >= 0");
      }
      off += generator(x, y);
    }
    if (std::abs(off - rate) > 1e-9 * std::max(1.0, rate)) {
      config_error("bad_generator", "generator rows must sum to zero");
    }
    for (std::size_t y = 0; y < n; ++y) {
      p(x, y) = y == x ? 0.0 : generator(x, y) / off;
    }
    for (std::size_t y = 0; y < n; ++y) sojourns.push_back(SojournDensity::exponential(rate));
  }
  return ContinuousSmk(StateSpace::numbered(n), std::move(p), std::move(sojourns));
}

DiscreteSmk discretize_sojourns(const Matrix& p, std::span<const SojournDensity> sojourns,
                                std::size_t k_max) {
  require_square_stochastic(p, "EMC transition matrix");
  const auto n = static_cast<std::size_t>(p.rows());
  if (sojourns.size() != n * n) {
    config_error("shape_mismatch", "need one sojourn density per (x,y) pair");
  }
  if (k_max < 1) config_error("bad_k_max", "k_max must be positive");
  std::vector<double> q(n * n * k_max, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double pxy = p(x, y);
      if (pxy <= 0.0) continue;
      const auto& f = sojourns[x * n + y];
      double prev = 0.0;
      for (std::size_t k = 1; k < k_max; ++k) {
        const double cur = f.cdf(static_cast<double>(k));
        q[(x * n + y) * k_max + k - 1] = pxy * (cur - prev);
        prev = cur;
      }
      q[(x * n + y) * k_max + k_max - 1] = pxy * (1.0 - prev);
    }
  }
  return DiscreteSmk(StateSpace::numbered(n), k_max, std::move(q));
}

Matrix moment_matched_markov(const DiscreteSmk& kernel) {
  const Matrix p = emc_transition(kernel);
  const Vector m = mean_sojourn(Kernel{kernel}).per_state;
  const auto n = static_cast<std::size_t>(p.rows());
  Matrix p_tilde = Matrix::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    const double leave = 1.0 - p(x, x);
    if (!(leave > 0.0)) {
      numeric_error("absorbing_state", "state " + kernel.states().label(x) +
                                           " never leaves; no Markov counterpart");
    }
    const double jump = 1.0 / m(x);
    for (std::size_t y = 0; y < n; ++y) {
      p_tilde(x, y) = y == x ? 1.0 - jump : jump * p(x, y) / leave;
    }
  }
  return p_tilde;
}

}  // namespace smk
