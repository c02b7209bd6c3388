#include "smk/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smk/error.hpp"
#include "smk/metrics.hpp"

namespace smk {
namespace {

double one_minus_cos(double a) {
  const double s = std::sin(0.5 * a);
  return 2.0 * s * s;
}

}  // namespace

DiscreteSmk random_discrete_kernel(Rng& rng, std::size_t states, std::size_t k_max,
                                   double zero_prob) {
  const std::size_t cells = states * k_max;
  std::vector<double> table(states * cells, 0.0);
  for (std::size_t x = 0; x < states; ++x) {
    double total = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      const bool zero = zero_prob > 0.0 && rng.uniform() < zero_prob;
      const double v = zero ? 0.0 : -std::log(rng.open_uniform());
      table[x * cells + c] = v;
      total += v;
    }
    if (!(total > 0.0)) {
      const auto c = static_cast<std::size_t>(rng.uniform_int(0, cells - 1));
      table[x * cells + c] = 1.0;
      total = 1.0;
    }
    for (std::size_t c = 0; c < cells; ++c) table[x * cells + c] /= total;
  }
  return DiscreteSmk(StateSpace::numbered(states), k_max, std::move(table));
}

DiscreteSmk random_irreducible_kernel(Rng& rng, std::size_t states, std::size_t k_max,
                                      double zero_prob) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    DiscreteSmk k = random_discrete_kernel(rng, states, k_max, zero_prob);
    if (is_irreducible(emc_transition(Kernel{k}))) return k;
  }
  numeric_error("reducible_emc", "could not draw an irreducible kernel");
}

IdentityReport verify_identities(const IdentityOptions& options) {
  if (options.min_states < 2 || options.max_states < options.min_states || options.max_k < 1 ||
      options.lambdas.empty()) {
    config_error("bad_verify_options", "invalid identity-suite options");
  }
  IdentityReport report;
  const double tol = options.tolerance;
  auto record = [&](std::size_t draw, std::size_t x, const std::string& what, double value) {
    ++report.violations;
    if (report.examples.size() < 10) {
      std::ostringstream os;
      os << "draw " << draw << " state " << x << ": " << what << " off by " << value;
      report.examples.push_back(os.str());
    }
  };

  for (std::size_t d = 0; d < options.draws; ++d) {
    Rng rng(options.seed, "identity", d);
    const auto states = static_cast<std::size_t>(
        rng.uniform_int(options.min_states, options.max_states));
    const auto k_max = static_cast<std::size_t>(rng.uniform_int(1, options.max_k));
    const double lambda =
        options.lambdas[rng.uniform_int(0, options.lambdas.size() - 1)];
    const Kernel q0{random_discrete_kernel(rng, states, k_max, options.zero_prob)};
    const Kernel q1{random_discrete_kernel(rng, states, k_max, options.zero_prob)};

    const LeastFavorablePair pair = least_favorable(q0, q1, lambda);
    report.max_mass_error = std::max(report.max_mass_error, pair.mass_error);
    ++report.draws;
    for (std::size_t x = 0; x < states; ++x) {
      ++report.states_checked;
      if (pair.degenerate[x]) {
        ++report.degenerate_states;
        continue;
      }
      const double a = pair.alpha(x);
      const double h01 = pair.h2_01(x);
      const double h12 = hellinger_sq_state(q1, pair.q2, x);
      const double h02 = hellinger_sq_state(q0, pair.q2, x);

      const double chain = std::max(lambda * lambda * h01 - h12, h12 - h01);
      report.max_chain_excess = std::max(report.max_chain_excess, chain);
      if (chain > tol) record(d, x, "lambda^2 h01 <= h12 <= h01", chain);

      const double lower = (1.0 - lambda) * (1.0 - lambda) * h01 - h02;
      report.max_lower_excess = std::max(report.max_lower_excess, lower);
      if (lower > tol) record(d, x, "(1-lambda)^2 h01 <= h02", lower);

      const double e12 = std::abs(h12 - one_minus_cos(lambda * a));
      report.max_h12_error = std::max(report.max_h12_error, e12);
      if (e12 > tol) record(d, x, "h12 = 1 - cos(lambda alpha)", e12);

      const double e02 = std::abs(h02 - one_minus_cos((1.0 - lambda) * a));
      report.max_h02_error = std::max(report.max_h02_error, e02);
      if (e02 > tol) record(d, x, "h02 = 1 - cos((1-lambda) alpha)", e02);
    }
    const PhiInverseReport phi = phi_inverse_bound_check(pair, q0);
    report.max_phi_ratio_to_bound =
        std::max(report.max_phi_ratio_to_bound, phi.max_ratio * lambda);
    if (!phi.holds) record(d, 0, "Phi^-1 < 1/lambda", phi.max_ratio - phi.bound);
  }
  return report;
}

StationarityReport verify_stationarity(std::uint64_t seed, std::size_t draws, double tolerance) {
  StationarityReport report;
  for (std::size_t d = 0; d < draws; ++d) {
    Rng rng(seed, "stationary", d);
    const auto states = static_cast<std::size_t>(rng.uniform_int(2, 6));
    const auto k_max = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const Kernel q{random_irreducible_kernel(rng, states, k_max, 0.3)};
    const Matrix p = emc_transition(q);
    const Vector rho = stationary_emc(p);
    const double emc = (p.transpose() * rho - rho).cwiseAbs().maxCoeff();
    ++report.draws;
    report.max_emc_residual = std::max(report.max_emc_residual, emc);
    try {
      const StationaryPair pair = stationary_pair(q, rho);
      report.max_invariance_residual =
          std::max(report.max_invariance_residual, pair.invariance_residual);
      report.max_mass_residual = std::max(report.max_mass_residual, pair.mass_residual);
      if (pair.invariance_residual > tolerance || pair.mass_residual > tolerance ||
          emc > tolerance) {
        ++report.violations;
      }
    } catch (const Error&) {
      ++report.violations;
    }
  }
  return report;
}

}  // namespace smk
