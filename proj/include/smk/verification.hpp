#pragma once

// Randomised checks of the least-favourable construction and of the
// stationary pair, shared by the `verify` subcommand and the test suites.

#include <cstdint>
#include <string>
#include <vector>

#include "smk/kernel.hpp"
#include "smk/random.hpp"

namespace smk {

// Random discrete kernel: each cell is zero with probability `zero_prob`,
// otherwise Exp(1), and rows are normalised. Every row keeps at least one
// positive cell.
DiscreteSmk random_discrete_kernel(Rng& rng, std::size_t states, std::size_t k_max,
                                   double zero_prob = 0.0);
// As above, redrawn until the EMC is irreducible.
DiscreteSmk random_irreducible_kernel(Rng& rng, std::size_t states, std::size_t k_max,
                                      double zero_prob = 0.0);

struct IdentityOptions {
  std::uint64_t seed = 7;
  std::size_t draws = 1000;
  double tolerance = 1e-10;
  std::vector<double> lambdas = {0.05, 0.1, 0.2};
  std::size_t min_states = 2;
  std::size_t max_states = 4;
  std::size_t max_k = 6;
  double zero_prob = 0.2;
};

struct IdentityReport {
  std::size_t draws = 0;
  std::size_t states_checked = 0;
  std::size_t degenerate_states = 0;
  std::size_t violations = 0;
  // Worst slack or error seen for each identity family.
  double max_chain_excess = 0.0;     // lambda^2 h01 <= h12 <= h01
  double max_lower_excess = 0.0;     // (1-lambda)^2 h01 <= h02
  double max_h12_error = 0.0;        // |h12 - (1 - cos(lambda alpha))|
  double max_h02_error = 0.0;        // |h02 - (1 - cos((1-lambda) alpha))|
  double max_phi_ratio_to_bound = 0.0;  // max Phi^-1 * lambda, must stay < 1
  double max_mass_error = 0.0;
  std::vector<std::string> examples;  // first few violations
};

IdentityReport verify_identities(const IdentityOptions& options);

struct StationarityReport {
  std::size_t draws = 0;
  std::size_t violations = 0;
  double max_invariance_residual = 0.0;
  double max_mass_residual = 0.0;
  double max_emc_residual = 0.0;  // |rho P - rho|
};

StationarityReport verify_stationarity(std::uint64_t seed, std::size_t draws,
                                       double tolerance = 1e-10);

}  // namespace smk
