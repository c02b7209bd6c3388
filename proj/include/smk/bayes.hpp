#pragma once

// Conjugate Dirichlet priors over discrete semi-Markov kernels and Monte
// Carlo estimates of prior and posterior masses.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "smk/kernel.hpp"
#include "smk/random.hpp"
#include "smk/simulate.hpp"
#include "smk/stats.hpp"

namespace smk {

// Independent Dirichlet laws, one per state x, over the |E| * k_max cells
// (y, k) of row x. Serves as both prior and posterior.
class DirichletSmk {
 public:
  DirichletSmk(StateSpace states, std::size_t k_max, std::vector<double> concentration);
  static DirichletSmk uniform(StateSpace states, std::size_t k_max, double alpha = 1.0);

  const StateSpace& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  std::size_t k_max() const { return k_max_; }
  std::size_t row_cells() const { return size() * k_max_; }
  std::span<const double> row(std::size_t x) const {
    return {concentration_.data() + x * row_cells(), row_cells()};
  }
  std::span<const double> concentration() const { return concentration_; }

 private:
  StateSpace states_;
  std::size_t k_max_;
  std::vector<double> concentration_;
};

// c_x(y, k) = #{l in 1..n : J_{l-1} = x, J_l = y, X_l = k}, laid out like the
// concentration table. The initial pair is not counted.
std::vector<std::uint64_t> transition_counts(const Trajectory& traj, std::size_t states,
                                             std::size_t k_max);

// Throws "trajectory_exceeds_support" for sojourns outside {1..k_max}.
DirichletSmk posterior_update(const DirichletSmk& prior, const Trajectory& traj);

DiscreteSmk posterior_sample(const DirichletSmk& posterior, Rng& rng);
std::vector<DiscreteSmk> posterior_sample(const DirichletSmk& posterior, std::uint64_t seed,
                                          std::size_t count);
DiscreteSmk posterior_mean(const DirichletSmk& posterior);

struct MassEstimate {
  double mass = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
  Interval ci;  // Wilson, 99%
};

// Fraction of prior draws q with K <= n eps^2 and V_0 <= n eps^2 (analytic
// functionals with the initial term).
MassEstimate prior_mass_kl(const DirichletSmk& prior, const DiscreteSmk& q0, double eps,
                           std::size_t n, std::size_t mc_samples, std::uint64_t seed,
                           bool include_initial = true);

// Sieve of kernels whose every cell is at least `floor`.
struct FloorSieve {
  double floor = 0.0;
  bool contains(const DiscreteSmk& q) const;
};

// Default floor delta_n = n^-4.
double default_sieve_floor(std::size_t n);

// Prior mass outside the sieve.
MassEstimate sieve_mass(const DirichletSmk& prior, const FloorSieve& sieve,
                        std::size_t mc_samples, std::uint64_t seed);

using EpsRule = std::function<double(std::size_t)>;
// sqrt(log n / n)
double default_eps_rule(std::size_t n);

struct ConcentrationRow {
  std::size_t n = 0;
  double eps_n = 0.0;
  double m = 0.0;
  // Average over replications of the posterior mass outside
  // B_{d_{nu*}}(q0, M eps_n).
  double posterior_mass_outside = 0.0;
  std::size_t mc_samples = 0;
  double ci = 0.0;  // 99% half-width
  std::size_t replications = 0;
};

struct ConcentrationConfig {
  std::vector<std::size_t> n_grid;
  EpsRule eps_rule = default_eps_rule;
  std::vector<double> m_values;
  std::size_t replications = 20;
  std::size_t mc_samples = 1000;
  std::uint64_t seed = 0;
  // Weights of the semi-distance; defaults to nu* of q0 at the smallest
  // nonvacuous k.
  std::optional<Vector> nu_star;
};

struct ConcentrationCurve {
  std::vector<ConcentrationRow> rows;  // (n, M) order
  // Per M: the outside mass never increases along the n grid by more than
  // the joint 99% half-widths.
  std::vector<bool> monotone;
};

ConcentrationCurve concentration_curve(const DiscreteSmk& q0, const DirichletSmk& prior,
                                       const ConcentrationConfig& config);
void write_concentration_csv(const ConcentrationCurve& curve, std::ostream& out);

struct FeasibilityRow {
  double c = 0.0;
  std::size_t n = 0;
  double eps_n = 0.0;
  MassEstimate prior_kl;
  double h3_bound = 0.0;  // exp(-c n eps_n^2)
  bool h3_holds = false;  // estimate > bound
  MassEstimate sieve;
  double h4_bound = 0.0;  // exp(-2 n (c+1) eps_n^2)
  bool h4_holds = false;  // estimate <= bound
  bool feasible = false;
};

struct FeasibilityConfig {
  std::vector<std::size_t> n_grid;
  EpsRule eps_rule = default_eps_rule;
  std::vector<double> c_grid;
  std::size_t mc_samples = 1000;
  std::uint64_t seed = 0;
  std::function<double(std::size_t)> sieve_floor = default_sieve_floor;
};

struct FeasibilityReport {
  std::vector<FeasibilityRow> rows;  // (c, n) order
  std::vector<double> feasible_c;    // c values feasible at every n
};

FeasibilityReport h3_h4_feasibility(const DirichletSmk& prior, const DiscreteSmk& q0,
                                    const FeasibilityConfig& config);
void write_feasibility_csv(const FeasibilityReport& report, std::ostream& out);

}  // namespace smk
