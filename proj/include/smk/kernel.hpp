#pragma once

// Finite-state semi-Markov kernels.
//
// A kernel gives, for every current state x, the joint law of the next state
// y and the sojourn X spent in x before the jump. Two representations exist:
//
//  * DiscreteSmk   - a table q[x][y][k] on sojourns k in {1..k_max}, dominated
//                    by counting x counting measure;
//  * ContinuousSmk - q_x(y,t) = P(x,y) f_xy(t) with parametric sojourn
//                    densities f_xy, dominated by counting x Lebesgue measure.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "smk/sojourn.hpp"

namespace smk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Row sums of kernels must equal 1 within this tolerance.
inline constexpr double kStochasticTolerance = 1e-12;

class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels);
  // States labelled "1".."n".
  static StateSpace numbered(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> index_of(const std::string& label) const;

  bool operator==(const StateSpace& other) const = default;

 private:
  std::vector<std::string> labels_;
};

class DiscreteSmk {
 public:
  // `q` is row-major [x][y][k-1] with |E|*|E|*k_max entries.
  DiscreteSmk(StateSpace states, std::size_t k_max, std::vector<double> q);

  const StateSpace& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  std::size_t k_max() const { return k_max_; }
  // Cells per state row: |E| * k_max.
  std::size_t row_cells() const { return size() * k_max_; }
  // Index of (y, k) within a row; k is 1-based.
  std::size_t cell(std::size_t y, std::size_t k) const {
    return y * k_max_ + (k - 1);
  }

  double q(std::size_t x, std::size_t y, std::size_t k) const {
    return table_[x * row_cells() + cell(y, k)];
  }
  std::span<const double> row(std::size_t x) const {
    return {table_.data() + x * row_cells(), row_cells()};
  }
  std::span<const double> table() const { return table_; }

 private:
  StateSpace states_;
  std::size_t k_max_;
  std::vector<double> table_;
};

class ContinuousSmk {
 public:
  // `sojourns` is row-major [x][y]; entries for pairs with P(x,y) = 0 are
  // kept but never evaluated.
  ContinuousSmk(StateSpace states, Matrix p, std::vector<SojournDensity> sojourns);

  const StateSpace& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  const Matrix& p() const { return p_; }
  const SojournDensity& sojourn(std::size_t x, std::size_t y) const {
    return sojourns_[x * size() + y];
  }
  double q(std::size_t x, std::size_t y, double t) const {
    const double pxy = p_(x, y);
    return pxy > 0.0 ? pxy * sojourn(x, y).pdf(t) : 0.0;
  }

 private:
  StateSpace states_;
  Matrix p_;
  std::vector<SojournDensity> sojourns_;
};

using Kernel = std::variant<DiscreteSmk, ContinuousSmk>;

const StateSpace& states_of(const Kernel& kernel);
bool is_discrete(const Kernel& kernel);
// Kernel density at (x -> y, sojourn). Discrete sojourns outside {1..k_max}
// and non-integer values have density 0.
double density(const Kernel& kernel, std::size_t x, std::size_t y, double sojourn);
// Throws unless both kernels share states, kind, and (discrete) k_max.
void require_comparable(const Kernel& a, const Kernel& b);

// ---------------------------------------------------------------------------
// Diagnostics

struct AssumptionCheck {
  bool satisfied = false;
  std::string witness;
};

struct AssumptionReport {
  AssumptionCheck a1;  // irreducible EMC with a unique stationary law
  AssumptionCheck a2;  // finite mean sojourns
  AssumptionCheck a3;  // no conditional sojourn law is a point mass
  bool irreducible = false;
  std::size_t period = 0;  // 0 when reducible
  Vector mean_sojourn;
  double stationary_mean_sojourn = 0.0;  // NaN when reducible
  // Continuous kernels only: max |integral of q_x(y,.) - P(x,y)|.
  double normalisation_error = 0.0;
};

AssumptionReport validate_assumptions(const Kernel& kernel);

// ---------------------------------------------------------------------------
// Embedded chain and stationary objects

Matrix emc_transition(const Kernel& kernel);
Matrix n_step_transition(const Matrix& p, unsigned n);

bool is_irreducible(const Matrix& p);
// gcd of cycle lengths of the support digraph; requires irreducibility.
std::size_t emc_period(const Matrix& p);

// Throws "reducible_emc" when P is not irreducible.
Vector stationary_emc(const Matrix& p);

struct StationaryPair {
  Vector rho;
  // Discrete: rho_tilde(y,k) laid out [y][k-1].
  // Continuous: mixture weights w[x][y] = rho(x) P(x,y) of the densities f_xy,
  // so that rho_tilde(y,t) = sum_x w[x][y] f_xy(t).
  std::vector<double> rho_tilde;
  double invariance_residual = 0.0;
  double mass_residual = 0.0;
};

// Throws "not_stationary" when rho P != rho within 1e-10 or rho is not a
// probability vector.
StationaryPair stationary_pair(const Kernel& kernel, const Vector& rho);
double rho_tilde_density(const Kernel& kernel, const StationaryPair& pair,
                         std::size_t y, double sojourn);

struct MeanSojourn {
  Vector per_state;
  double stationary = 0.0;  // sum_x rho(x) m(x); NaN when EMC is reducible
};

MeanSojourn mean_sojourn(const Kernel& kernel);

struct MinorizationConstants {
  unsigned k = 1;
  unsigned l = 1;
  Vector nu_star;
  Vector eta_star;
  double nu_mass = 0.0;
  double eta_mass = 0.0;
  unsigned kappa = 2;
  // nu_star has zero mass: the lower bound carries no information at this k.
  bool vacuous = false;
  // min over x,y of the Cesaro average; diagnostic only.
  double uniform_constant = 0.0;
};

MinorizationConstants minorization(const Matrix& p, unsigned k, unsigned l);
// Smallest k <= max_k whose Cesaro minorant has positive mass; throws
// "vacuous_minorization" if none exists.
unsigned smallest_minorizing_k(const Matrix& p, unsigned max_k = 64);

// ---------------------------------------------------------------------------
// Constructors from Markov and sojourn data

// Markov chain with transition matrix p_tilde viewed as a semi-Markov kernel:
// q(x,y,k) = p_tilde(x,y) p_tilde(x,x)^(k-1) for y != x. The geometric tail
// beyond k_max is folded into the cell k = k_max.
DiscreteSmk embed_markov_discrete(const Matrix& p_tilde, std::size_t k_max);

// Jump process with generator A: P(x,y) = a_xy / a_x, exponential(a_x)
// sojourns independent of the destination.
ContinuousSmk embed_markov_continuous(const Matrix& generator);

// Discrete kernel with q(x,y,k) = P(x,y) * P(k-1 < T_xy <= k), T_xy ~ sojourns
// [x][y], with P(T_xy > k_max - 1) folded into k = k_max.
DiscreteSmk discretize_sojourns(const Matrix& p,
                                std::span<const SojournDensity> sojourns,
                                std::size_t k_max);

// Markov transition matrix whose discrete embedding has the same jump
// proportions as `kernel` and geometric sojourns with the same means.
Matrix moment_matched_markov(const DiscreteSmk& kernel);

}  // namespace smk
