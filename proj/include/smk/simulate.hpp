#pragma once

// Trajectories of Markov renewal processes, likelihoods, and the KL
// functionals that define Kullback-Leibler neighbourhoods.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "smk/kernel.hpp"
#include "smk/random.hpp"

namespace smk {

// H_n = (J_0..J_n, S_0..S_n). A stationary start records S_0 = X_0 > 0, the
// sojourn coordinate of the initial pair drawn from rho_tilde; an explicit
// start has S_0 = 0 and no initial sojourn.
struct Trajectory {
  std::vector<std::size_t> states;
  std::vector<double> jump_times;

  std::size_t n() const { return states.empty() ? 0 : states.size() - 1; }
  // X_l = S_l - S_{l-1} for l >= 1; X_0 = S_0.
  double sojourn(std::size_t l) const {
    return l == 0 ? jump_times[0] : jump_times[l] - jump_times[l - 1];
  }
  bool stationary_start() const { return !jump_times.empty() && jump_times[0] > 0.0; }
};

struct InitialLaw {
  // Empty: draw (J_0, X_0) from rho_tilde. Otherwise J_0 ~ distribution.
  std::optional<Vector> distribution;

  static InitialLaw stationary() { return {}; }
  static InitialLaw fixed(std::size_t state, std::size_t size);
};

// Draws (next state, sojourn) pairs. Discrete kernels invert the cumulative
// row table with one uniform. Continuous kernels use one uniform for the
// destination, then the sojourn sampler of SojournDensity.
class TransitionSampler {
 public:
  explicit TransitionSampler(const Kernel& kernel);

  struct Draw {
    std::size_t state;
    double sojourn;
  };

  Draw next(std::size_t x, Rng& rng) const;
  // (J_0, X_0) from rho_tilde: x ~ rho with one uniform, then next(x).
  Draw stationary(Rng& rng) const;
  std::size_t size() const { return n_; }

 private:
  Kernel kernel_;
  std::size_t n_ = 0;
  std::size_t k_max_ = 0;
  // Discrete: per row over the (y,k) cells. Continuous: per row of P.
  std::vector<double> cumulative_;
  std::vector<double> rho_cumulative_;  // empty when the EMC is reducible
};

Trajectory sample_trajectory(const Kernel& kernel, std::size_t n, const InitialLaw& init,
                             std::uint64_t seed);
// Same with a caller-owned sampler and generator.
Trajectory sample_trajectory(const TransitionSampler& sampler, std::size_t n,
                             const InitialLaw& init, Rng& rng);

struct LogLikelihood {
  double value = 0.0;  // -inf when some factor is zero
  // Step of the first zero factor: 0 for the initial pair, l for the
  // transition J_{l-1} -> J_l.
  std::optional<std::size_t> first_zero_step;
  bool initial_included = false;
};

// sum_l log q_{J_{l-1}}(J_l, X_l), plus log rho_tilde(J_0, X_0) when requested
// and the trajectory has a stationary start.
LogLikelihood log_likelihood(const Kernel& kernel, const Trajectory& traj, bool include_initial);

enum class KlMethod { kAnalytic, kMonteCarlo };

struct KlOptions {
  KlMethod method = KlMethod::kAnalytic;
  std::size_t replications = 10000;
  std::uint64_t seed = 0;
  bool include_initial = true;
};

struct KlFunctionals {
  KlMethod method = KlMethod::kAnalytic;
  double kl = 0.0;
  double v0 = 0.0;
  double per_step_kl = 0.0;
  double initial_kl = 0.0;
  bool infinite = false;
  // Standard errors of the Monte Carlo estimates (0 in analytic mode).
  double kl_se = 0.0;
  double v0_se = 0.0;
  std::size_t replications = 0;
};

// K and V_0 of the n-step laws started from rho_tilde. Analytic mode is exact:
// K = initial term + n * stationary per-step rate, and V_0 is the variance of
// the log-likelihood ratio propagated through the embedded chain by a
// recursion on (state, first two moments). Continuous kernels evaluate the
// per-pair integrals by quadrature. Monte Carlo mode simulates under q0.
KlFunctionals kl_functionals(const Kernel& q0, const Kernel& q, std::size_t n,
                             const KlOptions& options = {});

struct KlMembership {
  bool inside = false;
  // n eps^2 minus the (upper 99% edge in Monte Carlo mode of the) functional.
  double kl_margin = 0.0;
  double v0_margin = 0.0;
  KlFunctionals functionals;
};

KlMembership in_kl_neighborhood(const Kernel& q, const Kernel& q0, double eps, std::size_t n,
                                const KlOptions& options = {});

// CSV with columns index,state,jump_time; states written by label.
void write_trajectory_csv(const Trajectory& traj, const StateSpace& states, std::ostream& out);
Trajectory read_trajectory_csv(std::istream& in, const StateSpace& states);

}  // namespace smk
