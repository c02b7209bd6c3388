#pragma once

// Robust tests between semi-Markov kernels built on randomly selected,
// well separated transitions of one trajectory.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smk/covering.hpp"
#include "smk/kernel.hpp"
#include "smk/metrics.hpp"
#include "smk/random.hpp"
#include "smk/simulate.hpp"

namespace smk {

// pi^2 / 16
inline constexpr double kIota = 0.61685027506808491;

// ((1-3 lambda)/(1-lambda)) (1 - iota) - 8 ((1-lambda)/lambda) xi^2
double k_lambda(double lambda, double xi);
// Largest xi in {0.01, 0.02, ..., 0.99} with k_lambda(lambda, xi) > 0.
// Throws "infeasible_xi" if none.
double default_xi(double lambda);

struct TestConstants {
  double lambda = 0.1;
  double xi = 0.0;
  unsigned kappa = 2;
  double k = 0.0;          // (1 - lambda)^2 / kappa
  double k_lambda = 0.0;   // see k_lambda()
  double k_tilde = 0.0;    // k_lambda / kappa
};

TestConstants test_constants(double lambda, double xi, unsigned kappa);

enum class AlternativeKind { kSimple, kBall, kNet };

std::string alternative_name(AlternativeKind kind);

struct PlanOptions {
  double lambda = 0.1;
  std::optional<double> xi;
  // Separation in d_{nu*}. Defaults to d_{nu*}(q0, q1) for simple and ball
  // alternatives; required for nets.
  std::optional<double> epsilon;
  // Defaults: k = smallest with a nonvacuous minorant for q0's EMC, l = 1.
  std::optional<unsigned> k;
  std::optional<unsigned> l;
  std::uint64_t seed = 0;
};

struct TestPlan {
  Kernel q0;
  AlternativeKind kind = AlternativeKind::kBall;
  // Simple and ball: the single alternative center. Net: the net points.
  std::vector<Kernel> alternatives;
  // Kernel in the numerator of Phi for each alternative: q1 itself for
  // simple plans, the least-favourable q2 for ball and net plans.
  std::vector<Kernel> test_kernels;
  std::vector<std::uint64_t> test_digests;
  MinorizationConstants minorization;
  TestConstants constants;
  double epsilon = 0.0;
  unsigned k = 1;
  unsigned l = 1;
  std::uint64_t seed = 0;

  unsigned kappa() const { return constants.kappa; }
  // exp(-K n eps^2), times the number of constituents for nets.
  double type_i_bound(std::size_t n) const;
  // exp(-K~ n eps^2); simple plans use exp(-K n eps^2) for both errors.
  double type_ii_bound(std::size_t n) const;
};

// Validates lambda in (0, 1/4), the positivity condition on (lambda, xi),
// the minorization, and separation epsilon > 0 with
// d_{nu*}(q0, alternative) >= epsilon for every alternative.
TestPlan make_plan(const Kernel& q0, AlternativeKind kind, std::vector<Kernel> alternatives,
                   const PlanOptions& options = {});
TestPlan make_net_plan(const Kernel& q0, const CoveringNet& net, const PlanOptions& options);

struct BlockDraw {
  std::size_t blocks = 0;        // N = floor(n / kappa)
  std::vector<std::size_t> tau;  // tau_i = kappa (i-1) + l + Y_i, Y_i ~ U{1..k}
};

BlockDraw draw_block_indices(std::size_t n, unsigned k, unsigned l, Rng& rng);
BlockDraw draw_block_indices(std::size_t n, unsigned k, unsigned l, std::uint64_t seed);

struct Statistic {
  double value = 0.0;  // +inf when q0 vanishes on a visited cell, -inf when q_test does
  std::optional<std::size_t> infinite_at;  // transition index tau_i
};

// T = sum_i log sqrt(q_test / q0) at the transitions J_{tau_i - 1} -> J_{tau_i}.
// Throws "off_support" when both kernels vanish on a selected transition.
Statistic test_statistic(const Trajectory& traj, const Kernel& q0, const Kernel& q_test,
                         const std::vector<std::size_t>& tau);

struct TestOutcome {
  double statistic = 0.0;  // max over constituents
  bool reject_null = false;
  std::size_t blocks = 0;
  std::vector<std::size_t> tau;
  std::vector<double> constituent_statistics;
  std::optional<std::size_t> rejecting_index;  // first constituent with T > 0
  std::uint64_t test_digest = 0;               // of the first constituent
};

// Runs every constituent test of the plan on one shared draw of the block
// indices and rejects when any statistic is strictly positive.
TestOutcome run_test(const Trajectory& traj, const TestPlan& plan, Rng& aux);
TestOutcome run_test(const Trajectory& traj, const TestPlan& plan);

TestOutcome psi_ball(const Trajectory& traj, const TestPlan& plan, Rng& aux);
TestOutcome psi_simple(const Trajectory& traj, const TestPlan& plan, Rng& aux);
TestOutcome psi_aggregate(const Trajectory& traj, const TestPlan& plan, Rng& aux);

// Null: a Markov chain given by its transition matrix (discrete time) or
// generator (continuous time), embedded as a semi-Markov kernel on the
// alternative's states and grid. Alternative: ball around `alternative`.
struct MarkovNull {
  Matrix matrix;
  bool generator = false;
};

Kernel embed_markov_null(const MarkovNull& null, const Kernel& alternative);
TestPlan markov_vs_semimarkov_plan(const MarkovNull& null, const Kernel& alternative,
                                   const PlanOptions& options = {});
TestOutcome markov_vs_semimarkov(const Trajectory& traj, const TestPlan& plan, Rng& aux);

// Alternatives in the d_{eta*} ball of the given radius around `center`.
// Discrete rows are perturbed on the Hellinger sphere with an exact per-state
// angle; continuous kernels jitter the sojourn parameters and shrink the
// jitter until the probe lies inside the ball.
std::vector<Kernel> ball_probes(const Kernel& center, double radius, const Vector& eta_star,
                                std::size_t count, std::uint64_t seed);

struct StudyRow {
  std::size_t n = 0;
  double epsilon = 0.0;
  double type_i_rate = 0.0;
  double type_ii_rate = 0.0;  // max over the alternatives probed
  double type_i_bound = 0.0;
  double type_ii_bound = 0.0;
  std::size_t replications = 0;
  double type_i_ci_half_width = 0.0;
  double type_ii_ci_half_width = 0.0;
  // rate > bound + Wilson half-width
  bool type_i_flagged = false;
  bool type_ii_flagged = false;
  bool skipped = false;
  std::string skip_reason;
};

struct ErrorStudy {
  std::vector<StudyRow> rows;
  double confidence = 0.99;
};

struct StudyCell {
  TestPlan plan;
  // Data-generating kernels for the type II column; empty skips it.
  std::vector<Kernel> alternatives;
};

struct StudyConfig {
  std::vector<StudyCell> cells;
  std::vector<std::size_t> n_grid;
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  double confidence = 0.99;
};

// Rows in (cell, n) order. Each (cell, n, replication) owns trajectory and
// test-randomisation streams derived from the master seed.
ErrorStudy error_study(const StudyConfig& config);
void write_study_csv(const ErrorStudy& study, std::ostream& out);

// The two readings of the aggregated test's bounds at radius M eps_n:
// exponent K n eps_n^2 M^2 / 4 and K n eps_n^2 M / 4 (same with K~).
struct CorollaryBounds {
  double type_i_m_squared = 0.0;
  double type_i_m_linear = 0.0;
  double type_ii_m_squared = 0.0;
  double type_ii_m_linear = 0.0;
};

CorollaryBounds corollary_bounds(const TestConstants& constants, std::size_t n, double eps_n,
                                 double m);

// FNV-1a over the kernel's numeric content.
std::uint64_t kernel_digest(const Kernel& kernel);

}  // namespace smk
