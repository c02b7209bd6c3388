#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles/kl_enumeration.hpp"
#include "smk/error.hpp"
#include "smk/simulate.hpp"
#include "smk/stats.hpp"
#include "smk/verification.hpp"
#include "unit/fixtures.hpp"

namespace smk {
namespace {

using testing::alternating_kernel;
using testing::geometric_kernel;
using testing::matrix2;

TEST(Simulate, AlternatingKernelPath) {
  const Trajectory t = sample_trajectory(alternating_kernel(), 4, InitialLaw::fixed(0, 2), 1);
  EXPECT_EQ(t.states, (std::vector<std::size_t>{0, 1, 0, 1, 0}));
  EXPECT_EQ(t.jump_times, (std::vector<double>{0, 1, 2, 3, 4}));
  EXPECT_FALSE(t.stationary_start());
  for (std::size_t l = 1; l <= 4; ++l) EXPECT_EQ(t.sojourn(l), 1.0);
}

TEST(Simulate, SameSeedSameTrajectory) {
  const Kernel q = geometric_kernel(0.3, 0.6, 8);
  const Trajectory a = sample_trajectory(q, 500, InitialLaw::stationary(), 77);
  const Trajectory b = sample_trajectory(q, 500, InitialLaw::stationary(), 77);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.jump_times, b.jump_times);
  EXPECT_TRUE(a.stationary_start());
  const Trajectory c = sample_trajectory(q, 500, InitialLaw::stationary(), 78);
  EXPECT_NE(a.jump_times, c.jump_times);
}

TEST(Simulate, TransitionFrequenciesWithinMultinomialBands) {
  // Three-state chain so that the EMC has nontrivial rows.
  const Matrix pt = (Matrix(3, 3) << 0.3, 0.5, 0.2, 0.1, 0.6, 0.3, 0.25, 0.25, 0.5).finished();
  const DiscreteSmk q = embed_markov_discrete(pt, 60);
  const Matrix p = emc_transition(q);
  const std::size_t n = 100000;
  const Trajectory t = sample_trajectory(q, n, InitialLaw::stationary(), 3);
  Matrix counts = Matrix::Zero(3, 3);
  for (std::size_t l = 1; l <= n; ++l) counts(t.states[l - 1], t.states[l]) += 1.0;
  for (int x = 0; x < 3; ++x) {
    const double visits = counts.row(x).sum();
    for (int y = 0; y < 3; ++y) {
      const double sigma = std::sqrt(p(x, y) * (1 - p(x, y)) / visits);
      EXPECT_NEAR(counts(x, y) / visits, p(x, y), 3.0 * sigma + 1e-12);
    }
  }
}

TEST(Simulate, ContinuousSojournsFollowTheirLaw) {
  const Kernel q = embed_markov_continuous((Matrix(2, 2) << -2, 2, 0.5, -0.5).finished());
  const Trajectory t = sample_trajectory(q, 20000, InitialLaw::fixed(0, 2), 9);
  Moments from0, from1;
  for (std::size_t l = 1; l <= t.n(); ++l) {
    (t.states[l - 1] == 0 ? from0 : from1).add(t.sojourn(l));
  }
  EXPECT_NEAR(from0.mean(), 0.5, 4.0 * from0.mean_se());
  EXPECT_NEAR(from1.mean(), 2.0, 4.0 * from1.mean_se());
}

TEST(Simulate, StationaryStartDrawsFromRhoTilde) {
  const std::size_t km = 4;
  const Kernel q = geometric_kernel(0.3, 0.6, km);
  const StationaryPair pair = stationary_pair(q, stationary_emc(emc_transition(q)));
  std::vector<double> counts(2 * km, 0.0);
  const TransitionSampler sampler(q);
  Rng rng(12);
  for (int i = 0; i < 40000; ++i) {
    const auto d = sampler.stationary(rng);
    counts[d.state * km + static_cast<std::size_t>(d.sojourn) - 1] += 1.0;
  }
  EXPECT_GT(chi_square_gof_pvalue(counts, pair.rho_tilde), 1e-4);
}

TEST(Simulate, RejectsBadInitialLaw) {
  EXPECT_THROW(InitialLaw::fixed(2, 2), Error);
  InitialLaw bad{Vector::Constant(2, 0.7)};
  EXPECT_THROW(sample_trajectory(alternating_kernel(), 3, bad, 1), Error);
}

TEST(LogLikelihood, DeterministicKernelAlongItsPath) {
  const Kernel q = alternating_kernel();
  const Trajectory t = sample_trajectory(q, 6, InitialLaw::fixed(1, 2), 1);
  EXPECT_EQ(log_likelihood(q, t, true).value, 0.0);
}

TEST(LogLikelihood, HandComputedTwoStepPath) {
  const Kernel q = embed_markov_discrete(matrix2(0.3, 0.7, 0.4, 0.6), 10);
  Trajectory t;
  t.states = {0, 1, 0};
  t.jump_times = {0.0, 2.0, 3.0};
  const LogLikelihood ll = log_likelihood(q, t, true);
  EXPECT_FALSE(ll.initial_included);
  EXPECT_NEAR(ll.value, std::log(0.7 * 0.3) + std::log(0.4), 1e-14);
}

TEST(LogLikelihood, LeavingSupportIsMinusInfinity) {
  const Kernel q = alternating_kernel(2);
  Trajectory t;
  t.states = {0, 1, 1};
  t.jump_times = {0.0, 1.0, 2.0};
  const LogLikelihood ll = log_likelihood(q, t, false);
  EXPECT_TRUE(std::isinf(ll.value));
  EXPECT_LT(ll.value, 0.0);
  EXPECT_EQ(*ll.first_zero_step, 2u);
}

TEST(LogLikelihood, InitialFactorFromRhoTilde) {
  const Kernel q = embed_markov_discrete(matrix2(0.3, 0.7, 0.4, 0.6), 10);
  Trajectory t;
  t.states = {1, 0};
  t.jump_times = {2.0, 3.0};
  const LogLikelihood ll = log_likelihood(q, t, true);
  EXPECT_TRUE(ll.initial_included);
  // rho = (1/2, 1/2) for the embedded EMC; rho_tilde(2, 2) = 1/2 * 0.7 * 0.3.
  EXPECT_NEAR(ll.value, std::log(0.5 * 0.7 * 0.3) + std::log(0.4), 1e-13);
}

DiscreteSmk toy(double a, double b, double c, double d) {
  // Two states, k_max = 2: row x spreads over (y,k) cells.
  return DiscreteSmk(StateSpace::numbered(2), 2,
                     {a, b, 1 - a - b, 0.0, c, d, 0.0, 1 - c - d});
}

TEST(Kl, IdenticalKernelsGiveZero) {
  const Kernel q = geometric_kernel(0.3, 0.6, 6);
  const KlFunctionals f = kl_functionals(q, q, 50);
  EXPECT_NEAR(f.kl, 0.0, 1e-15);
  EXPECT_NEAR(f.v0, 0.0, 1e-15);
}

TEST(Kl, AnalyticMatchesEnumeration) {
  Rng rng(8);
  for (int draw = 0; draw < 10; ++draw) {
    const DiscreteSmk q0 = random_irreducible_kernel(rng, 2, 2);
    const DiscreteSmk q = random_irreducible_kernel(rng, 2, 2);
    for (std::size_t n : {1u, 2u, 3u, 5u}) {
      const auto oracle = oracle::enumerate_kl(q0, q, n);
      const KlFunctionals f = kl_functionals(q0, q, n);
      EXPECT_NEAR(f.kl, oracle.kl, 1e-10 * (1 + oracle.kl));
      EXPECT_NEAR(f.v0, oracle.v0, 1e-10 * (1 + oracle.v0));
    }
  }
}

TEST(Kl, MonteCarloWithinThreeStandardErrors) {
  const DiscreteSmk q0 = toy(0.1, 0.2, 0.5, 0.1);
  const DiscreteSmk q = toy(0.2, 0.2, 0.3, 0.3);
  const auto oracle = oracle::enumerate_kl(q0, q, 3);
  KlOptions mc;
  mc.method = KlMethod::kMonteCarlo;
  mc.replications = 20000;
  mc.seed = 4;
  const KlFunctionals f = kl_functionals(q0, q, 3, mc);
  EXPECT_NEAR(f.kl, oracle.kl, 3.0 * f.kl_se);
  EXPECT_NEAR(f.v0, oracle.v0, 3.0 * f.v0_se);
}

TEST(Kl, AffineInN) {
  const Kernel q0 = geometric_kernel(0.3, 0.6, 12);
  const Kernel q = geometric_kernel(0.4, 0.5, 12);
  const KlFunctionals a = kl_functionals(q0, q, 10);
  const KlFunctionals b = kl_functionals(q0, q, 1000);
  EXPECT_DOUBLE_EQ(a.per_step_kl, b.per_step_kl);
  EXPECT_NEAR(b.kl - a.kl, 990.0 * a.per_step_kl, 1e-9);
  EXPECT_GT(a.per_step_kl, 0.0);
}

TEST(Kl, ContinuousExponentialRate) {
  // Same jumps, sojourn rates 1 vs 2 everywhere: per-step KL(Exp(1) || Exp(2))
  // = log(1/2) + 2 - 1.
  const Kernel q0 = embed_markov_continuous((Matrix(2, 2) << -1, 1, 1, -1).finished());
  const Kernel q = embed_markov_continuous((Matrix(2, 2) << -2, 2, 2, -2).finished());
  const KlFunctionals f = kl_functionals(q0, q, 10);
  EXPECT_NEAR(f.per_step_kl, std::log(0.5) + 1.0, 1e-8);
  EXPECT_NEAR(f.kl, 11.0 * (std::log(0.5) + 1.0), 1e-7);
}

TEST(KlNeighborhood, Endpoints) {
  const Kernel q0 = geometric_kernel(0.3, 0.6, 6);
  EXPECT_TRUE(in_kl_neighborhood(q0, q0, 0.01, 10).inside);
  const Kernel disjoint = alternating_kernel(6);
  const KlMembership m = in_kl_neighborhood(disjoint, q0, 10.0, 10);
  EXPECT_FALSE(m.inside);
  EXPECT_TRUE(m.functionals.infinite);
}

TEST(KlNeighborhood, BoundaryAgreesWithEnumeration) {
  const DiscreteSmk q0 = toy(0.1, 0.2, 0.5, 0.1);
  const DiscreteSmk q = toy(0.2, 0.2, 0.3, 0.3);
  const std::size_t n = 3;
  const auto oracle = oracle::enumerate_kl(q0, q, n);
  const double boundary = std::sqrt(std::max(oracle.kl, oracle.v0) / n);
  EXPECT_FALSE(in_kl_neighborhood(q, q0, boundary * 0.999, n).inside);
  EXPECT_TRUE(in_kl_neighborhood(q, q0, boundary * 1.001, n).inside);
}

TEST(TrajectoryCsv, RoundTrip) {
  const Kernel q = embed_markov_continuous((Matrix(2, 2) << -1, 1, 3, -3).finished());
  const Trajectory t = sample_trajectory(q, 50, InitialLaw::stationary(), 5);
  std::stringstream ss;
  write_trajectory_csv(t, states_of(q), ss);
  const Trajectory back = read_trajectory_csv(ss, states_of(q));
  EXPECT_EQ(back.states, t.states);
  EXPECT_EQ(back.jump_times, t.jump_times);
}

TEST(TrajectoryCsv, RejectsMalformedInput) {
  const StateSpace s = StateSpace::numbered(2);
  std::istringstream no_header("0,1,0\n");
  EXPECT_THROW(read_trajectory_csv(no_header, s), Error);
  std::istringstream bad_state("index,state,jump_time\n0,3,0\n");
  EXPECT_THROW(read_trajectory_csv(bad_state, s), Error);
  std::istringstream decreasing("index,state,jump_time\n0,1,1\n1,2,0.5\n");
  EXPECT_THROW(read_trajectory_csv(decreasing, s), Error);
}

}  // namespace
}  // namespace smk
