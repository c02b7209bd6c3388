#include <gtest/gtest.h>

#include <cmath>

#include "smk/error.hpp"
#include "smk/metrics.hpp"
#include "smk/random.hpp"
#include "smk/verification.hpp"
#include "unit/fixtures.hpp"

namespace smk {
namespace {

using testing::geometric_kernel;

// Independent evaluation straight from the embedding formula, tail fold
// included, without going through the kernel table.
double naive_geometric_h2(double s0, double s1, std::size_t k_max) {
  auto cell = [&](double s, std::size_t k) {
    const double jump = 1.0 - s;
    return k < k_max ? jump * std::pow(s, k - 1.0) : std::pow(s, k_max - 1.0);
  };
  double sum = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double d = std::sqrt(cell(s0, k)) - std::sqrt(cell(s1, k));
    sum += d * d;
  }
  return 0.5 * sum;
}

TEST(Hellinger, IdenticalIsZeroDisjointIsOne) {
  const Kernel q = geometric_kernel(0.3, 0.6, 5);
  EXPECT_EQ(hellinger_sq(q, q).per_state.maxCoeff(), 0.0);
  const std::vector<double> a = {1, 0, 0}, b = {0, 0.5, 0.5};
  EXPECT_DOUBLE_EQ(hellinger_sq(a, b), 1.0);
  EXPECT_DOUBLE_EQ(hellinger_affinity(a, b), 0.0);
  EXPECT_DOUBLE_EQ(hellinger_affinity(a, a), 1.0);
}

TEST(Hellinger, GeometricPairMatchesNaiveSum) {
  const std::size_t km = 30;
  const Kernel q1 = geometric_kernel(0.3, 0.3, km);
  const Kernel q2 = geometric_kernel(0.5, 0.5, km);
  const HellingerProfile h = hellinger_sq(q1, q2);
  const double oracle = naive_geometric_h2(0.3, 0.5, km);
  EXPECT_NEAR(h.per_state(0), oracle, 1e-12);
  EXPECT_NEAR(h.per_state(1), oracle, 1e-12);
  for (std::size_t x = 0; x < 2; ++x) {
    EXPECT_NEAR(hellinger_affinity_state(q1, q2, x), 1.0 - oracle, 1e-12);
  }
}

TEST(SemiDistance, WeightedSum) {
  const std::size_t km = 30;
  const Kernel q1 = geometric_kernel(0.3, 0.3, km);
  const Kernel q2 = geometric_kernel(0.5, 0.5, km);
  const double h2 = naive_geometric_h2(0.3, 0.5, km);
  const Vector mu = (Vector(2) << 0.3, 0.6).finished();
  EXPECT_NEAR(semi_distance(q1, q2, mu).value, std::sqrt(0.9 * h2), 1e-12);
  EXPECT_EQ(semi_distance(q1, q2, Vector::Zero(2)).value, 0.0);
  EXPECT_EQ(semi_distance(q1, q1, Vector::Ones(2)).value, 0.0);
  EXPECT_THROW(semi_distance(q1, q2, (Vector(2) << -1.0, 1.0).finished()), Error);
}

TEST(Hellinger, ContinuousExponentialClosedForm) {
  // Same EMC, exponential sojourns with rates a and b: affinity 2 sqrt(ab)/(a+b).
  const Kernel qa = embed_markov_continuous((Matrix(2, 2) << -1, 1, 1, -1).finished());
  const Kernel qb = embed_markov_continuous((Matrix(2, 2) << -4, 4, 4, -4).finished());
  EXPECT_NEAR(hellinger_sq_state(qa, qb, 0), 1.0 - 2.0 * 2.0 / 5.0, 1e-10);
}

TEST(Hellinger, RejectsMismatchedKernels) {
  EXPECT_THROW(hellinger_sq(Kernel{geometric_kernel(0.3, 0.3, 4)},
                            Kernel{geometric_kernel(0.3, 0.3, 5)}),
               Error);
}

void expect_identities(const LeastFavorablePair& pair, const Kernel& q0, const Kernel& q1,
                       double tol) {
  const double lambda = pair.lambda;
  for (std::size_t x = 0; x < pair.degenerate.size(); ++x) {
    ASSERT_FALSE(pair.degenerate[x]);
    const double a = pair.alpha(x);
    const double h01 = hellinger_sq_state(q0, q1, x);
    const double h12 = hellinger_sq_state(q1, pair.q2, x);
    const double h02 = hellinger_sq_state(q0, pair.q2, x);
    EXPECT_NEAR(h01, 1.0 - std::cos(a), tol);
    EXPECT_NEAR(h12, 1.0 - std::cos(lambda * a), tol);
    EXPECT_NEAR(h02, 1.0 - std::cos((1.0 - lambda) * a), tol);
    EXPECT_LE(lambda * lambda * h01, h12 + tol);
    EXPECT_LE(h12, h01 + tol);
    EXPECT_LE((1.0 - lambda) * (1.0 - lambda) * h01, h02 + tol);
  }
}

TEST(LeastFavorable, GeometricPairIdentities) {
  const Kernel q0 = geometric_kernel(0.3, 0.3, 30);
  const Kernel q1 = geometric_kernel(0.5, 0.5, 30);
  const LeastFavorablePair pair = least_favorable(q0, q1, 0.1);
  expect_identities(pair, q0, q1, 1e-10);
  EXPECT_LT(pair.mass_error, 1e-12);
  const PhiInverseReport phi = phi_inverse_bound_check(pair, q0);
  EXPECT_TRUE(phi.holds);
  EXPECT_LT(phi.max_ratio, 10.0);
  EXPECT_EQ(phi.cells_checked, 60u);
}

TEST(LeastFavorable, ContinuousWeibullVsExponential) {
  const Matrix swap = testing::matrix2(0, 1, 1, 0);
  const Kernel q0 = ContinuousSmk(StateSpace::numbered(2), swap,
                                  std::vector<SojournDensity>(4, SojournDensity::exponential(0.5)));
  const Kernel q1 = ContinuousSmk(
      StateSpace::numbered(2), swap,
      std::vector<SojournDensity>(4, SojournDensity::weibull(0.5, 1.0)));
  const LeastFavorablePair pair = least_favorable(q0, q1, 0.2);
  expect_identities(pair, q0, q1, 1e-7);
  EXPECT_LT(pair.mass_error, 1e-7);
  EXPECT_TRUE(phi_inverse_bound_check(pair, q0).holds);
}

TEST(LeastFavorable, IdenticalRowsAreDegenerate) {
  const Kernel q0 = geometric_kernel(0.3, 0.6, 10);
  const Kernel q1 = geometric_kernel(0.3, 0.2, 10);
  const LeastFavorablePair pair = least_favorable(q0, q1, 0.1);
  EXPECT_TRUE(pair.degenerate[0]);
  EXPECT_FALSE(pair.degenerate[1]);
  const auto& q2 = std::get<DiscreteSmk>(pair.q2);
  const auto& d1 = std::get<DiscreteSmk>(q1);
  for (std::size_t c = 0; c < q2.row_cells(); ++c) EXPECT_EQ(q2.row(0)[c], d1.row(0)[c]);
}

TEST(LeastFavorable, RejectsLambdaOutsideRange) {
  const Kernel q0 = geometric_kernel(0.3, 0.6, 10);
  EXPECT_THROW(least_favorable(q0, q0, 0.25), Error);
  EXPECT_THROW(least_favorable(q0, q0, 0.0), Error);
}

TEST(LeastFavorable, RandomDrawsHaveNoViolations) {
  IdentityOptions o;
  o.seed = 99;
  o.draws = 300;
  const IdentityReport r = verify_identities(o);
  EXPECT_EQ(r.violations, 0u) << (r.examples.empty() ? "" : r.examples.front());
  EXPECT_LT(r.max_phi_ratio_to_bound, 1.0);
}

TEST(GSet, EndpointsAndNaiveRecomputation) {
  const Kernel q0 = geometric_kernel(0.3, 0.6, 10);
  const Kernel q1 = geometric_kernel(0.5, 0.2, 10);
  for (bool in : g_set(q1, q0, q1, 0.1)) EXPECT_TRUE(in);
  for (bool in : g_set(q0, q0, q1, 0.1)) EXPECT_FALSE(in);

  Rng rng(4);
  for (int draw = 0; draw < 20; ++draw) {
    const Kernel q = random_discrete_kernel(rng, 2, 10);
    const auto g = g_set(q, q0, q1, 0.2);
    for (std::size_t x = 0; x < 2; ++x) {
      const auto r = std::get<DiscreteSmk>(q).row(x);
      const auto r0 = std::get<DiscreteSmk>(q0).row(x);
      const auto r1 = std::get<DiscreteSmk>(q1).row(x);
      double a = 0.0, b = 0.0;
      for (std::size_t c = 0; c < r.size(); ++c) {
        a += std::pow(std::sqrt(r[c]) - std::sqrt(r1[c]), 2);
        b += std::pow(std::sqrt(r0[c]) - std::sqrt(r1[c]), 2);
      }
      EXPECT_EQ(g[x], std::sqrt(a / 2) <= 0.2 * std::sqrt(b / 2));
    }
  }
}

}  // namespace
}  // namespace smk
