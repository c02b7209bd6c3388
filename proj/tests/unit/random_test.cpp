#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "smk/random.hpp"
#include "smk/stats.hpp"

namespace smk {
namespace {

TEST(DeriveSeed, DependsOnMasterTagAndIndex) {
  const std::uint64_t base = derive_seed(1, "kl", 0);
  EXPECT_EQ(base, derive_seed(1, "kl", 0));
  EXPECT_NE(base, derive_seed(2, "kl", 0));
  EXPECT_NE(base, derive_seed(1, "tau", 0));
  EXPECT_NE(base, derive_seed(1, "kl", 1));
}

TEST(DeriveSeed, DistinctAcrossManyIndices) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(42, "cell", i));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(9, "x"), b(9, "x");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, UniformRange) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.open_uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(Rng, UniformIntIsUniform) {
  Rng rng(11);
  std::vector<double> counts(7, 0.0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.uniform_int(3, 9);
    ASSERT_GE(v, 3u);
    ASSERT_LE(v, 9u);
    counts[v - 3] += 1.0;
  }
  const std::vector<double> p(7, 1.0 / 7.0);
  EXPECT_GT(chi_square_gof_pvalue(counts, p), 1e-4);
}

TEST(Rng, UniformIntDegenerateRange) {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(rng.uniform_int(4, 4), 4u);
}

}  // namespace
}  // namespace smk
