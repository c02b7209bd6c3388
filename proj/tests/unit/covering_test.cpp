#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smk/covering.hpp"
#include "smk/error.hpp"
#include "smk/metrics.hpp"
#include "unit/fixtures.hpp"

namespace smk {
namespace {

constexpr std::size_t kKmax = 40;

// Row of the two-state geometric embedding with stay s, from the formula.
double geometric_row_h2(double s, double t) {
  auto cell = [](double stay, std::size_t k) {
    return k < kKmax ? (1.0 - stay) * std::pow(stay, k - 1.0) : std::pow(stay, kKmax - 1.0);
  };
  double sum = 0.0;
  for (std::size_t k = 1; k <= kKmax; ++k) {
    sum += std::pow(std::sqrt(cell(s, k)) - std::sqrt(cell(t, k)), 2);
  }
  return 0.5 * sum;
}

double naive_distance(const std::vector<double>& a, const std::vector<double>& b,
                      const Vector& mu) {
  double s = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) s += mu(x) * geometric_row_h2(a[x], b[x]);
  return std::sqrt(s);
}

struct Scene {
  Kernel center = testing::geometric_kernel(0.2, 0.6, kKmax);
  Vector nu = Vector::Constant(2, 0.5);
  Vector eta = Vector::Ones(2);
  ParametricGrid grid = ParametricGrid::geometric(0.05, 0.95, 0.05);
};

TEST(Grid, GeometricValues) {
  const ParametricGrid g = ParametricGrid::geometric(0.05, 0.95, 0.05);
  ASSERT_EQ(g.values.size(), 19u);
  EXPECT_NEAR(g.values.back(), 0.95, 1e-12);
  EXPECT_THROW(ParametricGrid::geometric(0.5, 0.1, 0.1), Error);
}

TEST(Grid, EnumerationOrderAndKernels) {
  Scene s;
  const auto points = enumerate_grid(s.center, s.grid);
  ASSERT_EQ(points.size(), 19u * 19u);
  EXPECT_NEAR(points[1].parameters[1], 0.10, 1e-12);
  EXPECT_NEAR(points[1].parameters[0], 0.05, 1e-12);
  const auto& q = std::get<DiscreteSmk>(points[1].kernel);
  EXPECT_NEAR(q.q(1, 0, 2), 0.9 * 0.1, 1e-15);
}

TEST(Grid, WeibullFamily) {
  Scene s;
  ParametricGrid g;
  g.family = GridFamily::kWeibull;
  g.values = {0.5, 1.0};
  g.scales = {1.0, 2.0, 3.0};
  const auto points = enumerate_grid(s.center, g);
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[4].parameters, (std::vector<double>{1.0, 2.0}));
}

TEST(CoveringNet, MatchesIndependentFarthestPointCover) {
  Scene s;
  const double eps = 0.15, delta = 0.05;
  const CoveringNet net = covering_net(s.center, eps, delta, s.grid, s.nu, s.eta);

  std::vector<std::vector<double>> shell;
  std::vector<double> to_center;
  const std::vector<double> c = {0.2, 0.6};
  for (double a : s.grid.values) {
    for (double b : s.grid.values) {
      const double d = naive_distance(c, {a, b}, s.nu);
      if (d > eps && d <= 2 * eps) {
        shell.push_back({a, b});
        to_center.push_back(d);
      }
    }
  }
  ASSERT_EQ(net.shell.size(), shell.size());
  ASSERT_FALSE(shell.empty());

  std::size_t next = std::max_element(to_center.begin(), to_center.end()) - to_center.begin();
  std::vector<double> gap(shell.size(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> chosen;
  for (;;) {
    chosen.push_back(next);
    for (std::size_t i = 0; i < shell.size(); ++i) {
      gap[i] = std::min(gap[i], naive_distance(shell[next], shell[i], s.eta));
    }
    const std::size_t far = std::max_element(gap.begin(), gap.end()) - gap.begin();
    if (gap[far] <= delta) break;
    next = far;
  }
  EXPECT_EQ(net.size(), chosen.size());
  EXPECT_EQ(net.net_indices, chosen);
  EXPECT_NEAR(net.log_cardinality, std::log(static_cast<double>(chosen.size())), 1e-15);
}

TEST(CoveringNet, EveryShellPointIsCovered) {
  Scene s;
  const CoveringNet net = covering_net(s.center, 0.1, 0.03, s.grid, s.nu, s.eta);
  for (std::size_t i = 0; i < net.shell.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < net.size(); ++j) {
      best = std::min(best, semi_distance(net.shell[i].kernel, net.point(j), s.eta).value);
    }
    EXPECT_LE(best, 0.03 + 1e-12);
    EXPECT_NEAR(best, net.shell_to_net[i], 1e-12);
  }
}

TEST(CoveringNet, LargeNetRadiusGivesOnePoint) {
  Scene s;
  const CoveringNet net = covering_net(s.center, 0.1, 10.0, s.grid, s.nu, s.eta);
  EXPECT_EQ(net.size(), 1u);
  EXPECT_EQ(net.log_cardinality, 0.0);
}

TEST(CoveringNet, EmptyShellAndEmptyGrid) {
  Scene s;
  const CoveringNet net = covering_net(s.center, 5.0, 0.1, s.grid, s.nu, s.eta);
  EXPECT_EQ(net.size(), 0u);
  EXPECT_TRUE(std::isinf(net.log_cardinality));
  ParametricGrid empty;
  EXPECT_THROW(covering_net(s.center, 0.1, 0.1, empty, s.nu, s.eta), Error);
}

TEST(CoveringNet, CsvHasOneRowPerShellPoint) {
  Scene s;
  const CoveringNet net = covering_net(s.center, 0.15, 0.05, s.grid, s.nu, s.eta);
  std::ostringstream os;
  write_net_csv(net, os);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "point_index,param_0,param_1,d_nu_star_to_center,d_eta_star_to_nearest_net_point");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')),
            net.shell.size() + 1);
}

}  // namespace
}  // namespace smk
