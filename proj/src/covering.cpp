#include "smk/covering.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "smk/error.hpp"
#include "smk/kernel_io.hpp"
#include "smk/metrics.hpp"

namespace smk {
namespace {

Kernel geometric_kernel(const Kernel& center, const std::vector<double>& stay) {
  const auto* d = std::get_if<DiscreteSmk>(&center);
  if (!d) config_error("bad_grid", "geometric grids need a discrete center");
  const Matrix p = emc_transition(center);
  const auto n = static_cast<std::size_t>(p.rows());
  Matrix p_tilde = Matrix::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    const double leave = 1.0 - p(x, x);
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      p_tilde(x, y) = leave > 0.0 ? (1.0 - stay[x]) * p(x, y) / leave
                                  : (1.0 - stay[x]) / static_cast<double>(n - 1);
    }
    p_tilde(x, x) = stay[x];
  }
  DiscreteSmk k = embed_markov_discrete(p_tilde, d->k_max());
  return DiscreteSmk(d->states(), d->k_max(), {k.table().begin(), k.table().end()});
}

Kernel weibull_kernel(const Kernel& center, double shape, double scale) {
  const Matrix p = emc_transition(center);
  const auto n = static_cast<std::size_t>(p.rows());
  const std::vector<SojournDensity> sojourns(n * n, SojournDensity::weibull(shape, scale));
  if (const auto* d = std::get_if<DiscreteSmk>(&center)) {
    DiscreteSmk k = discretize_sojourns(p, sojourns, d->k_max());
    return DiscreteSmk(d->states(), d->k_max(), {k.table().begin(), k.table().end()});
  }
  return ContinuousSmk(states_of(center), p, sojourns);
}

double distance(const Kernel& a, const Kernel& b, const Vector& mu) {
  double s = 0.0;
  for (Eigen::Index x = 0; x < mu.size(); ++x) {
    if (mu(x) > 0.0) s += mu(x) * hellinger_sq_state(a, b, static_cast<std::size_t>(x));
  }
  return std::sqrt(s);
}

}  // namespace

ParametricGrid ParametricGrid::geometric(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) config_error("bad_grid", "grid needs lo <= hi and step > 0");
  ParametricGrid g;
  g.family = GridFamily::kGeometric;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) g.values.push_back(lo + step * static_cast<double>(i));
  return g;
}

std::vector<GridPoint> enumerate_grid(const Kernel& center, const ParametricGrid& grid) {
  std::vector<GridPoint> out;
  if (grid.values.empty()) return out;
  const std::size_t n = states_of(center).size();
  if (grid.family == GridFamily::kGeometric) {
    for (double v : grid.values) {
      if (!(v >= 0.0 && v < 1.0)) config_error("bad_grid", "stay probabilities must lie in [0,1)");
    }
    std::vector<std::size_t> digits(n, 0);
    while (true) {
      std::vector<double> stay(n);
      for (std::size_t x = 0; x < n; ++x) stay[x] = grid.values[digits[x]];
      out.push_back({stay, geometric_kernel(center, stay)});
      std::size_t pos = n;
      while (pos > 0) {
        --pos;
        if (++digits[pos] < grid.values.size()) break;
        digits[pos] = 0;
        if (pos == 0) return out;
      }
    }
  }
  if (grid.scales.empty()) return {};
  for (double shape : grid.values) {
    for (double scale : grid.scales) {
      out.push_back({{shape, scale}, weibull_kernel(center, shape, scale)});
    }
  }
  return out;
}

CoveringNet covering_net(const Kernel& center, double radius, double net_radius,
                         const ParametricGrid& grid, const Vector& nu_star,
                         const Vector& eta_star) {
  if (!(radius > 0.0)) config_error("bad_radius", "ball radius must be positive");
  if (!(net_radius >= 0.0)) config_error("bad_radius", "net radius must be >= 0");
  const std::size_t n = states_of(center).size();
  if (static_cast<std::size_t>(nu_star.size()) != n ||
      static_cast<std::size_t>(eta_star.size()) != n) {
    config_error("shape_mismatch", "weight measures have the wrong length");
  }
  auto points = enumerate_grid(center, grid);
  if (points.empty()) config_error("empty_grid", "parametric grid has no points");

  CoveringNet net{center, radius, net_radius, nu_star, eta_star, {}, {}, {}, {}, 0.0};
  for (auto& p : points) {
    const double d = distance(center, p.kernel, nu_star);
    if (d > radius && d <= 2.0 * radius) {
      net.shell.push_back(std::move(p));
      net.shell_to_center.push_back(d);
    }
  }
  const std::size_t m = net.shell.size();
  net.shell_to_net.assign(m, std::numeric_limits<double>::infinity());
  if (m == 0) {
    net.log_cardinality = -std::numeric_limits<double>::infinity();
    return net;
  }

  std::size_t next = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (net.shell_to_center[i] > net.shell_to_center[next]) next = i;
  }
  while (true) {
    net.net_indices.push_back(next);
    const Kernel& added = net.shell[next].kernel;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = i == next ? 0.0 : distance(added, net.shell[i].kernel, eta_star);
      net.shell_to_net[i] = std::min(net.shell_to_net[i], d);
    }
    std::size_t far = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (net.shell_to_net[i] > net.shell_to_net[far]) far = i;
    }
    if (net.shell_to_net[far] <= net_radius) break;
    next = far;
  }
  net.log_cardinality = std::log(static_cast<double>(net.net_indices.size()));
  return net;
}

void write_net_csv(const CoveringNet& net, std::ostream& out) {
  const std::size_t params = net.shell.empty() ? 0 : net.shell.front().parameters.size();
  out << "point_index";
  for (std::size_t j = 0; j < params; ++j) out << ",param_" << j;
  out << ",d_nu_star_to_center,d_eta_star_to_nearest_net_point\n";
  for (std::size_t i = 0; i < net.shell.size(); ++i) {
    out << i;
    for (double v : net.shell[i].parameters) out << ',' << format_double(v);
    out << ',' << format_double(net.shell_to_center[i]) << ','
        << format_double(net.shell_to_net[i]) << '\n';
  }
}

}  // namespace smk
