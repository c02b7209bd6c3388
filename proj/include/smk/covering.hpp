#pragma once

// Finite covering nets over parametric families of kernels.

#include <iosfwd>
#include <vector>

#include "smk/kernel.hpp"

namespace smk {

enum class GridFamily {
  // Markov embeddings: state x stays with probability s_x and otherwise jumps
  // in the center's EMC proportions. The grid is the cartesian product of
  // `values` over states.
  kGeometric,
  // Weibull(shape, scale) sojourns on every pair with the center's EMC, for
  // shape in `values` and scale in `scales`. Discrete centers are discretised
  // to the center's k_max.
  kWeibull,
};

struct ParametricGrid {
  GridFamily family = GridFamily::kGeometric;
  std::vector<double> values;
  std::vector<double> scales;

  // s in {lo, lo + step, ..., hi} (inclusive up to rounding).
  static ParametricGrid geometric(double lo, double hi, double step);
};

struct GridPoint {
  std::vector<double> parameters;
  Kernel kernel;
};

// All kernels of the grid, in lexicographic parameter order (first state or
// shape varies slowest).
std::vector<GridPoint> enumerate_grid(const Kernel& center, const ParametricGrid& grid);

struct CoveringNet {
  Kernel center;
  double radius = 0.0;        // shell is (radius, 2 radius] in d_{nu*}
  double inner_radius = 0.0;  // covering radius in d_{eta*}
  Vector nu_star;
  Vector eta_star;
  std::vector<GridPoint> shell;
  std::vector<double> shell_to_center;   // d_{nu*}(center, shell[i])
  std::vector<double> shell_to_net;      // d_{eta*} to the nearest net point
  std::vector<std::size_t> net_indices;  // into `shell`, in selection order
  double log_cardinality = 0.0;          // ln |net|; -inf for an empty net

  std::size_t size() const { return net_indices.size(); }
  const Kernel& point(std::size_t i) const { return shell[net_indices[i]].kernel; }
};

// Farthest-point thinning of the grid points whose d_{nu*} distance from the
// center lies in (radius, 2 radius]: starting from the shell point farthest
// from the center, repeatedly add the shell point farthest (in d_{eta*}) from
// the current net until every shell point is within net_radius. Ties go to
// the lowest index. Throws "empty_grid" for an empty family.
CoveringNet covering_net(const Kernel& center, double radius, double net_radius,
                         const ParametricGrid& grid, const Vector& nu_star,
                         const Vector& eta_star);

// point_index,param_0..,d_nu_star_to_center,d_eta_star_to_nearest_net_point
void write_net_csv(const CoveringNet& net, std::ostream& out);

}  // namespace smk
