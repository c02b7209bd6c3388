#pragma once

// Hellinger geometry on semi-Markov kernels.

#include <span>
#include <vector>

#include "smk/kernel.hpp"

namespace smk {

struct HellingerProfile {
  // h^2(Q_{x;1}, Q_{x;2}) for every state x, each in [0, 1].
  Vector per_state;
};

// 1/2 sum (sqrt(a) - sqrt(b))^2 over two probability rows.
double hellinger_sq(std::span<const double> a, std::span<const double> b);
// sum sqrt(a b); equals 1 - hellinger_sq for probability rows.
double hellinger_affinity(std::span<const double> a, std::span<const double> b);

// Squared Hellinger distance between the conditional kernels at state x.
// Continuous kernels integrate by quadrature.
double hellinger_sq_state(const Kernel& a, const Kernel& b, std::size_t x);
double hellinger_affinity_state(const Kernel& a, const Kernel& b, std::size_t x);
HellingerProfile hellinger_sq(const Kernel& a, const Kernel& b);

struct KernelSemiDistance {
  double value = 0.0;
  Vector weight_measure;
};

// d_mu(a, b) = sqrt(sum_x mu(x) h^2_x). Throws on negative weights.
KernelSemiDistance semi_distance(const Kernel& a, const Kernel& b, const Vector& mu);
double semi_distance(const HellingerProfile& profile, const Vector& mu);

struct LeastFavorablePair {
  double lambda = 0.0;
  // Hellinger angle alpha_x with h^2(Q_{x;0}, Q_{x;1}) = 1 - cos(alpha_x).
  Vector alpha;
  Vector h2_01;
  // alpha_x below kAngleFloor: the rows coincide and q2 copies q1 there.
  std::vector<bool> degenerate;
  Kernel q2;
  // max_x |total mass of row x of q2 - 1|.
  double mass_error = 0.0;
};

inline constexpr double kAngleFloor = 1e-8;

// Builds q_{x;2} = (sin((1-lambda) a)/sin a sqrt(q_{x;1}) +
//                  sin(lambda a)/sin a sqrt(q_{x;0}))^2 per state.
// Requires lambda in (0, 1/4).
LeastFavorablePair least_favorable(const Kernel& q0, const Kernel& q1, double lambda);

struct PhiInverseReport {
  // max over support cells of sqrt(q0 / q2), per state and overall.
  Vector per_state;
  double max_ratio = 0.0;
  double bound = 0.0;  // 1 / lambda
  bool holds = true;
  std::size_t cells_checked = 0;
};

// Discrete kernels scan every cell with q0 > 0. Continuous kernels scan a
// log-spaced grid of sojourns across each pair's integration window.
PhiInverseReport phi_inverse_bound_check(const LeastFavorablePair& pair, const Kernel& q0);

// Membership of each state in G_q: h(Q_x, Q_{x;1}) <= lambda h(Q_{x;0}, Q_{x;1}).
std::vector<bool> g_set(const Kernel& q, const Kernel& q0, const Kernel& q1, double lambda);

}  // namespace smk
