#pragma once

#include <vector>

#include "smk/kernel.hpp"

namespace smk::testing {

// Two states swapping deterministically with unit sojourns.
inline DiscreteSmk alternating_kernel(std::size_t k_max = 1) {
  std::vector<double> q(2 * 2 * k_max, 0.0);
  q[(0 * 2 + 1) * k_max] = 1.0;
  q[(1 * 2 + 0) * k_max] = 1.0;
  return DiscreteSmk(StateSpace::numbered(2), k_max, std::move(q));
}

inline Matrix matrix2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Markov chain on two states with the given stay probabilities, as a
// discrete semi-Markov kernel.
inline DiscreteSmk geometric_kernel(double stay1, double stay2, std::size_t k_max) {
  return embed_markov_discrete(matrix2(stay1, 1.0 - stay1, 1.0 - stay2, stay2), k_max);
}

}  // namespace smk::testing
