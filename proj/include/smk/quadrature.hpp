#pragma once

#include <functional>

namespace smk {

// Integration window on (0, inf). Outside [lo, hi] the integrand's mass is
// bounded by the tail probabilities used to choose the window.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

Window merge(const Window& a, const Window& b);

// Adaptive Gauss-Kronrod integration over [lo, hi], lo > 0. The window is
// split into geometrically growing pieces (ratio 4) so that integrable
// singularities at 0 (Weibull shape < 1) and long tails are both resolved.
double integrate_window(const std::function<double(double)>& f,
                        const Window& window, double rel_tol = 1e-12);

}  // namespace smk
