#include "smk/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "smk/error.hpp"

namespace smk {

Window merge(const Window& a, const Window& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

double integrate_window(const std::function<double(double)>& f,
                        const Window& window, double rel_tol) {
  if (!(window.lo > 0.0) || !(window.hi > window.lo)) {
    numeric_error("bad_window", "integration window must satisfy 0 < lo < hi");
  }
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr unsigned kMaxDepth = 12;
  double total = 0.0;
  double a = window.lo;
  while (a < window.hi) {
    const double b = std::min(window.hi, a * 4.0);
    total += Rule::integrate(f, a, b, kMaxDepth, rel_tol);
    a = b;
  }
  return total;
}

}  // namespace smk
