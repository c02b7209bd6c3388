#include "smk/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "smk/error.hpp"

namespace smk {
namespace {

// Inverse of h2 = 1 - cos(a) = 2 sin^2(a/2), accurate for small angles.
double angle_from_h2(double h2) {
  const double clamped = std::clamp(h2, 0.0, 1.0);
  return 2.0 * std::asin(std::sqrt(0.5 * clamped));
}

double continuous_affinity(const ContinuousSmk& a, const ContinuousSmk& b, std::size_t x) {
  double aff = 0.0;
  for (std::size_t y = 0; y < a.size(); ++y) {
    const double pa = a.p()(x, y);
    const double pb = b.p()(x, y);
    if (pa <= 0.0 || pb <= 0.0) continue;
    aff += std::sqrt(pa * pb) * sqrt_product_integral(a.sojourn(x, y), b.sojourn(x, y));
  }
  return aff;
}

}  // namespace

double hellinger_sq(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) config_error("kernel_mismatch", "rows differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::sqrt(a[i]) - std::sqrt(b[i]);
    s += d * d;
  }
  return std::clamp(0.5 * s, 0.0, 1.0);
}

double hellinger_affinity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) config_error("kernel_mismatch", "rows differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::sqrt(a[i] * b[i]);
  return std::clamp(s, 0.0, 1.0);
}

double hellinger_sq_state(const Kernel& a, const Kernel& b, std::size_t x) {
  require_comparable(a, b);
  if (const auto* da = std::get_if<DiscreteSmk>(&a)) {
    return hellinger_sq(da->row(x), std::get<DiscreteSmk>(b).row(x));
  }
  const double aff =
      continuous_affinity(std::get<ContinuousSmk>(a), std::get<ContinuousSmk>(b), x);
  return std::clamp(1.0 - aff, 0.0, 1.0);
}

double hellinger_affinity_state(const Kernel& a, const Kernel& b, std::size_t x) {
  require_comparable(a, b);
  if (const auto* da = std::get_if<DiscreteSmk>(&a)) {
    return hellinger_affinity(da->row(x), std::get<DiscreteSmk>(b).row(x));
  }
  return std::clamp(
      continuous_affinity(std::get<ContinuousSmk>(a), std::get<ContinuousSmk>(b), x), 0.0, 1.0);
}

HellingerProfile hellinger_sq(const Kernel& a, const Kernel& b) {
  require_comparable(a, b);
  const std::size_t n = states_of(a).size();
  HellingerProfile out;
  out.per_state = Vector::Zero(n);
  for (std::size_t x = 0; x < n; ++x) out.per_state(x) = hellinger_sq_state(a, b, x);
  return out;
}

double semi_distance(const HellingerProfile& profile, const Vector& mu) {
  if (mu.size() != profile.per_state.size()) {
    config_error("shape_mismatch", "weight measure has the wrong length");
  }
  if ((mu.array() < 0.0).any()) config_error("negative_measure", "weights must be >= 0");
  return std::sqrt(std::max(0.0, mu.dot(profile.per_state)));
}

KernelSemiDistance semi_distance(const Kernel& a, const Kernel& b, const Vector& mu) {
  if ((mu.array() < 0.0).any()) config_error("negative_measure", "weights must be >= 0");
  return {semi_distance(hellinger_sq(a, b), mu), mu};
}

LeastFavorablePair least_favorable(const Kernel& q0, const Kernel& q1, double lambda) {
  if (!(lambda > 0.0 && lambda < 0.25)) {
    config_error("bad_lambda", "lambda must lie in (0, 1/4)");
  }
  require_comparable(q0, q1);
  const std::size_t n = states_of(q0).size();

  LeastFavorablePair out{lambda, Vector::Zero(n), Vector::Zero(n),
                         std::vector<bool>(n, false), q1, 0.0};
  std::vector<double> w1(n), w0(n);
  for (std::size_t x = 0; x < n; ++x) {
    const double h2 = hellinger_sq_state(q0, q1, x);
    const double alpha = angle_from_h2(h2);
    out.h2_01(x) = h2;
    out.alpha(x) = alpha;
    if (alpha < kAngleFloor) {
      out.degenerate[x] = true;
      w1[x] = 1.0;
      w0[x] = 0.0;
    } else {
      const double s = std::sin(alpha);
      w1[x] = std::sin((1.0 - lambda) * alpha) / s;
      w0[x] = std::sin(lambda * alpha) / s;
    }
  }

  if (const auto* d1 = std::get_if<DiscreteSmk>(&q1)) {
    const auto& d0 = std::get<DiscreteSmk>(q0);
    std::vector<double> table(d1->table().begin(), d1->table().end());
    const std::size_t cells = d1->row_cells();
    for (std::size_t x = 0; x < n; ++x) {
      if (out.degenerate[x]) continue;
      const auto r1 = d1->row(x);
      const auto r0 = d0.row(x);
      double mass = 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        const double v = w1[x] * std::sqrt(r1[c]) + w0[x] * std::sqrt(r0[c]);
        table[x * cells + c] = v * v;
        mass += v * v;
      }
      out.mass_error = std::max(out.mass_error, std::abs(mass - 1.0));
    }
    // The trig identity makes each row sum to 1 up to rounding; the
    // constructor re-checks at 1e-12.
    out.q2 = DiscreteSmk(d1->states(), d1->k_max(), std::move(table));
    return out;
  }

  const auto& c1 = std::get<ContinuousSmk>(q1);
  const auto& c0 = std::get<ContinuousSmk>(q0);
  Matrix p2 = c1.p();
  std::vector<SojournDensity> sojourns;
  sojourns.reserve(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    double mass = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double p1 = c1.p()(x, y);
      const double p0 = c0.p()(x, y);
      if (out.degenerate[x] || (p1 <= 0.0 && p0 <= 0.0)) {
        sojourns.push_back(c1.sojourn(x, y));
        continue;
      }
      // Per destination y the row restricted to y is P2(x,y) f2(t) with
      // f2 the normalised root mixture and P2(x,y) its normaliser.
      auto f2 = SojournDensity::root_mix(w1[x], p1, c1.sojourn(x, y), w0[x], p0,
                                         c0.sojourn(x, y));
      p2(x, y) = f2.normaliser();
      mass += p2(x, y);
      sojourns.push_back(std::move(f2));
    }
    if (!out.degenerate[x]) {
      out.mass_error = std::max(out.mass_error, std::abs(mass - 1.0));
      // Quadrature error, not the construction, is what remains here.
      p2.row(x) /= mass;
    }
  }
  out.q2 = ContinuousSmk(c1.states(), std::move(p2), std::move(sojourns));
  return out;
}

PhiInverseReport phi_inverse_bound_check(const LeastFavorablePair& pair, const Kernel& q0) {
  require_comparable(q0, pair.q2);
  const std::size_t n = states_of(q0).size();
  PhiInverseReport out;
  out.per_state = Vector::Zero(n);
  out.bound = 1.0 / pair.lambda;

  if (const auto* d0 = std::get_if<DiscreteSmk>(&q0)) {
    const auto& d2 = std::get<DiscreteSmk>(pair.q2);
    for (std::size_t x = 0; x < n; ++x) {
      const auto r0 = d0->row(x);
      const auto r2 = d2.row(x);
      for (std::size_t c = 0; c < r0.size(); ++c) {
        if (r0[c] <= 0.0) continue;
        ++out.cells_checked;
        const double ratio =
            r2[c] > 0.0 ? std::sqrt(r0[c] / r2[c]) : std::numeric_limits<double>::infinity();
        out.per_state(x) = std::max(out.per_state(x), ratio);
      }
    }
  } else {
    const auto& c0 = std::get<ContinuousSmk>(q0);
    const auto& c2 = std::get<ContinuousSmk>(pair.q2);
    constexpr int kGrid = 200;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        if (c0.p()(x, y) <= 0.0) continue;
        const Window w = c0.sojourn(x, y).window();
        const double ratio_step = std::pow(w.hi / w.lo, 1.0 / (kGrid - 1));
        double t = w.lo;
        for (int i = 0; i < kGrid; ++i, t *= ratio_step) {
          const double v0 = c0.q(x, y, t);
          if (!(v0 > 0.0)) continue;
          ++out.cells_checked;
          const double v2 = c2.q(x, y, t);
          const double ratio =
              v2 > 0.0 ? std::sqrt(v0 / v2) : std::numeric_limits<double>::infinity();
          out.per_state(x) = std::max(out.per_state(x), ratio);
        }
      }
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    out.max_ratio = std::max(out.max_ratio, out.per_state(x));
  }
  out.holds = out.max_ratio < out.bound;
  return out;
}

std::vector<bool> g_set(const Kernel& q, const Kernel& q0, const Kernel& q1, double lambda) {
  require_comparable(q, q1);
  require_comparable(q0, q1);
  const std::size_t n = states_of(q).size();
  std::vector<bool> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    const double lhs = std::sqrt(hellinger_sq_state(q, q1, x));
    const double rhs = lambda * std::sqrt(hellinger_sq_state(q0, q1, x));
    out[x] = lhs <= rhs;
  }
  return out;
}

}  // namespace smk
