#pragma once

#include <memory>
#include <string>
#include <vector>

#include "smk/quadrature.hpp"
#include "smk/random.hpp"

namespace smk {

enum class SojournFamily { kExponential, kWeibull, kGamma, kRootMix };

// Sojourn-time density on t > 0.
//
// The three parametric families are the ones a kernel file may name. The
// root mixture is produced internally by the least-favourable construction:
// its density is proportional to
//
//   (wa * sqrt(ma * fa(t)) + wb * sqrt(mb * fb(t)))^2
//
// and is evaluated pointwise from its two parents.
class SojournDensity {
 public:
  static SojournDensity exponential(double rate);
  static SojournDensity weibull(double shape, double scale);
  static SojournDensity gamma(double shape, double rate);
  static SojournDensity root_mix(double wa, double ma, const SojournDensity& fa,
                                 double wb, double mb,
                                 const SojournDensity& fb);

  SojournFamily family() const { return family_; }
  std::string family_name() const;
  // exponential: {rate}; weibull: {shape, scale}; gamma: {shape, rate};
  // root_mix: {wa, ma, wb, mb, normaliser}.
  std::vector<double> parameters() const;

  double pdf(double t) const;
  // Parametric families only.
  double cdf(double t) const;
  double mean() const;
  // [lo, hi] with P(T < lo) <= tail and P(T > hi) <= tail.
  Window window(double tail = 1e-14) const;

  // Exponential and Weibull: inverse CDF from one uniform. Gamma: inverse CDF
  // through the regularised incomplete gamma inverse, also one uniform.
  // Root mixtures: rejection from the dominating two-component mixture.
  double sample(Rng& rng) const;

  // Normalising constant of a root mixture; 1 for parametric families.
  double normaliser() const { return norm_; }

  // Unnormalised root-mixture value (wa sqrt(ma fa) + wb sqrt(mb fb))^2.
  double root_mix_unnormalised(double t) const;

 private:
  SojournDensity() = default;

  SojournFamily family_ = SojournFamily::kExponential;
  double p1_ = 1.0;
  double p2_ = 1.0;
  // Root mixture parts.
  double wa_ = 0.0, ma_ = 0.0, wb_ = 0.0, mb_ = 0.0, norm_ = 1.0;
  std::shared_ptr<const SojournDensity> fa_;
  std::shared_ptr<const SojournDensity> fb_;
};

// Integral of sqrt(f(t) g(t)) over t > 0 by windowed quadrature.
double sqrt_product_integral(const SojournDensity& f, const SojournDensity& g);

}  // namespace smk
