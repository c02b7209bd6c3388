#include "smk/sojourn.hpp"

#include <cmath>

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/weibull.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "smk/error.hpp"

namespace smk {
namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    config_error("bad_sojourn_parameter",
                 std::string("sojourn parameter '") + what +
                     "' must be finite and strictly positive");
  }
}

}  // namespace

SojournDensity SojournDensity::exponential(double rate) {
  require_positive(rate, "rate");
  SojournDensity d;
  d.family_ = SojournFamily::kExponential;
  d.p1_ = rate;
  return d;
}

SojournDensity SojournDensity::weibull(double shape, double scale) {
  require_positive(shape, "shape");
  require_positive(scale, "scale");
  SojournDensity d;
  d.family_ = SojournFamily::kWeibull;
  d.p1_ = shape;
  d.p2_ = scale;
  return d;
}

SojournDensity SojournDensity::gamma(double shape, double rate) {
  require_positive(shape, "shape");
  require_positive(rate, "rate");
  SojournDensity d;
  d.family_ = SojournFamily::kGamma;
  d.p1_ = shape;
  d.p2_ = rate;
  return d;
}

SojournDensity SojournDensity::root_mix(double wa, double ma,
                                        const SojournDensity& fa, double wb,
                                        double mb, const SojournDensity& fb) {
  if (wa < 0.0 || wb < 0.0 || ma < 0.0 || mb < 0.0) {
    config_error("bad_sojourn_parameter", "root mixture weights must be >= 0");
  }
  SojournDensity d;
  d.family_ = SojournFamily::kRootMix;
  d.wa_ = wa;
  d.ma_ = ma;
  d.wb_ = wb;
  d.mb_ = mb;
  d.fa_ = std::make_shared<const SojournDensity>(fa);
  d.fb_ = std::make_shared<const SojournDensity>(fb);
  double cross = 0.0;
  if (wa > 0.0 && wb > 0.0 && ma > 0.0 && mb > 0.0) {
    cross = sqrt_product_integral(fa, fb);
  }
  d.norm_ = wa * wa * ma + wb * wb * mb + 2.0 * wa * wb * std::sqrt(ma * mb) * cross;
  if (!(d.norm_ > 0.0)) {
    numeric_error("degenerate_root_mix", "root mixture has zero mass");
  }
  return d;
}

std::string SojournDensity::family_name() const {
  switch (family_) {
    case SojournFamily::kExponential: return "exponential";
    case SojournFamily::kWeibull: return "weibull";
    case SojournFamily::kGamma: return "gamma";
    case SojournFamily::kRootMix: return "root_mix";
  }
  return "unknown";
}

std::vector<double> SojournDensity::parameters() const {
  switch (family_) {
    case SojournFamily::kExponential: return {p1_};
    case SojournFamily::kWeibull:
    case SojournFamily::kGamma: return {p1_, p2_};
    case SojournFamily::kRootMix: return {wa_, ma_, wb_, mb_, norm_};
  }
  return {};
}

double SojournDensity::root_mix_unnormalised(double t) const {
  const double a = wa_ * std::sqrt(ma_ * fa_->pdf(t));
  const double b = wb_ * std::sqrt(mb_ * fb_->pdf(t));
  return (a + b) * (a + b);
}

double SojournDensity::pdf(double t) const {
  if (!(t > 0.0)) return 0.0;
  switch (family_) {
    case SojournFamily::kExponential:
      return p1_ * std::exp(-p1_ * t);
    case SojournFamily::kWeibull: {
      const double z = t / p2_;
      return (p1_ / p2_) * std::pow(z, p1_ - 1.0) * std::exp(-std::pow(z, p1_));
    }
    case SojournFamily::kGamma:
      return boost::math::pdf(boost::math::gamma_distribution<double>(p1_, 1.0 / p2_), t);
    case SojournFamily::kRootMix:
      return root_mix_unnormalised(t) / norm_;
  }
  return 0.0;
}

double SojournDensity::cdf(double t) const {
  if (!(t > 0.0)) return 0.0;
  switch (family_) {
    case SojournFamily::kExponential:
      return -std::expm1(-p1_ * t);
    case SojournFamily::kWeibull:
      return -std::expm1(-std::pow(t / p2_, p1_));
    case SojournFamily::kGamma:
      return boost::math::gamma_p(p1_, p2_ * t);
    case SojournFamily::kRootMix:
      break;
  }
  numeric_error("unsupported", "cdf is not available for root mixtures");
}

double SojournDensity::mean() const {
  switch (family_) {
    case SojournFamily::kExponential: return 1.0 / p1_;
    case SojournFamily::kWeibull: return p2_ * std::tgamma(1.0 + 1.0 / p1_);
    case SojournFamily::kGamma: return p1_ / p2_;
    case SojournFamily::kRootMix: {
      const Window w = window(1e-16);
      return integrate_window([this](double t) { return t * pdf(t); }, w);
    }
  }
  return 0.0;
}

Window SojournDensity::window(double tail) const {
  switch (family_) {
    case SojournFamily::kExponential:
      return {-std::log1p(-tail) / p1_, -std::log(tail) / p1_};
    case SojournFamily::kWeibull:
      return {p2_ * std::pow(-std::log1p(-tail), 1.0 / p1_),
              p2_ * std::pow(-std::log(tail), 1.0 / p1_)};
    case SojournFamily::kGamma: {
      const double lo = boost::math::gamma_p_inv(p1_, tail) / p2_;
      const double hi = boost::math::gamma_q_inv(p1_, tail) / p2_;
      return {lo > 0.0 ? lo : 1e-300, hi};
    }
    case SojournFamily::kRootMix:
      return merge(fa_->window(tail), fb_->window(tail));
  }
  return {};
}

double SojournDensity::sample(Rng& rng) const {
  switch (family_) {
    case SojournFamily::kExponential:
      return -std::log(rng.open_uniform()) / p1_;
    case SojournFamily::kWeibull:
      return p2_ * std::pow(-std::log(rng.open_uniform()), 1.0 / p1_);
    case SojournFamily::kGamma:
      return boost::math::gamma_p_inv(p1_, rng.open_uniform()) / p2_;
    case SojournFamily::kRootMix: {
      // Dominating measure 2 wa^2 ma fa + 2 wb^2 mb fb.
      const double ca = wa_ * wa_ * ma_;
      const double cb = wb_ * wb_ * mb_;
      for (;;) {
        const bool from_a = rng.uniform() * (ca + cb) < ca;
        const double t = from_a ? fa_->sample(rng) : fb_->sample(rng);
        const double envelope = 2.0 * (ca * fa_->pdf(t) + cb * fb_->pdf(t));
        if (rng.uniform() * envelope <= root_mix_unnormalised(t)) return t;
      }
    }
  }
  return 0.0;
}

double sqrt_product_integral(const SojournDensity& f, const SojournDensity& g) {
  const Window w = merge(f.window(), g.window());
  return integrate_window(
      [&](double t) { return std::sqrt(f.pdf(t) * g.pdf(t)); }, w);
}

}  // namespace smk
