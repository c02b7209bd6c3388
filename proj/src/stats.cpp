#include "smk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "smk/error.hpp"

namespace smk {

double normal_quantile_two_sided(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    config_error("bad_confidence", "confidence level must lie in (0,1)");
  }
  boost::math::normal_distribution<double> std_normal;
  return boost::math::quantile(std_normal, 0.5 + 0.5 * confidence);
}

Interval wilson_interval(std::size_t successes, std::size_t trials,
                         double confidence) {
  if (trials == 0) return {0.0, 1.0};
  const double z = normal_quantile_two_sided(confidence);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double chi_square_survival(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi_square_gof_pvalue(std::span<const double> observed,
                             std::span<const double> probabilities,
                             double min_expected) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    config_error("shape_mismatch", "observed/probability length mismatch");
  }
  double total = 0.0;
  for (double o : observed) total += o;

  std::vector<double> obs;
  std::vector<double> exp;
  double acc_o = 0.0;
  double acc_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_o += observed[i];
    acc_e += probabilities[i] * total;
    if (acc_e >= min_expected) {
      obs.push_back(acc_o);
      exp.push_back(acc_e);
      acc_o = 0.0;
      acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (exp.empty()) {
      obs.push_back(acc_o);
      exp.push_back(acc_e);
    } else {
      obs.back() += acc_o;
      exp.back() += acc_e;
    }
  }
  if (exp.size() < 2) return 1.0;

  double stat = 0.0;
  for (std::size_t i = 0; i < exp.size(); ++i) {
    const double d = obs[i] - exp[i];
    stat += d * d / exp[i];
  }
  return chi_square_survival(stat, static_cast<double>(exp.size() - 1));
}

void Moments::add(double x) {
  // Pébay's one-pass update of central moments up to order four.
  const double n1 = static_cast<double>(n_);
  ++n_;
  const double n = static_cast<double>(n_);
  const double delta = x - mean_;
  const double delta_n = delta / n;
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * n1;
  mean_ += delta_n;
  m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ -
         4.0 * delta_n * m3_;
  m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
  m2_ += term1;
}

double Moments::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double Moments::mean_se() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double Moments::variance_se() const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  const double s2 = m2_ / n;
  const double mu4 = m4_ / n;
  return std::sqrt(std::max(0.0, mu4 - s2 * s2) / n);
}

}  // namespace smk
