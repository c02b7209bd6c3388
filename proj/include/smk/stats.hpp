#pragma once

#include <cstddef>
#include <span>

namespace smk {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double center() const { return 0.5 * (lower + upper); }
  double half_width() const { return 0.5 * (upper - lower); }
};

// Two-sided standard normal quantile for the given confidence level,
// e.g. 0.99 -> 2.5758.
double normal_quantile_two_sided(double confidence);

// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials,
                         double confidence);

// Upper tail probability of a chi-square variate with `dof` degrees of freedom.
double chi_square_survival(double statistic, double dof);

// Pearson chi-square goodness-of-fit p-value of observed counts against
// expected probabilities. Cells with expected count below `min_expected` are
// pooled into their right neighbour before testing.
double chi_square_gof_pvalue(std::span<const double> observed,
                             std::span<const double> probabilities,
                             double min_expected = 5.0);

// Welford accumulator for mean, variance and fourth central moment.
class Moments {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance.
  double variance() const;
  // Standard error of the mean.
  double mean_se() const;
  // Large-sample standard error of the sample variance,
  // sqrt((m4 - s^4) / n).
  double variance_se() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

}  // namespace smk
