// Small statistics helpers shared by the experiments and their tests.

#ifndef FLAGCOUNT_STATS_HPP
#define FLAGCOUNT_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace flagcount {

/// Linear-interpolation quantile (q in [0, 1]); NaN for empty input.
double quantile(std::vector<double> values, double q);
inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

/// Ordinary least squares y = slope * x + intercept.
struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  std::size_t points = 0;
};

/// Needs at least two distinct x values. r_squared is 1 for a perfect fit and
/// also when y is constant (the fit then explains everything).
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0;
  double p_value = 1;
};

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace flagcount

#endif
