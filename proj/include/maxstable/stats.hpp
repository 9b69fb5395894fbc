#pragma once

#include <functional>
#include <span>
#include <vector>

namespace maxstable {

// Standard normal CDF, computed through erfc so the upper tail keeps full
// relative accuracy.
double normal_cdf(double x);
// Inverse of normal_cdf, p in (0, 1).
double normal_quantile(double p);
// Unit Frechet CDF exp(-1/y) for y > 0, 0 otherwise.
double frechet_cdf(double y);

// sup_x |F_n(x) - cdf(x)|. Throws ContractError on empty input.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
// sup_x |F_a(x) - F_b(x)|; ties are handled by stepping over equal values.
double two_sample_ks(std::span<const double> a, std::span<const double> b);
// P[K > x] for the limiting Kolmogorov distribution.
double kolmogorov_survival(double x);
// Asymptotic p-value of a one-sample KS statistic on n points.
double ks_pvalue(double statistic, std::size_t n);
double two_sample_ks_pvalue(double statistic, std::size_t n, std::size_t m);

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error() const;
};
SummaryStats summarize(std::span<const double> values);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_std_error = 0.0;
};
// Ordinary least squares y = a + b x. Needs at least two distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Extremal coefficient of a set from replicated field values: if M is the
// maximum over the set, 1/M is exponential with mean 1/theta. Returns
// (estimate, standard error) from a sample of 1/M values.
struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
RatioEstimate theta_from_inverse_maxima(std::span<const double> inverse_maxima);

}  // namespace maxstable
