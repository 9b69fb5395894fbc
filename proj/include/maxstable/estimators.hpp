#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxstable/field.hpp"
#include "maxstable/lattice.hpp"
#include "maxstable/models.hpp"
#include "maxstable/theta.hpp"

namespace maxstable {

enum class EstimatorTag { kTheta1 = 1, kTheta2 = 2, kTheta3 = 3 };
std::string estimator_name(EstimatorTag tag);

enum class VarianceMethod { kNone, kAnalyticSeries, kPluginEmpirical };
std::string variance_method_name(VarianceMethod m);

struct EstimateReport {
  EstimatorTag estimator = EstimatorTag::kTheta1;
  Site lag;
  double estimate = 0.0;
  double variance = 0.0;  // asymptotic variance of sqrt(|Lambda|)(theta_hat - theta)
  VarianceMethod variance_method = VarianceMethod::kNone;
  std::size_t window_size = 0;
  double level = 0.95;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> threshold;  // theta1 only
  bool out_of_range = false;        // raw estimate outside [1, 2]
  bool small_sample = false;
  std::string note;

  // Sets the variance and recomputes estimate +- z * sqrt(variance / |Lambda|).
  void set_variance(double var, VarianceMethod method);
};

// For each t of `region`, the positions of t and t + h in the sample window.
struct LagPairs {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  std::size_t size() const { return first.size(); }
};
// Throws ContractError listing (up to five) sites t + h missing from the sample.
LagPairs lag_pairs(const FieldSample& sample, const LatticeWindow& region, const Site& h);

// Fraction of t in region with eta(t) <= y and eta(t + h) <= y.
double p_hat(const FieldSample& sample, const LatticeWindow& region, const Site& h, double y);

struct EstimateOptions {
  // Known asymptotic variance (e.g. from the sigma1 series); reported as
  // analytic-series.
  std::optional<double> variance;
  // Otherwise a plug-in long-run variance is computed when true.
  bool plugin_variance = true;
  int bandwidth = 0;  // 0 selects floor(|Lambda|^(1/2d))
  double level = 0.95;
};

// -y log p_hat. Throws NumericalError when p_hat == 0.
EstimateReport theta_hat1(const FieldSample& sample, const LatticeWindow& region, const Site& h, double y,
                          const EstimateOptions& opt = {});
// |Lambda| / sum_t min(1/eta(t), 1/eta(t+h)).
EstimateReport theta_hat2(const FieldSample& sample, const LatticeWindow& region, const Site& h,
                          const EstimateOptions& opt = {});
// (1 + 2 nu) / (1 - 2 nu) = (|Lambda| + Sigma) / (|Lambda| - Sigma) with Sigma
// the sum of |F(eta(t)) - F(eta(t+h))|. Throws NumericalError when the
// madogram reaches 1/2.
EstimateReport theta_hat3(const FieldSample& sample, const LatticeWindow& region, const Site& h,
                          const EstimateOptions& opt = {});

// F-madogram nu_F = mean |F(eta(t)) - F(eta(t+h))| / 2, F(y) = exp(-1/y);
// 1/6 for independent sites.
double madogram(const FieldSample& sample, const LatticeWindow& region, const Site& h);

// --- sigma_1^2 series ------------------------------------------------------

// theta({0, h, t, t + h}) as a function of t.
using Theta4Provider = std::function<ThetaValue(const Site& t)>;

struct Theta4Options {
  std::size_t mc_draws = 200000;
  std::uint64_t seed = 0x7e7a4;
  QuadratureOptions quadrature{};
};
// Quadrature for moving maxima, normalized-spectral Monte Carlo for
// Brown-Resnick (one RNG stream per lag t, so results do not depend on the
// evaluation order).
Theta4Provider make_theta4_provider(const ModelSpec& spec, const Site& h, const Theta4Options& opt = {});

struct Sigma1Options {
  double tail_fraction = 0.01;  // stop once the tail bound is below this share of the partial sum
  int max_radius = 400;
  int workers = 1;
};

struct Sigma1Result {
  double value = 0.0;       // partial sum over |t| <= radius
  double tail_bound = 0.0;  // bound on the omitted terms
  int radius = 0;
  std::size_t terms = 0;
};

// sigma_1^2(y) = y^2 sum_t (exp[(2 theta(h) - theta({0,h,t,t+h})) / y] - 1).
// Terms are computed ring by ring (|t| = r) and cached, so evaluating many
// thresholds reuses the same theta4 values. The omitted tail is bounded
// using 2 theta(h) - theta4(t) <= sum of (2 - theta(c)) over the cross lags
// c in {t, t + h, t - h, t}.
class Sigma1Series {
 public:
  Sigma1Series(ModelSpec spec, Site h, Theta4Provider provider, Sigma1Options opt = {});

  Sigma1Result evaluate(double y);
  double operator()(double y) { return evaluate(y).value; }
  // Sums exactly the rings |t| <= radius for every y (the tail bound is
  // still reported), so profiles over y share one truncation; nullopt
  // restores the adaptive radius.
  void fix_radius(std::optional<int> radius) { fixed_radius_ = radius; }
  std::optional<int> fixed_radius() const { return fixed_radius_; }
  double theta_h() const { return theta_h_; }
  // 2 theta(h) - theta4(t) for the cached terms, keyed by t.
  const std::map<Site, double>& exponents() const { return exponent_; }

 private:
  void ensure_ring(int r);
  double ring_sum(int r, double y) const;
  double ring_bound(int r, double y);
  double cross_bound(const Site& t) const;

  ModelSpec spec_;
  Site h_;
  Theta4Provider provider_;
  Sigma1Options opt_;
  PairTheta pair_;
  double theta_h_ = 0.0;
  std::vector<std::vector<Site>> rings_;
  std::map<Site, double> exponent_;
  std::map<int, std::vector<double>> bound_exponents_;  // per ring
  std::optional<int> fixed_radius_;
};

Sigma1Result sigma1_sq(const ModelSpec& spec, const Site& h, double y, const Theta4Provider& provider,
                       const Sigma1Options& opt = {});

struct OptimalThreshold {
  double y_star = 0.0;
  double sigma1_at_star = 0.0;
  std::vector<std::pair<double, double>> profile;  // (y, sigma1^2) evaluations
};
// Golden-section search on log y over a bracket found by doubling. A first
// pass uses the adaptive truncation; the series is then fixed at the largest
// radius needed on [y*/4, 4 y*] and the search repeated, so the returned
// optimum and later evaluations of `series` use one truncation.
OptimalThreshold optimal_y(Sigma1Series& series, double rel_tol = 1e-3);
OptimalThreshold optimal_y(const ModelSpec& spec, const Site& h, const Theta4Options& t4 = {},
                           const Sigma1Options& opt = {});

// --- plug-in long-run variances ---------------------------------------------

struct PluginVariance {
  double value = 0.0;  // scaled sigma^2 at bandwidth L
  double at_half = 0.0;
  double at_double = 0.0;
  int bandwidth = 0;
  double theta_hat = 0.0;
  bool floored = false;  // negative sum clipped to 0
};

// Plug-in estimate of sigma_i^2: empirical autocovariances of the summand
// field (indicator for theta1, min-inverse for theta2, halved madogram increments
// for theta3) summed over |t| <= L and scaled by the delta-method factor.
// Several samples are averaged. `region` must be a box; `y` is used by
// theta1 only.
PluginVariance sigma_plugin(std::span<const FieldSample> samples, const LatticeWindow& region, const Site& h,
                            EstimatorTag tag, int bandwidth = 0, double y = 1.0, bool sensitivity = true);
// sigma_2^2 / sigma_3^2 plug-in.
PluginVariance sigma23_plugin(std::span<const FieldSample> samples, const LatticeWindow& region, const Site& h,
                              EstimatorTag tag, int bandwidth = 0, bool sensitivity = true);

int default_bandwidth(std::size_t window_size, int dim);

// Sum over |t| <= L of empirical autocovariances of a field on a box,
// returned at L/2, L and 2L (0 where not requested).
struct LongRunSums {
  double half = 0.0, full = 0.0, twice = 0.0;
};
LongRunSums long_run_variance(std::span<const double> field, const LatticeWindow& box, int bandwidth,
                              bool sensitivity);

}  // namespace maxstable
