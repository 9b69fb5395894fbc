#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "maxstable/field.hpp"
#include "maxstable/lattice.hpp"
#include "maxstable/models.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

enum class BoundFamily { kCor2Countable, kThm2Compact, kThm2Family };
std::string bound_family_name(BoundFamily f);

struct BoundComponent {
  std::string label;  // e.g. "theta(0,0;1,0)", "C(S1)"
  double value = 0.0;
  double error = 0.0;
};

struct MixingBoundReport {
  std::string s1;
  std::string s2;
  BoundFamily family = BoundFamily::kCor2Countable;
  double beta = 0.0;
  double alpha = 0.0;  // beta / 2
  double mc_error = 0.0;
  bool mc_warning = false;  // Monte Carlo error above 10% of the bound
  std::vector<BoundComponent> components;
};

std::string set_descriptor(std::span<const Site> sites);

// 4 sum_{s1, s2} (2 - theta(s1, s2)). Throws ContractError when the sets
// overlap or are empty.
MixingBoundReport beta_bound_countable(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2);

struct CompactBoundOptions {
  std::size_t n_draws = 20000;  // simulations per C(S)
  std::size_t theta_draws = 200000;
  TruncationPolicy truncation{};
  int workers = 1;
};

// 2 [C(S1) + C(S2)] [theta(S1) + theta(S2) - theta(S1 u S2)].
MixingBoundReport beta_bound_compact(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2,
                                     Rng& rng, const CompactBoundOptions& opt = {});
// Family version: sum over blocks S1_i x S2_j of the compact bound.
MixingBoundReport beta_bound_family(const ModelSpec& spec, std::span<const std::vector<Site>> s1_blocks,
                                    std::span<const std::vector<Site>> s2_blocks, Rng& rng,
                                    const CompactBoundOptions& opt = {});

// 2 (2 - theta(h)), an upper bound for the gamma(h) of the CLT conditions.
double gamma_bound(const ModelSpec& spec, const Site& h);
// max_{|h| = r} gamma_bound(spec, h).
double ring_sup_gamma(const ModelSpec& spec, int r);

struct CltConditionReport {
  std::string model;
  double delta = 0.0;
  int dim = 1;
  double threshold = 0.0;  // d max(2, (2 + delta) / delta)
  std::vector<int> radii;
  std::vector<double> gamma_sup;  // ring sup of gamma at each radius
  // Trivial case: gamma vanishes from this radius on (compact kernels).
  bool vanishes = false;
  int zero_radius = 0;
  bool super_polynomial = false;
  double b = 0.0;  // fitted decay exponent, +inf when super-polynomial
  double b_std_error = 0.0;
  std::vector<double> local_slopes;
  // sum_{r >= m} |ring r| sup gamma over the fit range, divided by m^(d-1)
  std::vector<double> tail_ratio;
  // partial sums of sum_m m^(d-1) sup_{|h|>=m} gamma^(delta/(2+delta))
  std::vector<double> series_partial;
  bool pass = false;
  std::string reason;

  std::string verdict_block() const;
};

// Decay of the ring sup gamma over `fit_range` (radii, ascending, >= 1).
// b is fitted by least squares of log gamma on log r over the largest
// decade of the range; steadily steepening local slopes are reported as
// super-polynomial decay. Deterministic.
CltConditionReport clt_condition_check(const ModelSpec& spec, double delta, int d, std::span<const int> fit_range);
// Same check on an arbitrary ring-sup profile r -> gamma.
CltConditionReport clt_condition_check(const std::function<double(int)>& ring_gamma, const std::string& label,
                                       double delta, int d, std::span<const int> fit_range);

// Geometric ladder 1, 2, 4, ... up to max_radius.
std::vector<int> geometric_ladder(int max_radius, double ratio = 2.0);

inline constexpr int kUnboundedSet = -1;

// Upper bound on alpha_{k,l}(m): 2 k l sup_{|t|>=m} (2 - theta(t)) for finite
// k, l; with l = kUnboundedSet, 2 sum_{|t|>=m} (2 - theta(t)) including a
// bound on the truncated tail. Throws NumericalError for a non-summable tail.
double bolthausen_alpha_bound(const ModelSpec& spec, int k, int l, int m);

}  // namespace maxstable
