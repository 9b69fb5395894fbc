#pragma once

#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxstable/field.hpp"
#include "maxstable/lattice.hpp"
#include "maxstable/models.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

struct ThetaValue {
  enum class Method { kClosedForm, kQuadrature, kMonteCarlo };
  double value = 0.0;
  Method method = Method::kClosedForm;
  double error = 0.0;  // quadrature error estimate or Monte Carlo standard error

  std::string method_name() const;
};

// Closed form 2 Psi(sqrt(V(h)) / 2).
ThetaValue theta_pair_br(const VariogramSpec& variogram, const Site& h);

// theta(S) = integral of max_{s in S} f(s - x) dx over the hull of S
// inflated by the kernel radius.
ThetaValue theta_set_mm(const KernelSpec& kernel, std::span<const Site> sites, const QuadratureOptions& opt = {});

// Closed forms for the moving-maximum pair coefficient where they exist:
// gaussian 2 Phi(|h|_2 / 2b), indicator-box 2 - prod (1 - |h_i|/2R)_+.
// Truncated-gaussian falls back to quadrature.
ThetaValue theta_pair_mm(const KernelSpec& kernel, const Site& h, const QuadratureOptions& opt = {});

enum class SpectralEstimator {
  // mean of max_s exp(W(s) - sigma^2(s)/2) with W pinned at the origin
  kPinnedOrigin,
  // sum over s0 in S of E[max_s Y_s0(s) / sum_s Y_s0(s)], Y_s0 pinned at s0;
  // bounded summands, so the error does not grow with V across S
  kNormalized,
};

ThetaValue theta_set_br_mc(const VariogramSpec& variogram, std::span<const Site> sites, std::size_t n_draws, Rng& rng,
                           SpectralEstimator estimator = SpectralEstimator::kPinnedOrigin);

// Pair coefficient theta(h) of any model, cached by lag. Thread-safe.
class PairTheta {
 public:
  explicit PairTheta(ModelSpec spec, QuadratureOptions opt = {});
  PairTheta(const PairTheta& other);

  ThetaValue operator()(const Site& h) const;
  double value(const Site& h) const { return (*this)(h).value; }
  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
  QuadratureOptions opt_;
  mutable std::mutex mu_;
  mutable std::map<Site, ThetaValue> cache_;
};

struct SetThetaOptions {
  QuadratureOptions quadrature{};
  std::size_t mc_draws = 200000;
  SpectralEstimator estimator = SpectralEstimator::kNormalized;
};

// theta(S) of any model: exactly 1 for singletons, the pair formula for two
// sites, quadrature for moving maxima, Monte Carlo for Brown-Resnick.
ThetaValue theta_set(const ModelSpec& spec, std::span<const Site> sites, Rng& rng, const SetThetaOptions& opt = {});

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// C(S) = E[max_{s in S} 1/eta(s)] by simulation on the site set S.
// Singletons return exactly 1 without simulation.
McEstimate capital_C(const ModelSpec& spec, std::span<const Site> sites, std::size_t n_draws, Rng& rng,
                     const TruncationPolicy& trunc = {}, int workers = 1);

// tau_a(h) = (2 - theta(h)) / a for a simple max-stable field.
double tau_a(const ModelSpec& spec, const Site& h, double a);
double tau_a_from_theta(double theta, double a);
// Empirical counterpart from replicated pairs (eta(0), eta(h)):
// log P[eta(0) <= a, eta(h) <= a] - 2 log P[eta(0) <= a], marginals pooled.
double tau_a_empirical(std::span<const std::pair<double, double>> pairs, double a);

}  // namespace maxstable
