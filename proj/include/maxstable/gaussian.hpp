#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "maxstable/lattice.hpp"
#include "maxstable/models.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

// Draws (W(t))_{t in sites} for a centered Gaussian field with stationary
// increments, variogram V and W(pin) = 0:
//   Cov(W(s), W(t)) = (V(s - pin) + V(t - pin) - V(s - t)) / 2.
// The covariance of the unpinned sites is factorized once (Cholesky with a
// 1e-10 * trace / n diagonal jitter).
class GaussianIncrementSampler {
 public:
  GaussianIncrementSampler(const VariogramSpec& variogram, std::span<const Site> sites, const Site& pin);
  GaussianIncrementSampler(const VariogramSpec& variogram, std::span<const Site> sites)
      : GaussianIncrementSampler(variogram, sites, Site::zero(sites.empty() ? 1 : sites.front().dim)) {}

  // Per-thread scratch space; the sampler itself is immutable.
  struct Workspace {
    Eigen::VectorXd z;
    Eigen::VectorXd w;
  };

  std::size_t size() const { return variance_.size(); }
  // sigma^2(t) = V(t - pin), aligned with the site list.
  const std::vector<double>& variance() const { return variance_; }
  // Writes one draw of W into `out` (size() entries).
  void sample(Rng& rng, std::span<double> out, Workspace& ws) const;
  void sample(Rng& rng, std::span<double> out) const;
  // exp(W(t) - sigma^2(t)/2): a unit-mean log-normal spectral function.
  void sample_spectral(Rng& rng, std::span<double> out, Workspace& ws) const;

  double jitter() const { return jitter_; }

 private:
  std::vector<double> variance_;
  std::vector<std::size_t> free_index_;  // positions of unpinned sites
  Eigen::MatrixXd factor_;               // lower-triangular
  double jitter_ = 0.0;
};

// One draw of W on `sites` pinned at the lattice origin.
std::vector<double> gaussian_increments_sample(const VariogramSpec& variogram, std::span<const Site> sites, Rng& rng);

}  // namespace maxstable
