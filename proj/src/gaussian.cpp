#include "maxstable/gaussian.hpp"

#include <cmath>
#include <sstream>

#include "maxstable/errors.hpp"

namespace maxstable {

GaussianIncrementSampler::GaussianIncrementSampler(const VariogramSpec& variogram, std::span<const Site> sites,
                                                   const Site& pin) {
  if (sites.empty()) throw ContractError("gaussian increments: empty site set");
  variance_.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    variance_.push_back(variogram(sites[i] - pin));
    if (sites[i] != pin) free_index_.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(free_index_.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const Site& s = sites[free_index_[static_cast<std::size_t>(a)]];
      const Site& t = sites[free_index_[static_cast<std::size_t>(b)]];
      const double c = 0.5 * (variance_[free_index_[static_cast<std::size_t>(a)]] +
                              variance_[free_index_[static_cast<std::size_t>(b)]] - variogram(s - t));
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  const double trace = n > 0 ? cov.trace() : 0.0;
  if (trace == 0.0) {
    factor_ = Eigen::MatrixXd::Zero(n, n);
  } else {
    jitter_ = 1e-10 * trace / static_cast<double>(n);
    Eigen::MatrixXd reg = cov;
    reg.diagonal().array() += jitter_;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
      std::ostringstream os;
      os.precision(6);
      os << "covariance not positive semidefinite after jitter " << jitter_ << ": smallest eigenvalue "
         << eig.eigenvalues().minCoeff();
      throw ModelError(os.str());
    }
    factor_ = llt.matrixL();
  }
}

void GaussianIncrementSampler::sample(Rng& rng, std::span<double> out, Workspace& ws) const {
  if (out.size() != variance_.size()) throw ContractError("gaussian increments: output size mismatch");
  const auto n = factor_.rows();
  ws.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) ws.z[i] = rng.normal();
  ws.w.noalias() = factor_.triangularView<Eigen::Lower>() * ws.z;
  std::fill(out.begin(), out.end(), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) out[free_index_[static_cast<std::size_t>(i)]] = ws.w[i];
}

void GaussianIncrementSampler::sample(Rng& rng, std::span<double> out) const {
  Workspace ws;
  sample(rng, out, ws);
}

void GaussianIncrementSampler::sample_spectral(Rng& rng, std::span<double> out, Workspace& ws) const {
  sample(rng, out, ws);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i] - 0.5 * variance_[i]);
}

std::vector<double> gaussian_increments_sample(const VariogramSpec& variogram, std::span<const Site> sites, Rng& rng) {
  GaussianIncrementSampler sampler(variogram, sites);
  std::vector<double> w(sites.size());
  sampler.sample(rng, w);
  return w;
}

}  // namespace maxstable
