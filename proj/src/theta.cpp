#include "maxstable/theta.hpp"

#include <algorithm>
#include <cmath>

#include "maxstable/errors.hpp"
#include "maxstable/gaussian.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

std::string ThetaValue::method_name() const {
  switch (method) {
    case Method::kClosedForm: return "closed-form";
    case Method::kQuadrature: return "quadrature";
    case Method::kMonteCarlo: return "monte-carlo";
  }
  return "?";
}

ThetaValue theta_pair_br(const VariogramSpec& variogram, const Site& h) {
  return {2.0 * normal_cdf(std::sqrt(variogram(h)) / 2.0), ThetaValue::Method::kClosedForm, 0.0};
}

ThetaValue theta_set_mm(const KernelSpec& kernel, std::span<const Site> sites, const QuadratureOptions& opt) {
  if (sites.empty()) throw ContractError("theta_set_mm: empty set");
  const int dim = kernel.dim();
  std::vector<double> lo(static_cast<std::size_t>(dim)), hi(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    int mn = sites[0][i], mx = sites[0][i];
    for (const auto& s : sites) {
      mn = std::min(mn, s[i]);
      mx = std::max(mx, s[i]);
    }
    lo[static_cast<std::size_t>(i)] = mn - kernel.radius();
    hi[static_cast<std::size_t>(i)] = mx + kernel.radius();
  }
  std::vector<Site> set(sites.begin(), sites.end());
  auto integrand = [&](std::span<const double> x) {
    double m = 0.0;
    for (const auto& s : set) m = std::max(m, kernel.density_at(s, x));
    return m;
  };
  const auto q = integrate_box(integrand, lo, hi, opt);
  return {q.value, ThetaValue::Method::kQuadrature, q.error};
}

ThetaValue theta_pair_mm(const KernelSpec& kernel, const Site& h, const QuadratureOptions& opt) {
  switch (kernel.family()) {
    case KernelSpec::Family::kGaussian:
      return {2.0 * normal_cdf(h.euclidean_norm() / (2.0 * kernel.bandwidth())), ThetaValue::Method::kClosedForm, 0.0};
    case KernelSpec::Family::kIndicatorBox: {
      double overlap = 1.0;
      for (int i = 0; i < kernel.dim(); ++i) {
        overlap *= std::max(0.0, 1.0 - std::abs(h[i]) / (2.0 * kernel.radius()));
      }
      return {2.0 - overlap, ThetaValue::Method::kClosedForm, 0.0};
    }
    case KernelSpec::Family::kTruncatedGaussian: {
      if (h.sup_norm() >= kernel.diameter()) return {2.0, ThetaValue::Method::kClosedForm, 0.0};
      const Site pair[2] = {Site::zero(kernel.dim()), h};
      return theta_set_mm(kernel, pair, opt);
    }
  }
  throw ContractError("theta_pair_mm: unknown kernel family");
}

ThetaValue theta_set_br_mc(const VariogramSpec& variogram, std::span<const Site> sites, std::size_t n_draws, Rng& rng,
                           SpectralEstimator estimator) {
  if (sites.empty()) throw ContractError("theta_set_br_mc: empty set");
  if (n_draws < 1000) throw ContractError("theta_set_br_mc: n_draws must be >= 1000");
  const std::size_t m = sites.size();
  std::vector<double> y(m);
  GaussianIncrementSampler::Workspace ws;

  if (estimator == SpectralEstimator::kPinnedOrigin) {
    GaussianIncrementSampler sampler(variogram, sites, Site::zero(sites[0].dim));
    std::vector<double> maxima(n_draws);
    for (auto& v : maxima) {
      sampler.sample_spectral(rng, y, ws);
      v = *std::max_element(y.begin(), y.end());
    }
    const auto s = summarize(maxima);
    return {s.mean, ThetaValue::Method::kMonteCarlo, s.std_error()};
  }

  const std::size_t per_pin = (n_draws + m - 1) / m;
  double total = 0.0, var = 0.0;
  std::vector<double> ratios(per_pin);
  for (std::size_t p = 0; p < m; ++p) {
    GaussianIncrementSampler sampler(variogram, sites, sites[p]);
    for (auto& r : ratios) {
      sampler.sample_spectral(rng, y, ws);
      double mx = 0.0, sum = 0.0;
      for (double v : y) {
        mx = std::max(mx, v);
        sum += v;
      }
      r = mx / sum;
    }
    const auto s = summarize(ratios);
    total += s.mean;
    var += s.variance / static_cast<double>(per_pin);
  }
  return {total, ThetaValue::Method::kMonteCarlo, std::sqrt(var)};
}

PairTheta::PairTheta(ModelSpec spec, QuadratureOptions opt) : spec_(std::move(spec)), opt_(opt) {}

PairTheta::PairTheta(const PairTheta& other) : spec_(other.spec_), opt_(other.opt_) {
  std::lock_guard lock(other.mu_);
  cache_ = other.cache_;
}

ThetaValue PairTheta::operator()(const Site& h) const {
  if (h.sup_norm() == 0) return {1.0, ThetaValue::Method::kClosedForm, 0.0};
  if (spec_.is_brown_resnick()) return theta_pair_br(spec_.variogram(), h);
  if (spec_.kernel().family() != KernelSpec::Family::kTruncatedGaussian) return theta_pair_mm(spec_.kernel(), h, opt_);
  // theta(h) = theta(-h): cache under the lexicographically larger lag
  const Site key = std::max(h, -h);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const auto v = theta_pair_mm(spec_.kernel(), key, opt_);
  std::lock_guard lock(mu_);
  cache_.emplace(key, v);
  return v;
}

ThetaValue theta_set(const ModelSpec& spec, std::span<const Site> sites, Rng& rng, const SetThetaOptions& opt) {
  if (sites.empty()) throw ContractError("theta_set: empty set");
  std::vector<Site> uniq(sites.begin(), sites.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() == 1) return {1.0, ThetaValue::Method::kClosedForm, 0.0};
  if (uniq.size() == 2) return PairTheta(spec, opt.quadrature)(uniq[1] - uniq[0]);
  if (spec.is_moving_maximum()) return theta_set_mm(spec.kernel(), uniq, opt.quadrature);
  return theta_set_br_mc(spec.variogram(), uniq, opt.mc_draws, rng, opt.estimator);
}

McEstimate capital_C(const ModelSpec& spec, std::span<const Site> sites, std::size_t n_draws, Rng& rng,
                     const TruncationPolicy& trunc, int workers) {
  if (sites.empty()) throw ContractError("capital_C: empty set");
  if (sites.size() == 1) return {1.0, 0.0};
  if (n_draws < 2) throw ContractError("capital_C: n_draws must be >= 2");
  FieldSimulator sim(spec, LatticeWindow::from_sites(spec.dim(), {sites.begin(), sites.end()}), trunc);
  const std::uint64_t root = rng.engine()();
  auto values = parallel_replicates(n_draws, workers, [&](std::size_t r) {
    Rng local = Rng::for_stream(root, streams::kReplicate, r);
    const auto f = sim.sample(local);
    double m = 0.0;
    for (double v : f.values) m = std::max(m, 1.0 / v);
    return m;
  });
  const auto s = summarize(values);
  return {s.mean, s.std_error()};
}

double tau_a_from_theta(double theta, double a) {
  if (!(a > 0.0)) throw ContractError("tau_a: a must be positive");
  return (2.0 - theta) / a;
}

double tau_a(const ModelSpec& spec, const Site& h, double a) { return tau_a_from_theta(PairTheta(spec).value(h), a); }

double tau_a_empirical(std::span<const std::pair<double, double>> pairs, double a) {
  if (!(a > 0.0)) throw ContractError("tau_a: a must be positive");
  if (pairs.empty()) throw ContractError("tau_a_empirical: no data");
  double joint = 0.0, marginal = 0.0;
  for (const auto& [x, y] : pairs) {
    joint += (x <= a && y <= a) ? 1.0 : 0.0;
    marginal += (x <= a ? 1.0 : 0.0) + (y <= a ? 1.0 : 0.0);
  }
  const double n = static_cast<double>(pairs.size());
  if (joint == 0.0) throw NumericalError("tau_a_empirical: no joint exceedance below a; raise a");
  return std::log(joint / n) - 2.0 * std::log(marginal / (2.0 * n));
}

}  // namespace maxstable
