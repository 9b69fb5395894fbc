#include "maxstable/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maxstable/errors.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

double FrechetPointStream::next() {
  gamma_ += rng_->exponential();
  ++count_;
  return scale_ / gamma_;
}

std::vector<double> frechet_points(Rng& rng, std::size_t count_limit) {
  if (count_limit < 1) throw ContractError("frechet_points: count_limit must be >= 1");
  FrechetPointStream stream(rng);
  std::vector<double> z(count_limit);
  for (auto& v : z) v = stream.next();
  return z;
}

double FieldSample::at(const Site& s) const {
  const auto idx = window->index_of(s);
  if (!idx) throw ContractError("field sample: site " + s.to_string() + " outside window");
  return values[*idx];
}

namespace {

double min_value(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

// --- Brown-Resnick ---------------------------------------------------------

BrownResnickSimulator::BrownResnickSimulator(const ModelSpec& spec, std::shared_ptr<const LatticeWindow> window,
                                             TruncationPolicy policy)
    : spec_(spec),
      window_(std::move(window)),
      policy_(policy),
      sampler_(spec.variogram(), window_->sites(), Site::zero(spec.dim())) {
  if (window_->empty()) throw ContractError("simulate_brown_resnick: empty window");
  if (policy_.max_atoms < 1 || !(policy_.epsilon > 0.0)) {
    throw ConfigError("truncation policy needs max_atoms >= 1 and epsilon > 0");
  }
  // Pilot estimate of the q-quantile of max_t exp(W(t) - sigma^2(t)/2).
  Rng pilot(derive_seed(policy_.pilot_seed, streams::kPilot, 0));
  const std::size_t draws = std::max<std::size_t>(policy_.pilot_draws, 1);
  std::vector<double> maxima(draws);
  std::vector<double> y(window_->size());
  GaussianIncrementSampler::Workspace ws;
  for (auto& m : maxima) {
    sampler_.sample_spectral(pilot, y, ws);
    m = *std::max_element(y.begin(), y.end());
  }
  std::sort(maxima.begin(), maxima.end());
  const auto k = static_cast<std::size_t>(std::ceil(policy_.quantile * static_cast<double>(draws)));
  quantile_ = maxima[std::clamp<std::size_t>(k, 1, draws) - 1];
}

FieldSample BrownResnickSimulator::sample(Rng& rng, PointProcessSample* atoms) const {
  const std::size_t n = window_->size();
  FieldSample out;
  out.window = window_;
  out.seed = rng.seed();
  out.model = spec_.name();
  out.values.assign(n, 0.0);
  if (atoms) {
    atoms->model = spec_.name();
    atoms->atoms.clear();
    atoms->stopping = {};
  }

  FrechetPointStream stream(rng);
  std::vector<double> y(n);
  GaussianIncrementSampler::Workspace ws;
  double min_eta = 0.0;
  double z = 0.0;
  bool certified = false;
  std::size_t used = 0;
  for (;;) {
    z = stream.next();
    if (used > 0 && z * quantile_ < policy_.epsilon * min_eta) {
      certified = true;
      break;
    }
    if (used == policy_.max_atoms) break;
    sampler_.sample_spectral(rng, y, ws);
    for (std::size_t t = 0; t < n; ++t) out.values[t] = std::max(out.values[t], z * y[t]);
    ++used;
    min_eta = min_value(out.values);
    if (atoms) atoms->atoms.push_back(Atom{z, {}, y});
  }
  out.atoms_used = used;
  out.truncation_bias_flag = !certified;
  out.bias_diagnostic = z * quantile_ / min_eta;
  if (atoms) atoms->stopping = {stream.count(), certified, z};
  return out;
}

// --- Moving maximum --------------------------------------------------------

MovingMaximumSimulator::MovingMaximumSimulator(const ModelSpec& spec, std::shared_ptr<const LatticeWindow> window,
                                               TruncationPolicy policy)
    : spec_(spec), window_(std::move(window)), policy_(policy) {
  if (window_->empty()) throw ContractError("simulate_moving_maximum: empty window");
  if (window_->dim() != spec_.dim()) throw ConfigError("window and model dimensions differ");
  if (policy_.max_atoms < 1) throw ConfigError("truncation policy needs max_atoms >= 1");
  const double r = spec_.kernel().radius();
  volume_ = 1.0;
  for (int i = 0; i < spec_.dim(); ++i) {
    lower_[static_cast<std::size_t>(i)] = window_->lower()[i] - r;
    upper_[static_cast<std::size_t>(i)] = window_->upper()[i] + r;
    volume_ *= upper_[static_cast<std::size_t>(i)] - lower_[static_cast<std::size_t>(i)];
  }
  if (!(volume_ > 0.0) || !std::isfinite(volume_)) {
    throw ConfigError("moving maximum: inflated location box is empty or unbounded");
  }
}

double moving_maximum_contribution(const KernelSpec& kernel, const Atom& atom, const Site& t) {
  return atom.z * kernel.density_at(t, atom.location);
}

FieldSample MovingMaximumSimulator::sample(Rng& rng, PointProcessSample* atoms) const {
  const KernelSpec& kernel = spec_.kernel();
  const int dim = spec_.dim();
  const std::size_t n = window_->size();
  const double radius = kernel.radius();
  const double f_max = kernel.f_max();

  FieldSample out;
  out.window = window_;
  out.seed = rng.seed();
  out.model = spec_.name();
  out.values.assign(n, 0.0);
  if (atoms) {
    atoms->model = spec_.name();
    atoms->atoms.clear();
    atoms->stopping = {};
  }

  FrechetPointStream stream(rng, volume_);
  std::size_t uncovered = n;
  double min_lower = 0.0;  // lower bound on min_t eta(t)
  const std::size_t recompute_every = std::max<std::size_t>(64, n / 16);
  std::size_t since_recompute = 0;

  // Per-axis kernel values for the integer offsets an atom can reach.
  std::array<std::vector<double>, kMaxDim> axis_vals;
  std::array<int, kMaxDim> lo{}, hi{};
  const bool box = window_->is_box();

  double z = 0.0;
  bool certified = false;
  std::size_t used = 0;
  for (;;) {
    z = stream.next();
    if (z * f_max < min_lower) {
      certified = true;
      break;
    }
    if (used == policy_.max_atoms) break;
    Atom atom;
    atom.z = z;
    for (int i = 0; i < dim; ++i) {
      atom.location[static_cast<std::size_t>(i)] =
          rng.uniform(lower_[static_cast<std::size_t>(i)], upper_[static_cast<std::size_t>(i)]);
    }
    ++used;

    auto update = [&](std::size_t idx, double f) {
      if (f <= 0.0) return;
      const double c = z * f;
      double& v = out.values[idx];
      if (c > v) {
        if (v == 0.0) --uncovered;
        v = c;
      }
    };

    if (box) {
      bool empty = false;
      for (int i = 0; i < dim; ++i) {
        const auto ai = static_cast<std::size_t>(i);
        const double u = atom.location[ai];
        lo[ai] = std::max(window_->lower()[i], static_cast<int>(std::ceil(u - radius)));
        hi[ai] = std::min(window_->upper()[i], static_cast<int>(std::floor(u + radius)));
        if (lo[ai] > hi[ai]) {
          empty = true;
          break;
        }
        axis_vals[ai].resize(static_cast<std::size_t>(hi[ai] - lo[ai] + 1));
        for (int k = lo[ai]; k <= hi[ai]; ++k) {
          axis_vals[ai][static_cast<std::size_t>(k - lo[ai])] = kernel.axis_density(static_cast<double>(k) - u);
        }
      }
      if (!empty) {
        Site cur = Site::zero(dim);
        for (int i = 0; i < dim; ++i) cur[i] = lo[static_cast<std::size_t>(i)];
        for (;;) {
          // Same multiplication order as KernelSpec::density_at.
          double f = 1.0;
          for (int i = 0; i < dim; ++i) {
            f *= axis_vals[static_cast<std::size_t>(i)][static_cast<std::size_t>(cur[i] - lo[static_cast<std::size_t>(i)])];
            if (f == 0.0) break;
          }
          update(*window_->index_of(cur), f);
          int i = dim - 1;
          while (i >= 0 && cur[i] == hi[static_cast<std::size_t>(i)]) {
            cur[i] = lo[static_cast<std::size_t>(i)];
            --i;
          }
          if (i < 0) break;
          ++cur[i];
        }
      }
    } else {
      for (std::size_t t = 0; t < n; ++t) update(t, kernel.density_at(window_->site(t), atom.location));
    }
    if (atoms) atoms->atoms.push_back(std::move(atom));

    if (uncovered == 0 && (min_lower == 0.0 || ++since_recompute >= recompute_every)) {
      min_lower = min_value(out.values);
      since_recompute = 0;
    }
  }
  out.atoms_used = used;
  out.truncation_bias_flag = !certified;
  out.bias_diagnostic = min_lower > 0.0 ? z * f_max / min_lower : std::numeric_limits<double>::infinity();
  if (atoms) atoms->stopping = {stream.count(), certified, z};
  return out;
}

// --- dispatch --------------------------------------------------------------

namespace {

std::variant<BrownResnickSimulator, MovingMaximumSimulator> make_impl(const ModelSpec& spec,
                                                                      std::shared_ptr<const LatticeWindow> w,
                                                                      const TruncationPolicy& p) {
  if (w->dim() != spec.dim()) throw ConfigError("window and model dimensions differ");
  if (spec.is_brown_resnick()) return BrownResnickSimulator(spec, std::move(w), p);
  return MovingMaximumSimulator(spec, std::move(w), p);
}

}  // namespace

FieldSimulator::FieldSimulator(const ModelSpec& spec, std::shared_ptr<const LatticeWindow> window,
                               TruncationPolicy policy)
    : spec_(spec), window_(window), impl_(make_impl(spec, window, policy)) {}

FieldSample FieldSimulator::sample(Rng& rng, PointProcessSample* atoms) const {
  return std::visit([&](const auto& sim) { return sim.sample(rng, atoms); }, impl_);
}

FieldSample simulate_brown_resnick(const ModelSpec& spec, const LatticeWindow& window, Rng& rng,
                                   const TruncationPolicy& trunc) {
  if (!spec.is_brown_resnick()) throw ContractError("simulate_brown_resnick: model is not Brown-Resnick");
  BrownResnickSimulator sim(spec, std::make_shared<const LatticeWindow>(window), trunc);
  return sim.sample(rng);
}

MovingMaximumDraw simulate_moving_maximum(const ModelSpec& spec, const LatticeWindow& window, Rng& rng,
                                          const TruncationPolicy& trunc) {
  if (!spec.is_moving_maximum()) throw ContractError("simulate_moving_maximum: model is not a moving maximum");
  MovingMaximumSimulator sim(spec, std::make_shared<const LatticeWindow>(window), trunc);
  MovingMaximumDraw d;
  d.field = sim.sample(rng, &d.atoms);
  return d;
}

// --- max-stability ---------------------------------------------------------

double MaxStabilityReport::theta_discrepancy_in_se() const {
  const double se = std::hypot(theta_rescaled_se, theta_direct_se);
  return se > 0.0 ? std::abs(theta_rescaled - theta_direct) / se : 0.0;
}

MaxStabilityReport max_stability_check(const ModelSpec& spec, const LatticeWindow& window, int n,
                                       std::size_t replicates, Rng& rng, const TruncationPolicy& trunc,
                                       int workers) {
  if (n < 1) throw ContractError("max_stability_check: n must be >= 1");
  if (window.size() < 2) throw ContractError("max_stability_check: window needs at least two sites");
  FieldSimulator sim(spec, window, trunc);
  const std::uint64_t root = rng.engine()();

  struct Row {
    double rescaled0, rescaled1, direct0, direct1;
  };
  auto rows = parallel_replicates(replicates, workers, [&](std::size_t r) {
    Rng local = Rng::for_stream(root, streams::kReplicate, r);
    std::vector<double> m(window.size(), 0.0);
    for (int k = 0; k < n; ++k) {
      const auto f = sim.sample(local);
      for (std::size_t t = 0; t < m.size(); ++t) m[t] = std::max(m[t], f.values[t]);
    }
    Rng direct_rng = Rng::for_stream(root, streams::kDirect, r);
    const auto d = sim.sample(direct_rng);
    return Row{m[0] / n, m[1] / n, d.values[0], d.values[1]};
  });

  std::vector<double> rescaled, direct, inv_rescaled, inv_direct;
  for (const auto& row : rows) {
    rescaled.push_back(row.rescaled0);
    direct.push_back(row.direct0);
    inv_rescaled.push_back(std::min(1.0 / row.rescaled0, 1.0 / row.rescaled1));
    inv_direct.push_back(std::min(1.0 / row.direct0, 1.0 / row.direct1));
  }
  MaxStabilityReport rep;
  rep.n = n;
  rep.replicates = replicates;
  rep.ks_rescaled = ks_statistic(rescaled, frechet_cdf);
  rep.ks_direct = ks_statistic(direct, frechet_cdf);
  rep.ks_two_sample = two_sample_ks(rescaled, direct);
  const auto tr = theta_from_inverse_maxima(inv_rescaled);
  const auto td = theta_from_inverse_maxima(inv_direct);
  rep.theta_rescaled = tr.value;
  rep.theta_rescaled_se = tr.std_error;
  rep.theta_direct = td.value;
  rep.theta_direct_se = td.std_error;
  return rep;
}

}  // namespace maxstable
