#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "maxstable/gaussian.hpp"
#include "maxstable/lattice.hpp"
#include "maxstable/models.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

// Lazily extensible decreasing enumeration of a Poisson process on (0, inf)
// with intensity scale * z^-2 dz: Z_i = scale / (E_1 + ... + E_i).
class FrechetPointStream {
 public:
  FrechetPointStream(Rng& rng, double scale = 1.0) : rng_(&rng), scale_(scale) {}
  double next();
  std::size_t count() const { return count_; }
  double gamma() const { return gamma_; }

 private:
  Rng* rng_;
  double scale_;
  double gamma_ = 0.0;
  std::size_t count_ = 0;
};

// First `count_limit` points of the unit-scale stream.
std::vector<double> frechet_points(Rng& rng, std::size_t count_limit);

struct TruncationPolicy {
  std::size_t max_atoms = 100000;
  // Brown-Resnick stops at atom i once Z_i * q < epsilon * min_t eta(t).
  double epsilon = 0.1;
  double quantile = 0.9999;
  std::size_t pilot_draws = 2000;
  std::uint64_t pilot_seed = 0x5eed'0f'b1a5ULL;

  bool operator==(const TruncationPolicy&) const = default;
};

struct FieldSample {
  std::shared_ptr<const LatticeWindow> window;
  std::vector<double> values;  // aligned with window->sites()
  std::uint64_t seed = 0;
  std::string model;
  std::size_t atoms_used = 0;
  bool truncation_bias_flag = false;
  // Brown-Resnick: Z_stop * q / min eta (certified when <= epsilon).
  // Moving maximum: Z_stop * f_max / min eta (< 1 means exact stop).
  double bias_diagnostic = 0.0;

  double at(const Site& s) const;
  double at(std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// One Poisson atom z * f. Moving-maximum atoms carry a location u in R^d;
// Brown-Resnick atoms carry their spectral function on the window.
struct Atom {
  double z = 0.0;
  std::array<double, kMaxDim> location{};
  std::vector<double> spectral;
};

struct StoppingDiagnostics {
  std::size_t generated = 0;
  bool certified = false;
  double stop_z = 0.0;  // first Z that was not used
};

struct PointProcessSample {
  std::string model;
  std::vector<Atom> atoms;  // z strictly decreasing
  StoppingDiagnostics stopping;
};

class BrownResnickSimulator {
 public:
  BrownResnickSimulator(const ModelSpec& spec, std::shared_ptr<const LatticeWindow> window, TruncationPolicy policy = {});

  FieldSample sample(Rng& rng, PointProcessSample* atoms = nullptr) const;

  double spectral_quantile() const { return quantile_; }
  const LatticeWindow& window() const { return *window_; }
  const GaussianIncrementSampler& sampler() const { return sampler_; }

 private:
  ModelSpec spec_;
  std::shared_ptr<const LatticeWindow> window_;
  TruncationPolicy policy_;
  GaussianIncrementSampler sampler_;
  double quantile_ = 1.0;
};

class MovingMaximumSimulator {
 public:
  MovingMaximumSimulator(const ModelSpec& spec, std::shared_ptr<const LatticeWindow> window, TruncationPolicy policy = {});

  FieldSample sample(Rng& rng, PointProcessSample* atoms = nullptr) const;

  // Location domain: bounding box of the window inflated by the kernel radius.
  const std::array<double, kMaxDim>& box_lower() const { return lower_; }
  const std::array<double, kMaxDim>& box_upper() const { return upper_; }
  double box_volume() const { return volume_; }
  const KernelSpec& kernel() const { return spec_.kernel(); }
  const LatticeWindow& window() const { return *window_; }

 private:
  ModelSpec spec_;
  std::shared_ptr<const LatticeWindow> window_;
  TruncationPolicy policy_;
  std::array<double, kMaxDim> lower_{};
  std::array<double, kMaxDim> upper_{};
  double volume_ = 0.0;
};

// Contribution z * f(t - u) of a moving-maximum atom; shared by the simulator
// and every atom-level check so comparisons are bit-exact.
double moving_maximum_contribution(const KernelSpec& kernel, const Atom& atom, const Site& t);

// Either simulator behind one interface.
class FieldSimulator {
 public:
  FieldSimulator(const ModelSpec& spec, std::shared_ptr<const LatticeWindow> window, TruncationPolicy policy = {});
  FieldSimulator(const ModelSpec& spec, const LatticeWindow& window, TruncationPolicy policy = {})
      : FieldSimulator(spec, std::make_shared<const LatticeWindow>(window), policy) {}

  FieldSample sample(Rng& rng, PointProcessSample* atoms = nullptr) const;
  const ModelSpec& spec() const { return spec_; }
  const LatticeWindow& window() const { return *window_; }
  std::shared_ptr<const LatticeWindow> window_ptr() const { return window_; }

 private:
  ModelSpec spec_;
  std::shared_ptr<const LatticeWindow> window_;
  std::variant<BrownResnickSimulator, MovingMaximumSimulator> impl_;
};

FieldSample simulate_brown_resnick(const ModelSpec& spec, const LatticeWindow& window, Rng& rng,
                                   const TruncationPolicy& trunc = {});

struct MovingMaximumDraw {
  FieldSample field;
  PointProcessSample atoms;
};
MovingMaximumDraw simulate_moving_maximum(const ModelSpec& spec, const LatticeWindow& window, Rng& rng,
                                          const TruncationPolicy& trunc = {});

struct MaxStabilityReport {
  int n = 0;
  std::size_t replicates = 0;
  double ks_rescaled = 0.0;      // n^-1 max of n copies vs exp(-1/y), at site 0
  double ks_direct = 0.0;        // direct sample vs exp(-1/y), at site 0
  double ks_two_sample = 0.0;    // rescaled vs direct
  double theta_rescaled = 0.0;   // pair (site 0, site 1)
  double theta_rescaled_se = 0.0;
  double theta_direct = 0.0;
  double theta_direct_se = 0.0;
  double theta_discrepancy_in_se() const;
};

// Compares n^-1 * (pointwise max of n independent fields) with a direct
// field: marginals at the first window site and the pair coefficient of the
// first two sites.
MaxStabilityReport max_stability_check(const ModelSpec& spec, const LatticeWindow& window, int n,
                                       std::size_t replicates, Rng& rng, const TruncationPolicy& trunc = {},
                                       int workers = 1);

}  // namespace maxstable
