#include "maxstable/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "maxstable/errors.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

VariogramSpec VariogramSpec::power(double scale, double exponent) {
  if (!(scale > 0.0)) throw ConfigError("variogram scale must be positive");
  if (!(exponent > 0.0 && exponent <= 2.0)) throw ConfigError("variogram exponent must lie in (0, 2]");
  VariogramSpec v;
  v.family_ = Family::kPower;
  v.scale_ = scale;
  v.exponent_ = exponent;
  return v;
}

VariogramSpec VariogramSpec::fractional(double scale, double exponent) {
  if (!(exponent > 0.0 && exponent < 2.0)) throw ConfigError("fractional variogram exponent must lie in (0, 2)");
  VariogramSpec v = power(scale, exponent);
  v.family_ = Family::kFractional;
  return v;
}

VariogramSpec VariogramSpec::degenerate() {
  VariogramSpec v;
  v.family_ = Family::kDegenerate;
  return v;
}

double VariogramSpec::at_distance(double r) const {
  if (family_ == Family::kDegenerate || r == 0.0) return 0.0;
  return std::pow(r / scale_, exponent_);
}

std::string VariogramSpec::family_name() const {
  switch (family_) {
    case Family::kPower: return "power";
    case Family::kFractional: return "fractional";
    case Family::kDegenerate: return "degenerate";
  }
  return "?";
}

KernelSpec KernelSpec::gaussian(int dim, double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError("kernel bandwidth must be positive");
  if (dim < 1 || dim > kMaxDim) throw ConfigError("kernel dimension out of range");
  KernelSpec k;
  k.family_ = Family::kGaussian;
  k.dim_ = dim;
  k.bandwidth_ = bandwidth;
  // dim * 2 * (1 - Phi(R/b)) <= 1e-8
  k.radius_ = bandwidth * normal_quantile(1.0 - 0.5e-8 / dim);
  k.normalization_ = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
  k.f_max_ = std::pow(k.normalization_, dim);
  return k;
}

KernelSpec KernelSpec::truncated_gaussian(int dim, double bandwidth, double radius) {
  if (!(bandwidth > 0.0) || !(radius > 0.0)) throw ConfigError("kernel bandwidth and radius must be positive");
  if (dim < 1 || dim > kMaxDim) throw ConfigError("kernel dimension out of range");
  KernelSpec k;
  k.family_ = Family::kTruncatedGaussian;
  k.dim_ = dim;
  k.bandwidth_ = bandwidth;
  k.radius_ = radius;
  k.cutoff_ = std::exp(-radius * radius / (2.0 * bandwidth * bandwidth));
  const double gauss_mass = bandwidth * std::sqrt(2.0 * std::numbers::pi) * (2.0 * normal_cdf(radius / bandwidth) - 1.0);
  const double mass = gauss_mass - 2.0 * radius * k.cutoff_;
  k.normalization_ = 1.0 / mass;
  k.f_max_ = std::pow(k.normalization_ * (1.0 - k.cutoff_), dim);
  return k;
}

KernelSpec KernelSpec::indicator_box(int dim, double half_width) {
  if (!(half_width > 0.0)) throw ConfigError("box half-width must be positive");
  if (dim < 1 || dim > kMaxDim) throw ConfigError("kernel dimension out of range");
  KernelSpec k;
  k.family_ = Family::kIndicatorBox;
  k.dim_ = dim;
  k.bandwidth_ = half_width;
  k.radius_ = half_width;
  k.normalization_ = 1.0 / (2.0 * half_width);
  k.f_max_ = std::pow(k.normalization_, dim);
  return k;
}

double KernelSpec::axis_density(double x) const {
  switch (family_) {
    case Family::kGaussian:
      // evaluated on its effective support only
      if (std::abs(x) > radius_) return 0.0;
      return normalization_ * std::exp(-x * x / (2.0 * bandwidth_ * bandwidth_));
    case Family::kTruncatedGaussian: {
      if (std::abs(x) >= radius_) return 0.0;
      const double v = std::exp(-x * x / (2.0 * bandwidth_ * bandwidth_)) - cutoff_;
      return v > 0.0 ? normalization_ * v : 0.0;
    }
    case Family::kIndicatorBox:
      return std::abs(x) <= radius_ ? normalization_ : 0.0;
  }
  return 0.0;
}

double KernelSpec::density_at(const Site& t, std::span<const double> u) const {
  double f = 1.0;
  for (int i = 0; i < dim_; ++i) {
    f *= axis_density(static_cast<double>(t[i]) - u[static_cast<std::size_t>(i)]);
    if (f == 0.0) return 0.0;
  }
  return f;
}

double KernelSpec::density(std::span<const double> x) const {
  double f = 1.0;
  for (int i = 0; i < dim_; ++i) {
    f *= axis_density(x[static_cast<std::size_t>(i)]);
    if (f == 0.0) return 0.0;
  }
  return f;
}

std::string KernelSpec::family_name() const {
  switch (family_) {
    case Family::kGaussian: return "gaussian";
    case Family::kTruncatedGaussian: return "truncated-gaussian";
    case Family::kIndicatorBox: return "indicator-box";
  }
  return "?";
}

ModelSpec ModelSpec::brown_resnick(int dim, VariogramSpec v) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("model dimension out of range");
  ModelSpec m;
  m.dim_ = dim;
  m.model_ = BrownResnick{v};
  return m;
}

ModelSpec ModelSpec::moving_maximum(KernelSpec k) {
  ModelSpec m;
  m.dim_ = k.dim();
  m.model_ = MovingMaximum{k};
  return m;
}

const VariogramSpec& ModelSpec::variogram() const {
  if (!is_brown_resnick()) throw ContractError("model is not Brown-Resnick");
  return std::get<BrownResnick>(model_).variogram;
}

const KernelSpec& ModelSpec::kernel() const {
  if (!is_moving_maximum()) throw ContractError("model is not a moving maximum");
  return std::get<MovingMaximum>(model_).kernel;
}

std::string ModelSpec::name() const { return is_brown_resnick() ? "brown-resnick" : "moving-maximum"; }

std::string ModelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << name() << ":d=" << dim_;
  if (is_brown_resnick()) {
    const auto& v = variogram();
    os << ":variogram=" << v.family_name() << ":scale=" << v.scale() << ":exponent=" << v.exponent();
  } else {
    const auto& k = kernel();
    os << ":kernel=" << k.family_name() << ":bandwidth=" << k.bandwidth() << ":radius=" << k.radius();
  }
  return os.str();
}

}  // namespace maxstable
