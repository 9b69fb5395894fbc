#pragma once

#include <span>
#include <string>
#include <variant>

#include "maxstable/lattice.hpp"

namespace maxstable {

// Variogram V(h) = (|h|_2 / scale)^exponent of a stationary-increments
// Gaussian field. The degenerate family is V == 0 (constant field).
class VariogramSpec {
 public:
  enum class Family { kPower, kFractional, kDegenerate };

  static VariogramSpec power(double scale, double exponent);
  // Fractional Brownian variogram, exponent restricted to (0, 2).
  static VariogramSpec fractional(double scale, double exponent);
  static VariogramSpec degenerate();

  double operator()(const Site& h) const { return at_distance(h.euclidean_norm()); }
  double at_distance(double r) const;

  Family family() const { return family_; }
  double scale() const { return scale_; }
  double exponent() const { return exponent_; }
  std::string family_name() const;

 private:
  Family family_ = Family::kPower;
  double scale_ = 1.0;
  double exponent_ = 1.0;
};

// Product kernel f(x) = prod_i g(x_i) of a one-dimensional density g.
//  - gaussian: g = N(0, bandwidth^2); `radius` is the effective support
//    radius with total tail mass below 1e-8.
//  - truncated-gaussian: g(x) proportional to
//    exp(-x^2/2b^2) - exp(-R^2/2b^2) on |x| < R; continuous, compact.
//  - indicator-box: g uniform on [-R, R].
class KernelSpec {
 public:
  enum class Family { kGaussian, kTruncatedGaussian, kIndicatorBox };

  static KernelSpec gaussian(int dim, double bandwidth);
  static KernelSpec truncated_gaussian(int dim, double bandwidth, double radius);
  static KernelSpec indicator_box(int dim, double half_width);

  double axis_density(double x) const;
  // f evaluated at t - u.
  double density_at(const Site& t, std::span<const double> u) const;
  double density(std::span<const double> x) const;

  Family family() const { return family_; }
  std::string family_name() const;
  int dim() const { return dim_; }
  double bandwidth() const { return bandwidth_; }
  double radius() const { return radius_; }
  double normalization() const { return normalization_; }
  double f_max() const { return f_max_; }
  bool compact() const { return family_ != Family::kGaussian; }
  // Sites further apart than this (sup norm) have disjoint kernel supports.
  double diameter() const { return 2.0 * radius_; }

 private:
  Family family_ = Family::kGaussian;
  int dim_ = 1;
  double bandwidth_ = 1.0;
  double radius_ = 1.0;
  double normalization_ = 1.0;  // multiplies the unnormalized 1-d profile
  double cutoff_ = 0.0;         // exp(-R^2/2b^2) for truncated-gaussian
  double f_max_ = 1.0;
};

struct BrownResnick {
  VariogramSpec variogram;
};

struct MovingMaximum {
  KernelSpec kernel;
};

class ModelSpec {
 public:
  static ModelSpec brown_resnick(int dim, VariogramSpec v);
  static ModelSpec moving_maximum(KernelSpec k);

  int dim() const { return dim_; }
  bool is_brown_resnick() const { return std::holds_alternative<BrownResnick>(model_); }
  bool is_moving_maximum() const { return std::holds_alternative<MovingMaximum>(model_); }
  const VariogramSpec& variogram() const;
  const KernelSpec& kernel() const;
  std::string name() const;
  std::string describe() const;

 private:
  int dim_ = 1;
  std::variant<BrownResnick, MovingMaximum> model_;
};

}  // namespace maxstable
