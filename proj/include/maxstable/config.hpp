#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "maxstable/field.hpp"
#include "maxstable/lattice.hpp"
#include "maxstable/models.hpp"

namespace maxstable {

// Flat key = value experiment description. See README for the keys.
struct ExperimentConfig {
  std::string model = "brown-resnick";  // brown-resnick | moving-maximum
  int dim = 2;
  std::string variogram_family = "power";  // power | fractional | degenerate
  double variogram_scale = 1.0;
  double variogram_exponent = 1.0;
  std::string kernel_family = "truncated-gaussian";  // gaussian | truncated-gaussian | indicator-box
  double kernel_bandwidth = 1.0;
  double kernel_radius = 2.0;

  std::string window_shape = "box";  // box | slab
  std::vector<int> window_sizes = {16};
  int window_thickness = 1;  // slab only: extent of the trailing axes
  double max_boundary_ratio = 1.0;

  std::vector<Site> lags = {Site{1, 0}};
  std::vector<double> thresholds = {1.0};
  std::vector<int> estimators = {1, 2, 3};
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "out";
  std::string format = "csv";  // csv | json

  TruncationPolicy truncation{};

  int bandwidth = 0;  // plug-in bandwidth, 0 = floor(|Lambda|^(1/2d))
  double clt_delta = 1.0;
  int clt_max_radius = 1024;
  double clt_ratio_low = 0.8;
  double clt_ratio_high = 1.25;
  double clt_ks_level = 0.01;
  std::size_t theta4_draws = 200000;
  int bounds_max_distance = 8;
  std::vector<Site> set1;  // bounds / coupling S1
  std::vector<Site> set2;  // bounds / shared-extremal S2
  std::size_t inner_draws = 2000;
  int slyvniak_cells = 12;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses the flat format. Unknown keys, malformed values and duplicate keys
// throw ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
// Canonical form: every key in a fixed order, doubles printed to round-trip.
std::string serialize_config(const ExperimentConfig& config);

// Throws ConfigError on invalid parameters or on a window family whose
// boundary ratio |dLambda|/|Lambda| is not decreasing or exceeds the
// declared bound.
void validate_config(const ExperimentConfig& config);

ModelSpec model_spec(const ExperimentConfig& config);
// Estimation region for window size n (lower corner at the origin).
LatticeWindow region_window(const ExperimentConfig& config, int n);

std::vector<Site> parse_sites(std::string_view text, int dim);
std::string format_sites(const std::vector<Site>& sites);

}  // namespace maxstable
