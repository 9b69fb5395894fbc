#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "maxstable/config.hpp"
#include "maxstable/estimators.hpp"
#include "maxstable/mixing.hpp"
#include "maxstable/pointprocess.hpp"

namespace maxstable {

// Box covering the region and every region + h for the configured lags.
LatticeWindow simulation_window(const LatticeWindow& region, const std::vector<Site>& lags);

// Config echo written to manifests: the canonical form without the keys
// that may differ between otherwise identical runs (workers, out).
std::string manifest_config_text(const ExperimentConfig& config);

struct SimulateResult {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
  double truncation_flag_rate = 0.0;
};
// One field file per replicate plus manifest.json. Uses the largest window.
SimulateResult cmd_simulate(const ExperimentConfig& config);

struct EstimateRow {
  std::size_t replicate = 0;
  int window_size = 0;
  EstimateReport report;
  std::string error;  // non-empty when the estimator failed on this replicate
};

struct EstimateAggregate {
  EstimatorTag estimator = EstimatorTag::kTheta1;
  Site lag;
  std::optional<double> threshold;
  int window_size = 0;
  std::size_t count = 0;
  std::size_t errors = 0;
  double mean = 0.0;
  double sd = 0.0;
  double std_error = 0.0;
  double rmse = 0.0;
  double theta = 0.0;  // model value
  double z = 0.0;      // (mean - theta) / std_error
};

struct EstimateResult {
  std::vector<EstimateRow> rows;
  std::vector<EstimateAggregate> aggregate;
};
// Every (estimator, lag, threshold) on every replicate and window size;
// per-replicate failures are recorded in the rows, not thrown.
EstimateResult cmd_estimate(const ExperimentConfig& config, bool write_files = true);

struct CltVerdict {
  EstimatorTag estimator = EstimatorTag::kTheta1;
  std::string label;
  Site lag;
  std::optional<double> threshold;
  double theta = 0.0;
  std::vector<double> normalized_errors;  // sqrt|Lambda| (theta_hat - theta)
  std::size_t excluded = 0;
  double empirical_variance = 0.0;
  double target_variance = 0.0;
  std::string target_method;
  double variance_ratio = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 0.0;
  bool ratio_ok = false;
  bool ks_ok = false;
  bool pass = false;
};

// Variance-ratio and KS checks of normalized errors against N(0, target).
CltVerdict make_clt_verdict(std::vector<double> normalized_errors, double target_variance, double ratio_low,
                            double ratio_high, double ks_level);

struct CltVerifyResult {
  int window_size = 0;
  std::vector<CltVerdict> verdicts;
  CltVerdict control;  // first verdict's errors doubled; must fail
  CltConditionReport conditions;
};
CltVerifyResult cmd_clt_verify(const ExperimentConfig& config, bool write_files = true);

struct BoundsRow {
  int distance = 0;
  double gamma = 0.0;             // 2 (2 - theta(m e1))
  double beta_countable = 0.0;    // singletons {0}, {m e1}
  double beta_compact = 0.0;      // same singletons through the compact bound
  double alpha = 0.0;             // beta_countable / 2
  double alpha_kl_11 = 0.0;       // bolthausen bound k = l = 1
  double alpha_k1_inf = 0.0;      // k = 1, l unbounded
};

struct BoundsResult {
  std::vector<BoundsRow> ladder;
  std::vector<MixingBoundReport> set_reports;  // for configured S1, S2
};
BoundsResult cmd_bounds(const ExperimentConfig& config, bool write_files = true);

struct CouplingResult {
  ConditionalLawReport law;
  std::optional<ProbabilityEstimate> shared;
  std::optional<SlyvniakResult> slyvniak;
};
CouplingResult cmd_coupling(const ExperimentConfig& config, bool write_files = true);

struct VarianceOptResult {
  Site lag;
  double theta = 0.0;
  OptimalThreshold optimum;
  std::vector<std::pair<double, double>> grid;  // (y, sigma1^2) on a log grid around y*
};
VarianceOptResult cmd_variance_opt(const ExperimentConfig& config, bool write_files = true);

}  // namespace maxstable
