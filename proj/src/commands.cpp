#include "maxstable/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "maxstable/errors.hpp"
#include "maxstable/io.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

Json site_json(const Site& s) {
  Json a = Json::array();
  for (int i = 0; i < s.dim; ++i) a.push_back(s[i]);
  return a;
}

std::string lag_text(const Site& s) {
  std::string out;
  for (int i = 0; i < s.dim; ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(s[i]);
  }
  return out;
}

std::string threshold_text(const std::optional<double>& y) { return y ? format_number(*y) : std::string(); }

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

Json components_json(const std::vector<BoundComponent>& cs) {
  Json a = Json::array();
  for (const auto& c : cs) a.push_back({{"label", c.label}, {"value", c.value}, {"error", c.error}});
  return a;
}

Json bound_json(const MixingBoundReport& r) {
  return {{"s1", r.s1},
          {"s2", r.s2},
          {"family", bound_family_name(r.family)},
          {"beta", r.beta},
          {"alpha", r.alpha},
          {"mc_error", r.mc_error},
          {"mc_warning", r.mc_warning},
          {"components", components_json(r.components)}};
}

Json trace(const char* module, const char* operation, std::uint64_t seed) {
  return {{"module", module}, {"operation", operation}, {"seed", seed}};
}

int workers_of(const ExperimentConfig& c) { return resolve_workers(c.workers); }

}  // namespace

LatticeWindow simulation_window(const LatticeWindow& region, const std::vector<Site>& lags) {
  if (!region.is_box()) throw ContractError("simulation_window: region must be a box");
  const int dim = region.dim();
  Site lower = region.lower();
  Site upper = region.upper();
  for (const auto& h : lags) {
    for (int i = 0; i < dim; ++i) {
      lower[i] = std::min(lower[i], region.lower()[i] + h[i]);
      upper[i] = std::max(upper[i], region.upper()[i] + h[i]);
    }
  }
  std::vector<int> extent(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) extent[static_cast<std::size_t>(i)] = upper[i] - lower[i] + 1;
  return LatticeWindow::box(lower, extent);
}

std::string manifest_config_text(const ExperimentConfig& config) {
  std::istringstream in(serialize_config(config));
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("workers =", 0) == 0 || line.rfind("out =", 0) == 0) continue;
    out += line + "\n";
  }
  return out;
}

// --- simulate ---------------------------------------------------------------

SimulateResult cmd_simulate(const ExperimentConfig& c) {
  validate_config(c);
  const auto spec = model_spec(c);
  const fs::path dir = c.out;
  ensure_directory(dir);
  FieldSimulator sim(spec, region_window(c, c.window_sizes.back()), c.truncation);
  const auto& window = sim.window();

  struct Info {
    std::string file;
    std::uint64_t seed;
    std::size_t atoms;
    bool flag;
    double diagnostic;
  };
  auto infos = parallel_replicates(c.replicates, workers_of(c), [&](std::size_t r) {
    Rng rng = Rng::for_stream(c.seed, streams::kReplicate, r);
    const auto f = sim.sample(rng);
    char name[64];
    std::snprintf(name, sizeof name, "field_%06zu.%s", r, c.format.c_str());
    if (c.format == "csv") {
      std::vector<std::string> header;
      for (int i = 0; i < c.dim; ++i) header.push_back("x" + std::to_string(i));
      header.push_back("value");
      CsvTable t(header);
      for (std::size_t i = 0; i < f.size(); ++i) {
        std::vector<std::string> row;
        for (int k = 0; k < c.dim; ++k) row.push_back(std::to_string(window.site(i)[k]));
        row.push_back(format_number(f.values[i]));
        t.row(std::move(row));
      }
      write_file(dir / name, t.str());
    } else {
      Json sites = Json::array();
      for (const auto& s : window.sites()) sites.push_back(site_json(s));
      Json j = {{"model", f.model},
                {"window", window.descriptor()},
                {"seed", f.seed},
                {"atoms_used", f.atoms_used},
                {"truncation_bias_flag", f.truncation_bias_flag},
                {"bias_diagnostic", f.bias_diagnostic},
                {"sites", sites},
                {"values", f.values}};
      write_json(dir / name, j);
    }
    return Info{name, f.seed, f.atoms_used, f.truncation_bias_flag, f.bias_diagnostic};
  });

  SimulateResult res;
  Json reps = Json::array();
  std::size_t flagged = 0;
  for (std::size_t r = 0; r < infos.size(); ++r) {
    const auto& in = infos[r];
    res.files.push_back(dir / in.file);
    flagged += in.flag ? 1 : 0;
    reps.push_back({{"index", r},
                    {"file", in.file},
                    {"seed", in.seed},
                    {"atoms_used", in.atoms},
                    {"truncation_bias_flag", in.flag},
                    {"bias_diagnostic", in.diagnostic}});
  }
  res.truncation_flag_rate = static_cast<double>(flagged) / static_cast<double>(infos.size());
  Json manifest = {{"command", "simulate"},
                   {"trace", trace("fields-core", "simulate", c.seed)},
                   {"config", manifest_config_text(c)},
                   {"model", spec.describe()},
                   {"window", window.descriptor()},
                   {"truncation_flag_rate", res.truncation_flag_rate},
                   {"replicates", reps}};
  res.manifest = dir / "manifest.json";
  write_json(res.manifest, manifest);
  return res;
}

// --- estimate ---------------------------------------------------------------

namespace {

std::vector<EstimateRow> estimate_replicate(const FieldSample& f, const LatticeWindow& region,
                                            const ExperimentConfig& c, std::size_t r, int n) {
  std::vector<EstimateRow> rows;
  EstimateOptions opt;
  opt.bandwidth = c.bandwidth;
  auto run = [&](EstimatorTag tag, const Site& h, std::optional<double> y, auto&& fn) {
    EstimateRow row;
    row.replicate = r;
    row.window_size = n;
    row.report.estimator = tag;
    row.report.lag = h;
    row.report.threshold = y;
    row.report.window_size = region.size();
    if (f.truncation_bias_flag) {
      row.error = "truncation-flagged sample";
    } else {
      try {
        row.report = fn();
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
    rows.push_back(std::move(row));
  };
  for (const auto& h : c.lags) {
    for (int e : c.estimators) {
      if (e == 1) {
        for (double y : c.thresholds) {
          run(EstimatorTag::kTheta1, h, y, [&] { return theta_hat1(f, region, h, y, opt); });
        }
      } else if (e == 2) {
        run(EstimatorTag::kTheta2, h, std::nullopt, [&] { return theta_hat2(f, region, h, opt); });
      } else {
        run(EstimatorTag::kTheta3, h, std::nullopt, [&] { return theta_hat3(f, region, h, opt); });
      }
    }
  }
  return rows;
}

}  // namespace

EstimateResult cmd_estimate(const ExperimentConfig& c, bool write_files) {
  validate_config(c);
  const auto spec = model_spec(c);
  PairTheta pair(spec);
  EstimateResult res;
  for (int n : c.window_sizes) {
    const auto region = region_window(c, n);
    FieldSimulator sim(spec, simulation_window(region, c.lags), c.truncation);
    const std::uint64_t root = derive_seed(c.seed, streams::kReplicate, static_cast<std::uint64_t>(n));
    auto per = parallel_replicates(c.replicates, workers_of(c), [&](std::size_t r) {
      Rng rng = Rng::for_stream(root, streams::kReplicate, r);
      const auto f = sim.sample(rng);
      return estimate_replicate(f, region, c, r, n);
    });
    for (auto& rows : per) {
      for (auto& row : rows) res.rows.push_back(std::move(row));
    }
  }

  // aggregate in first-appearance order
  using Key = std::tuple<int, Site, double, int>;
  std::map<Key, std::size_t> index;
  std::vector<std::vector<double>> values;
  for (const auto& row : res.rows) {
    const auto& rep = row.report;
    const Key key{static_cast<int>(rep.estimator), rep.lag, rep.threshold.value_or(0.0), row.window_size};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, res.aggregate.size()).first;
      EstimateAggregate a;
      a.estimator = rep.estimator;
      a.lag = rep.lag;
      a.threshold = rep.threshold;
      a.window_size = row.window_size;
      a.theta = pair.value(rep.lag);
      res.aggregate.push_back(a);
      values.emplace_back();
    }
    auto& a = res.aggregate[it->second];
    if (row.error.empty()) {
      values[it->second].push_back(rep.estimate);
    } else {
      ++a.errors;
    }
  }
  for (std::size_t k = 0; k < res.aggregate.size(); ++k) {
    auto& a = res.aggregate[k];
    const auto& v = values[k];
    a.count = v.size();
    if (v.empty()) continue;
    const auto s = summarize(v);
    a.mean = s.mean;
    a.sd = std::sqrt(s.variance);
    a.std_error = v.size() > 1 ? s.std_error() : 0.0;
    double mse = 0.0;
    for (double x : v) mse += (x - a.theta) * (x - a.theta);
    a.rmse = std::sqrt(mse / static_cast<double>(v.size()));
    a.z = a.std_error > 0.0 ? (a.mean - a.theta) / a.std_error : 0.0;
  }
  if (!write_files) return res;

  const fs::path dir = c.out;
  ensure_directory(dir);
  if (c.format == "csv") {
    CsvTable rows({"replicate", "window_size", "estimator", "lag", "threshold", "region_size", "estimate", "variance",
                   "variance_method", "ci_low", "ci_high", "out_of_range", "error"});
    for (const auto& row : res.rows) {
      const auto& r = row.report;
      rows.row({std::to_string(row.replicate), std::to_string(row.window_size), estimator_name(r.estimator),
                lag_text(r.lag), threshold_text(r.threshold), std::to_string(r.window_size),
                row.error.empty() ? format_number(r.estimate) : "", format_number(r.variance),
                variance_method_name(r.variance_method), format_number(r.ci_low), format_number(r.ci_high),
                r.out_of_range ? "1" : "0", row.error});
    }
    write_file(dir / "estimates.csv", rows.str());
    CsvTable agg({"estimator", "lag", "threshold", "window_size", "count", "errors", "mean", "sd", "std_error", "rmse",
                  "theta", "z"});
    for (const auto& a : res.aggregate) {
      agg.row({estimator_name(a.estimator), lag_text(a.lag), threshold_text(a.threshold),
               std::to_string(a.window_size), std::to_string(a.count), std::to_string(a.errors), format_number(a.mean),
               format_number(a.sd), format_number(a.std_error), format_number(a.rmse), format_number(a.theta),
               format_number(a.z)});
    }
    write_file(dir / "aggregate.csv", agg.str());
  } else {
    Json rows = Json::array();
    for (const auto& row : res.rows) {
      const auto& r = row.report;
      Json j = {{"replicate", row.replicate},
                {"window_size", row.window_size},
                {"estimator", estimator_name(r.estimator)},
                {"lag", site_json(r.lag)},
                {"region_size", r.window_size}};
      if (r.threshold) j["threshold"] = *r.threshold;
      if (row.error.empty()) {
        j["estimate"] = r.estimate;
        j["variance"] = r.variance;
        j["variance_method"] = variance_method_name(r.variance_method);
        j["ci"] = {r.ci_low, r.ci_high};
        j["out_of_range"] = r.out_of_range;
        if (!r.note.empty()) j["note"] = r.note;
      } else {
        j["error"] = row.error;
      }
      rows.push_back(j);
    }
    Json agg = Json::array();
    for (const auto& a : res.aggregate) {
      Json j = {{"estimator", estimator_name(a.estimator)}, {"lag", site_json(a.lag)}};
      if (a.threshold) j["threshold"] = *a.threshold;
      j.update({{"window_size", a.window_size}, {"count", a.count}, {"errors", a.errors}, {"mean", a.mean},
                {"sd", a.sd}, {"std_error", a.std_error}, {"rmse", a.rmse}, {"theta", a.theta}, {"z", a.z}});
      agg.push_back(j);
    }
    write_json(dir / "estimates.json", {{"rows", rows}, {"aggregate", agg}});
  }
  write_json(dir / "manifest.json", {{"command", "estimate"},
                                     {"trace", trace("estimators", "estimate", c.seed)},
                                     {"config", manifest_config_text(c)},
                                     {"model", spec.describe()}});
  return res;
}

// --- clt-verify -------------------------------------------------------------

CltVerdict make_clt_verdict(std::vector<double> errors, double target, double ratio_low, double ratio_high,
                            double ks_level) {
  if (errors.size() < 2) throw ContractError("make_clt_verdict: need at least two normalized errors");
  if (!(target > 0.0)) throw NumericalError("make_clt_verdict: target variance must be positive");
  CltVerdict v;
  v.normalized_errors = std::move(errors);
  const auto s = summarize(v.normalized_errors);
  v.empirical_variance = s.variance;
  v.target_variance = target;
  v.variance_ratio = s.variance / target;
  const double sd = std::sqrt(target);
  v.ks_statistic = ks_statistic(v.normalized_errors, [sd](double x) { return normal_cdf(x / sd); });
  v.ks_pvalue = ks_pvalue(v.ks_statistic, v.normalized_errors.size());
  v.ratio_ok = v.variance_ratio >= ratio_low && v.variance_ratio <= ratio_high;
  v.ks_ok = v.ks_pvalue > ks_level;
  v.pass = v.ratio_ok && v.ks_ok;
  return v;
}

CltVerifyResult cmd_clt_verify(const ExperimentConfig& c, bool write_files) {
  validate_config(c);
  if (c.lags.empty()) throw ConfigError("clt-verify needs a lag");
  const auto spec = model_spec(c);
  const Site h = c.lags.front();
  const double y = c.thresholds.front();
  const int n = c.window_sizes.back();
  const auto region = region_window(c, n);
  FieldSimulator sim(spec, simulation_window(region, {h}), c.truncation);
  const int workers = workers_of(c);
  const double theta = PairTheta(spec).value(h);
  const double scale = std::sqrt(static_cast<double>(region.size()));

  struct Row {
    bool flagged = false;
    std::array<double, 3> estimate{};
    std::array<double, 3> plugin{};
    std::array<std::string, 3> error;
  };
  auto rows = parallel_replicates(c.replicates, workers, [&](std::size_t r) {
    Rng rng = Rng::for_stream(c.seed, streams::kReplicate, r);
    const auto f = sim.sample(rng);
    Row row;
    row.flagged = f.truncation_bias_flag;
    if (row.flagged) return row;
    EstimateOptions opt;
    opt.plugin_variance = false;
    for (int e : c.estimators) {
      const auto k = static_cast<std::size_t>(e - 1);
      try {
        if (e == 1) {
          row.estimate[k] = theta_hat1(f, region, h, y, opt).estimate;
        } else {
          const auto tag = e == 2 ? EstimatorTag::kTheta2 : EstimatorTag::kTheta3;
          row.estimate[k] = (e == 2 ? theta_hat2(f, region, h, opt) : theta_hat3(f, region, h, opt)).estimate;
          row.plugin[k] = sigma_plugin(std::span<const FieldSample>(&f, 1), region, h, tag, c.bandwidth, 1.0, false)
                              .value;
        }
      } catch (const std::exception& ex) {
        row.error[k] = ex.what();
      }
    }
    return row;
  });

  std::size_t flagged = 0;
  for (const auto& row : rows) flagged += row.flagged ? 1 : 0;
  if (static_cast<double>(rows.size() - flagged) < 0.8 * static_cast<double>(rows.size())) {
    std::ostringstream os;
    os << "clt-verify: only " << rows.size() - flagged << " of " << rows.size()
       << " replicates are free of truncation flags (< 80%); raise trunc.max_atoms or trunc.epsilon";
    throw NumericalError(os.str());
  }

  CltVerifyResult res;
  res.window_size = n;
  for (int e : c.estimators) {
    const auto k = static_cast<std::size_t>(e - 1);
    const auto tag = static_cast<EstimatorTag>(e);
    std::vector<double> errs;
    std::vector<double> plug;
    std::size_t excluded = 0;
    for (const auto& row : rows) {
      if (row.flagged || !row.error[k].empty()) {
        ++excluded;
        continue;
      }
      errs.push_back(scale * (row.estimate[k] - theta));
      plug.push_back(row.plugin[k]);
    }
    double target = 0.0;
    std::string method;
    if (e == 1) {
      Theta4Options t4;
      t4.mc_draws = c.theta4_draws;
      t4.seed = c.seed;
      Sigma1Options so;
      so.workers = workers;
      Sigma1Series series(spec, h, make_theta4_provider(spec, h, t4), so);
      target = series(y);
      method = variance_method_name(VarianceMethod::kAnalyticSeries);
    } else {
      target = summarize(plug).mean;
      method = variance_method_name(VarianceMethod::kPluginEmpirical);
    }
    auto v = make_clt_verdict(std::move(errs), target, c.clt_ratio_low, c.clt_ratio_high, c.clt_ks_level);
    v.estimator = tag;
    v.label = estimator_name(tag);
    v.lag = h;
    if (e == 1) v.threshold = y;
    v.theta = theta;
    v.excluded = excluded;
    v.target_method = method;
    res.verdicts.push_back(std::move(v));
  }
  if (!res.verdicts.empty()) {
    const auto& first = res.verdicts.front();
    std::vector<double> doubled = first.normalized_errors;
    for (auto& x : doubled) x *= 2.0;
    res.control = make_clt_verdict(std::move(doubled), first.target_variance, c.clt_ratio_low, c.clt_ratio_high,
                                   c.clt_ks_level);
    res.control.estimator = first.estimator;
    res.control.label = "control:" + first.label + "x2";
    res.control.lag = h;
    res.control.theta = theta;
    res.control.target_method = first.target_method;
  }
  res.conditions = clt_condition_check(spec, c.clt_delta, c.dim, geometric_ladder(c.clt_max_radius));
  if (!write_files) return res;

  const fs::path dir = c.out;
  ensure_directory(dir);
  CsvTable errs({"estimator", "index", "normalized_error"});
  auto verdict_json = [&](const CltVerdict& v) {
    Json j = {{"estimator", v.label}, {"lag", site_json(v.lag)}};
    if (v.threshold) j["threshold"] = *v.threshold;
    j.update({{"theta", v.theta},
              {"count", v.normalized_errors.size()},
              {"excluded", v.excluded},
              {"empirical_variance", v.empirical_variance},
              {"target_variance", v.target_variance},
              {"target_method", v.target_method},
              {"variance_ratio", v.variance_ratio},
              {"ks_statistic", v.ks_statistic},
              {"ks_pvalue", v.ks_pvalue},
              {"ratio_ok", v.ratio_ok},
              {"ks_ok", v.ks_ok},
              {"pass", v.pass}});
    return j;
  };
  Json verdicts = Json::array();
  for (const auto& v : res.verdicts) {
    verdicts.push_back(verdict_json(v));
    for (std::size_t i = 0; i < v.normalized_errors.size(); ++i) {
      errs.row({v.label, std::to_string(i), format_number(v.normalized_errors[i])});
    }
  }
  write_file(dir / "normalized_errors.csv", errs.str());
  const auto& cr = res.conditions;
  Json cond = {{"model", cr.model},
               {"delta", cr.delta},
               {"dim", cr.dim},
               {"threshold", cr.threshold},
               {"vanishes", cr.vanishes},
               {"zero_radius", cr.zero_radius},
               {"super_polynomial", cr.super_polynomial},
               {"b", std::isfinite(cr.b) ? Json(cr.b) : Json("inf")},
               {"b_std_error", cr.b_std_error},
               {"radii", cr.radii},
               {"gamma_sup", cr.gamma_sup},
               {"tail_ratio", cr.tail_ratio},
               {"series_partial", cr.series_partial},
               {"pass", cr.pass},
               {"reason", cr.reason}};
  write_json(dir / "clt_verdict.json", {{"command", "clt-verify"},
                                        {"trace", trace("cli-harness", "clt-verify", c.seed)},
                                        {"config", manifest_config_text(c)},
                                        {"model", spec.describe()},
                                        {"window_size", n},
                                        {"verdicts", verdicts},
                                        {"control", verdict_json(res.control)},
                                        {"conditions", cond}});
  write_file(dir / "clt_conditions.txt", cr.verdict_block());
  return res;
}

// --- bounds -----------------------------------------------------------------

BoundsResult cmd_bounds(const ExperimentConfig& c, bool write_files) {
  validate_config(c);
  const auto spec = model_spec(c);
  BoundsResult res;
  Rng rng(derive_seed(c.seed, streams::kReplicate, 0));
  const Site origin = Site::zero(c.dim);
  for (int m = 1; m <= c.bounds_max_distance; ++m) {
    const Site h = Site::axis(c.dim, 0, m);
    const std::vector<Site> a{origin}, b{h};
    BoundsRow row;
    row.distance = m;
    row.gamma = gamma_bound(spec, h);
    row.beta_countable = beta_bound_countable(spec, a, b).beta;
    row.beta_compact = beta_bound_compact(spec, a, b, rng).beta;
    row.alpha = row.beta_countable / 2.0;
    row.alpha_kl_11 = bolthausen_alpha_bound(spec, 1, 1, m);
    row.alpha_k1_inf = bolthausen_alpha_bound(spec, 1, kUnboundedSet, m);
    res.ladder.push_back(row);
  }
  if (!c.set1.empty() && !c.set2.empty()) {
    CompactBoundOptions opt;
    opt.n_draws = c.replicates;
    opt.theta_draws = c.theta4_draws;
    opt.truncation = c.truncation;
    opt.workers = workers_of(c);
    res.set_reports.push_back(beta_bound_countable(spec, c.set1, c.set2));
    res.set_reports.push_back(beta_bound_compact(spec, c.set1, c.set2, rng, opt));
  }
  if (!write_files) return res;

  const fs::path dir = c.out;
  ensure_directory(dir);
  CsvTable t({"distance", "gamma_bound", "beta_cor2", "beta_thm2_singletons", "alpha_cor2", "alpha_kl_1_1",
              "alpha_kl_1_inf"});
  Json ladder = Json::array();
  for (const auto& r : res.ladder) {
    t.row({std::to_string(r.distance), format_number(r.gamma), format_number(r.beta_countable),
           format_number(r.beta_compact), format_number(r.alpha), format_number(r.alpha_kl_11),
           format_number(r.alpha_k1_inf)});
    ladder.push_back({{"distance", r.distance},
                      {"gamma_bound", r.gamma},
                      {"beta_cor2", r.beta_countable},
                      {"beta_thm2_singletons", r.beta_compact},
                      {"alpha_cor2", r.alpha},
                      {"alpha_kl_1_1", r.alpha_kl_11},
                      {"alpha_kl_1_inf", r.alpha_k1_inf}});
  }
  write_file(dir / "bounds.csv", t.str());
  Json sets = Json::array();
  for (const auto& r : res.set_reports) sets.push_back(bound_json(r));
  write_json(dir / "bounds.json", {{"command", "bounds"},
                                   {"trace", trace("mixing-clt", "bounds", c.seed)},
                                   {"config", manifest_config_text(c)},
                                   {"model", spec.describe()},
                                   {"ladder", ladder},
                                   {"sets", sets}});
  return res;
}

// --- coupling ---------------------------------------------------------------

CouplingResult cmd_coupling(const ExperimentConfig& c, bool write_files) {
  validate_config(c);
  const auto spec = model_spec(c);
  if (!spec.is_moving_maximum()) throw ConfigError("coupling needs model = moving-maximum");
  const auto window = region_window(c, c.window_sizes.front());
  const std::vector<Site> s1 = c.set1.empty() ? std::vector<Site>{Site::zero(c.dim)} : c.set1;
  CouplingResult res;
  Rng rng(derive_seed(c.seed, streams::kCoupling, 0));
  ConditionalLawOptions lo;
  lo.replicates = c.replicates;
  lo.workers = workers_of(c);
  res.law = conditional_law_check(spec, window, s1, rng, lo);
  if (!c.set2.empty()) {
    Rng r2(derive_seed(c.seed, streams::kCoupling, 1));
    res.shared = mc_shared_extremal_prob(spec, s1, c.set2, c.replicates, r2, workers_of(c));
    SlyvniakOptions so;
    so.cells_per_unit = c.slyvniak_cells;
    so.inner_draws = c.inner_draws;
    so.workers = workers_of(c);
    Rng r3(derive_seed(c.seed, streams::kInner, 0));
    res.slyvniak = slyvniak_integral(spec, s1, c.set2, r3, so);
  }
  if (!write_files) return res;

  const fs::path dir = c.out;
  ensure_directory(dir);
  const auto& l = res.law;
  Json j = {{"command", "coupling"},
            {"trace", trace("pointprocess-lab", "conditional_law_check", c.seed)},
            {"config", manifest_config_text(c)},
            {"model", spec.describe()},
            {"s1", set_descriptor(s1)},
            {"law",
             {{"replicates", l.replicates},
              {"bit_exact_failures", l.bit_exact_failures},
              {"ks_marginal", l.ks_marginal},
              {"ks_marginal_pvalue", l.ks_marginal_pvalue},
              {"ks_counts", l.ks_counts},
              {"ks_counts_pvalue", l.ks_counts_pvalue},
              {"theta_coupled", l.theta_coupled},
              {"theta_coupled_se", l.theta_coupled_se},
              {"theta_direct", l.theta_direct},
              {"theta_direct_se", l.theta_direct_se},
              {"theta_discrepancy_in_se", l.theta_discrepancy_in_se}}}};
  if (res.shared) {
    j["s2"] = set_descriptor(c.set2);
    j["shared_extremal"] = {{"probability", res.shared->value},
                            {"std_error", res.shared->std_error},
                            {"used", res.shared->used},
                            {"excluded", res.shared->excluded}};
    j["slyvniak"] = {{"value", res.slyvniak->value},
                     {"mc_error", res.slyvniak->mc_error},
                     {"quadrature_error", res.slyvniak->quadrature_error},
                     {"error", res.slyvniak->error},
                     {"coarse_value", res.slyvniak->coarse_value},
                     {"mc_warning", res.slyvniak->mc_warning}};
  }
  write_json(dir / "coupling.json", j);
  return res;
}

// --- variance-opt -----------------------------------------------------------

VarianceOptResult cmd_variance_opt(const ExperimentConfig& c, bool write_files) {
  validate_config(c);
  if (c.lags.empty()) throw ConfigError("variance-opt needs a lag");
  const auto spec = model_spec(c);
  VarianceOptResult res;
  res.lag = c.lags.front();
  Theta4Options t4;
  t4.mc_draws = c.theta4_draws;
  t4.seed = c.seed;
  Sigma1Options so;
  so.workers = workers_of(c);
  Sigma1Series series(spec, res.lag, make_theta4_provider(spec, res.lag, t4), so);
  res.theta = series.theta_h();
  res.optimum = optimal_y(series);
  for (int k = -8; k <= 8; ++k) {
    const double y = res.optimum.y_star * std::pow(2.0, k / 4.0);
    res.grid.emplace_back(y, series(y));
  }
  if (!write_files) return res;

  const fs::path dir = c.out;
  ensure_directory(dir);
  CsvTable t({"y", "sigma1_sq"});
  for (const auto& [y, v] : res.grid) t.row({format_number(y), format_number(v)});
  write_file(dir / "sigma1_profile.csv", t.str());
  write_json(dir / "variance_opt.json", {{"command", "variance-opt"},
                                         {"trace", trace("estimators", "optimal_y", c.seed)},
                                         {"config", manifest_config_text(c)},
                                         {"model", spec.describe()},
                                         {"lag", site_json(res.lag)},
                                         {"theta", res.theta},
                                         {"y_star", res.optimum.y_star},
                                         {"sigma1_at_star", res.optimum.sigma1_at_star},
                                         {"evaluations", res.optimum.profile.size()}});
  return res;
}

}  // namespace maxstable
