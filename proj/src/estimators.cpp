#include "maxstable/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "maxstable/errors.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

std::string estimator_name(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::kTheta1: return "theta1";
    case EstimatorTag::kTheta2: return "theta2";
    case EstimatorTag::kTheta3: return "theta3";
  }
  return "?";
}

std::string variance_method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::kNone: return "none";
    case VarianceMethod::kAnalyticSeries: return "analytic-series";
    case VarianceMethod::kPluginEmpirical: return "plug-in-empirical";
  }
  return "?";
}

void EstimateReport::set_variance(double var, VarianceMethod method) {
  variance = var;
  variance_method = method;
  const double z = normal_quantile(0.5 + level / 2.0);
  const double half = window_size > 0 ? z * std::sqrt(std::max(var, 0.0) / static_cast<double>(window_size)) : 0.0;
  ci_low = estimate - half;
  ci_high = estimate + half;
}

LagPairs lag_pairs(const FieldSample& sample, const LatticeWindow& region, const Site& h) {
  LagPairs p;
  p.first.reserve(region.size());
  p.second.reserve(region.size());
  std::vector<Site> missing;
  std::size_t missing_count = 0;
  for (const auto& t : region.sites()) {
    const auto a = sample.window->index_of(t);
    const auto b = sample.window->index_of(t + h);
    if (!a || !b) {
      ++missing_count;
      if (missing.size() < 5) missing.push_back(a ? t + h : t);
      continue;
    }
    p.first.push_back(*a);
    p.second.push_back(*b);
  }
  if (missing_count > 0) {
    std::ostringstream os;
    os << "estimator needs eta(t) and eta(t+h) for every t in the region; " << missing_count
       << " missing, e.g.";
    for (const auto& s : missing) os << ' ' << s.to_string();
    throw ContractError(os.str());
  }
  if (p.size() == 0) throw ContractError("estimator: empty region");
  return p;
}

double p_hat(const FieldSample& sample, const LatticeWindow& region, const Site& h, double y) {
  if (!(y > 0.0)) throw ContractError("p_hat: threshold must be positive");
  const auto pairs = lag_pairs(sample, region, h);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    hits += (sample.values[pairs.first[i]] <= y && sample.values[pairs.second[i]] <= y) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

namespace {

EstimateReport base_report(EstimatorTag tag, const Site& h, double estimate, std::size_t n, const EstimateOptions& opt) {
  EstimateReport r;
  r.estimator = tag;
  r.lag = h;
  r.estimate = estimate;
  r.window_size = n;
  r.level = opt.level;
  r.out_of_range = !(estimate >= 1.0 && estimate <= 2.0);
  r.ci_low = r.ci_high = estimate;
  return r;
}

void fill_variance(EstimateReport& r, const FieldSample& sample, const LatticeWindow& region, const Site& h,
                   const EstimateOptions& opt) {
  if (opt.variance) {
    r.set_variance(*opt.variance, VarianceMethod::kAnalyticSeries);
  } else if (opt.plugin_variance && region.is_box()) {
    const auto pv = sigma_plugin(std::span<const FieldSample>(&sample, 1), region, h, r.estimator, opt.bandwidth,
                                 r.threshold.value_or(1.0), false);
    r.set_variance(pv.value, VarianceMethod::kPluginEmpirical);
  }
}

}  // namespace

EstimateReport theta_hat1(const FieldSample& sample, const LatticeWindow& region, const Site& h, double y,
                          const EstimateOptions& opt) {
  const double p = p_hat(sample, region, h, y);
  if (p == 0.0) {
    std::ostringstream os;
    os << "theta1 undefined at threshold y=" << y << ": no pair falls below it (p_hat = 0); raise y";
    throw NumericalError(os.str());
  }
  auto r = base_report(EstimatorTag::kTheta1, h, -y * std::log(p), region.size(), opt);
  r.threshold = y;
  fill_variance(r, sample, region, h, opt);
  return r;
}

EstimateReport theta_hat2(const FieldSample& sample, const LatticeWindow& region, const Site& h,
                          const EstimateOptions& opt) {
  const auto pairs = lag_pairs(sample, region, h);
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sum += std::min(1.0 / sample.values[pairs.first[i]], 1.0 / sample.values[pairs.second[i]]);
  }
  auto r = base_report(EstimatorTag::kTheta2, h, static_cast<double>(pairs.size()) / sum, region.size(), opt);
  if (pairs.size() < 30) {
    r.small_sample = true;
    r.note = "small window: 1/theta_hat2 is unbiased for 1/theta, theta_hat2 itself is biased";
  }
  fill_variance(r, sample, region, h, opt);
  return r;
}

double madogram(const FieldSample& sample, const LatticeWindow& region, const Site& h) {
  const auto pairs = lag_pairs(sample, region, h);
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sum += std::abs(frechet_cdf(sample.values[pairs.first[i]]) - frechet_cdf(sample.values[pairs.second[i]]));
  }
  return 0.5 * sum / static_cast<double>(pairs.size());
}

EstimateReport theta_hat3(const FieldSample& sample, const LatticeWindow& region, const Site& h,
                          const EstimateOptions& opt) {
  const auto pairs = lag_pairs(sample, region, h);
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    sum += std::abs(frechet_cdf(sample.values[pairs.first[i]]) - frechet_cdf(sample.values[pairs.second[i]]));
  }
  // nu = sum / 2n, theta = (1 + 2 nu) / (1 - 2 nu)
  const double n = static_cast<double>(pairs.size());
  if (sum >= n) {
    throw NumericalError("theta3 diverges: F-madogram >= 1/2 (impossible for max-stable data, check the input)");
  }
  auto r = base_report(EstimatorTag::kTheta3, h, (n + sum) / (n - sum), region.size(), opt);
  fill_variance(r, sample, region, h, opt);
  return r;
}

// --- sigma_1^2 --------------------------------------------------------------

Theta4Provider make_theta4_provider(const ModelSpec& spec, const Site& h, const Theta4Options& opt) {
  const bool compact = spec.is_moving_maximum() && spec.kernel().compact();
  const double theta_h = compact ? theta_pair_mm(spec.kernel(), h, opt.quadrature).value : 0.0;
  return [spec, h, opt, compact, theta_h](const Site& t) {
    if (compact) {
      // {0, h} and {t, t + h} have disjoint kernel supports: theta adds up
      const int gap = std::min({t.sup_norm(), (t + h).sup_norm(), (t - h).sup_norm()});
      if (gap >= spec.kernel().diameter()) return ThetaValue{2.0 * theta_h, ThetaValue::Method::kClosedForm, 0.0};
    }
    std::vector<Site> set = {Site::zero(spec.dim()), h, t, t + h};
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    SetThetaOptions so;
    so.quadrature = opt.quadrature;
    so.mc_draws = opt.mc_draws;
    so.estimator = SpectralEstimator::kNormalized;
    Rng rng(derive_seed(opt.seed, streams::kTheta4, SiteHash{}(t)));
    return theta_set(spec, set, rng, so);
  };
}

Sigma1Series::Sigma1Series(ModelSpec spec, Site h, Theta4Provider provider, Sigma1Options opt)
    : spec_(std::move(spec)), h_(h), provider_(std::move(provider)), opt_(opt), pair_(spec_) {
  theta_h_ = pair_.value(h_);
}

void Sigma1Series::ensure_ring(int r) {
  while (static_cast<int>(rings_.size()) <= r) {
    const int rr = static_cast<int>(rings_.size());
    auto ring = sup_sphere(spec_.dim(), rr);
    // a(t) = a(-t): the sets {0,h,t,t+h} and {0,h,-t,-t+h} differ by a shift
    std::vector<Site> todo;
    for (const auto& t : ring) {
      const Site key = std::max(t, -t);
      if (key == t) todo.push_back(t);
    }
    auto values = parallel_replicates(todo.size(), opt_.workers, [&](std::size_t i) { return provider_(todo[i]).value; });
    for (std::size_t i = 0; i < todo.size(); ++i) {
      // theta(h) <= theta4 <= 2 theta(h); clip Monte Carlo noise into that range
      const double e = std::clamp(2.0 * theta_h_ - values[i], 0.0, theta_h_);
      exponent_[todo[i]] = e;
      exponent_[-todo[i]] = e;
    }
    rings_.push_back(std::move(ring));
  }
}

double Sigma1Series::ring_sum(int r, double y) const {
  double s = 0.0;
  for (const auto& t : rings_[static_cast<std::size_t>(r)]) {
    s += y * y * std::expm1(exponent_.at(t) / y);
  }
  return s;
}

double Sigma1Series::cross_bound(const Site& t) const {
  return 2.0 * (2.0 - pair_.value(t)) + (2.0 - pair_.value(t + h_)) + (2.0 - pair_.value(t - h_));
}

double Sigma1Series::ring_bound(int r, double y) {
  auto it = bound_exponents_.find(r);
  if (it == bound_exponents_.end()) {
    std::vector<double> b;
    for (const auto& t : sup_sphere(spec_.dim(), r)) b.push_back(std::max(0.0, cross_bound(t)));
    it = bound_exponents_.emplace(r, std::move(b)).first;
  }
  double s = 0.0;
  for (double b : it->second) s += y * y * std::expm1(b / y);
  return s;
}

Sigma1Result Sigma1Series::evaluate(double y) {
  if (!(y > 0.0)) throw ContractError("sigma1_sq: threshold must be positive");
  Sigma1Result res;
  double partial = 0.0;
  if (fixed_radius_) {
    for (int r = 0; r <= *fixed_radius_; ++r) {
      ensure_ring(r);
      partial += ring_sum(r, y);
      res.terms += rings_[static_cast<std::size_t>(r)].size();
    }
    double tail = 0.0;
    for (int q = *fixed_radius_ + 1; q <= *fixed_radius_ + 1 + opt_.max_radius; ++q) {
      const double rb = ring_bound(q, y);
      tail += rb;
      if (rb <= 1e-12 * (std::abs(partial) + tail)) break;
    }
    res.value = partial;
    res.tail_bound = tail;
    res.radius = *fixed_radius_;
    return res;
  }
  for (int r = 0; r <= opt_.max_radius; ++r) {
    ensure_ring(r);
    partial += ring_sum(r, y);
    res.terms += rings_[static_cast<std::size_t>(r)].size();
    // tail bound over rings > r
    double tail = 0.0;
    double prev_ring = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int q = r + 1; q <= r + 1 + opt_.max_radius; ++q) {
      const double rb = ring_bound(q, y);
      tail += rb;
      if (rb <= 1e-12 * (std::abs(partial) + tail) || rb == 0.0) {
        converged = true;
        break;
      }
      if (q > r + 8 && rb > prev_ring) {
        std::ostringstream os;
        os << "sigma1 series: tail bound does not decay (ring " << q << " bound " << rb << " > ring " << q - 1
           << " bound " << prev_ring << ")";
        throw NumericalError(os.str());
      }
      prev_ring = rb;
      // no point refining the tail once it is already too large
      if (tail > opt_.tail_fraction * std::abs(partial) && q > r + 2) break;
    }
    if (converged && tail <= opt_.tail_fraction * std::abs(partial)) {
      res.value = partial;
      res.tail_bound = tail;
      res.radius = r;
      return res;
    }
  }
  std::ostringstream os;
  os << "sigma1 series: tail bound still above " << opt_.tail_fraction << " of the partial sum at radius "
     << opt_.max_radius << " (partial " << partial << ")";
  throw NumericalError(os.str());
}

Sigma1Result sigma1_sq(const ModelSpec& spec, const Site& h, double y, const Theta4Provider& provider,
                       const Sigma1Options& opt) {
  Sigma1Series series(spec, h, provider, opt);
  return series.evaluate(y);
}

namespace {

OptimalThreshold golden_search(Sigma1Series& series, double rel_tol) {
  OptimalThreshold out;
  auto f = [&](double log_y) {
    const double y = std::exp(log_y);
    const double v = series(y);
    out.profile.emplace_back(y, v);
    return v;
  };
  const double step = std::log(2.0);
  double a = -step, b = 0.0, c = step;
  double fa = f(a), fb = f(b), fc = f(c);
  int expansions = 0;
  while (!(fb <= fa && fb <= fc)) {
    if (++expansions > 60) {
      std::ostringstream os;
      os << "optimal_y: no bracket found; profile:";
      for (const auto& [y, v] : out.profile) os << " (" << y << ", " << v << ")";
      throw NumericalError(os.str());
    }
    if (fa < fb) {
      c = b, fc = fb;
      b = a, fb = fa;
      a -= step;
      fa = f(a);
    } else {
      a = b, fa = fb;
      b = c, fb = fc;
      c += step;
      fc = f(c);
    }
  }
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - g * (c - a), x2 = a + g * (c - a);
  double f1 = f(x1), f2 = f(x2);
  // |log interval| < rel_tol  <=>  relative width of the y bracket < rel_tol
  while (c - a > rel_tol) {
    if (f1 <= f2) {
      c = x2;
      x2 = x1, f2 = f1;
      x1 = c - g * (c - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2, f1 = f2;
      x2 = a + g * (c - a);
      f2 = f(x2);
    }
  }
  const double best = f1 <= f2 ? x1 : x2;
  out.y_star = std::exp(best);
  out.sigma1_at_star = std::min(f1, f2);
  return out;
}

}  // namespace

OptimalThreshold optimal_y(Sigma1Series& series, double rel_tol) {
  series.fix_radius(std::nullopt);
  const auto first = golden_search(series, rel_tol);
  int radius = 0;
  for (int k = -8; k <= 8; ++k) radius = std::max(radius, series.evaluate(first.y_star * std::pow(2.0, k / 4.0)).radius);
  series.fix_radius(radius);
  auto out = golden_search(series, rel_tol);
  out.profile.insert(out.profile.begin(), first.profile.begin(), first.profile.end());
  return out;
}

OptimalThreshold optimal_y(const ModelSpec& spec, const Site& h, const Theta4Options& t4, const Sigma1Options& opt) {
  Sigma1Series series(spec, h, make_theta4_provider(spec, h, t4), opt);
  return optimal_y(series);
}

// --- plug-in variances ------------------------------------------------------

int default_bandwidth(std::size_t window_size, int dim) {
  return std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(window_size), 1.0 / (2.0 * dim)))));
}

LongRunSums long_run_variance(std::span<const double> field, const LatticeWindow& box, int bandwidth,
                              bool sensitivity) {
  if (!box.is_box()) throw ContractError("long_run_variance: region must be a box");
  if (field.size() != box.size()) throw ContractError("long_run_variance: field/region size mismatch");
  const int dim = box.dim();
  const double n = static_cast<double>(field.size());
  double mean = 0.0;
  for (double v : field) mean += v;
  mean /= n;
  std::vector<double> c(field.begin(), field.end());
  for (auto& v : c) v -= mean;

  std::array<int, kMaxDim> ext{};
  std::array<std::int64_t, kMaxDim> stride{};
  std::int64_t s = 1;
  for (int i = dim - 1; i >= 0; --i) {
    ext[static_cast<std::size_t>(i)] = box.upper()[i] - box.lower()[i] + 1;
    stride[static_cast<std::size_t>(i)] = s;
    s *= ext[static_cast<std::size_t>(i)];
  }
  const int half_l = bandwidth / 2;
  const int max_l = sensitivity ? 2 * bandwidth : bandwidth;
  LongRunSums out;
  // lags t with t >= -t lexicographically; t != 0 counted twice
  Site t = Site::zero(dim);
  for (int i = 0; i < dim; ++i) t[i] = -max_l;
  for (;;) {
    const Site neg = -t;
    if (t >= neg) {
      std::array<int, kMaxDim> lo{}, hi{};
      bool empty = false;
      std::int64_t offset = 0;
      for (int i = 0; i < dim; ++i) {
        const auto a = static_cast<std::size_t>(i);
        lo[a] = std::max(0, -t[i]);
        hi[a] = std::min(ext[a], ext[a] - t[i]);
        if (lo[a] >= hi[a]) empty = true;
        offset += static_cast<std::int64_t>(t[i]) * stride[a];
      }
      double acc = 0.0;
      if (!empty) {
        std::array<int, kMaxDim> idx = lo;
        for (;;) {
          std::int64_t base = 0;
          for (int i = 0; i < dim - 1; ++i) base += static_cast<std::int64_t>(idx[static_cast<std::size_t>(i)]) * stride[static_cast<std::size_t>(i)];
          const auto last = static_cast<std::size_t>(dim - 1);
          const double* p = c.data() + base;
          const double* q = c.data() + base + offset;
          for (int k = lo[last]; k < hi[last]; ++k) acc += p[k] * q[k];
          int i = dim - 2;
          while (i >= 0 && idx[static_cast<std::size_t>(i)] == hi[static_cast<std::size_t>(i)] - 1) {
            idx[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
            --i;
          }
          if (i < 0) break;
          ++idx[static_cast<std::size_t>(i)];
        }
      }
      const double gamma = acc / n * (t == neg ? 1.0 : 2.0);
      const int norm = t.sup_norm();
      if (norm <= half_l) out.half += gamma;
      if (norm <= bandwidth) out.full += gamma;
      if (norm <= 2 * bandwidth) out.twice += gamma;
    }
    int i = dim - 1;
    while (i >= 0 && t[i] == max_l) {
      t[i] = -max_l;
      --i;
    }
    if (i < 0) break;
    ++t[i];
  }
  if (!sensitivity) out.twice = 0.0;
  return out;
}

PluginVariance sigma_plugin(std::span<const FieldSample> samples, const LatticeWindow& region, const Site& h,
                            EstimatorTag tag, int bandwidth, double y, bool sensitivity) {
  if (samples.empty()) throw ContractError("sigma_plugin: no samples");
  if (!region.is_box()) throw ContractError("sigma_plugin: region must be a box");
  PluginVariance out;
  out.bandwidth = bandwidth > 0 ? bandwidth : default_bandwidth(region.size(), region.dim());
  for (int i = 0; i < region.dim(); ++i) {
    if (out.bandwidth >= region.upper()[i] - region.lower()[i] + 1) {
      throw ContractError("sigma_plugin: bandwidth must be smaller than the window side");
    }
  }
  LongRunSums acc;
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> x(region.size());
  for (const auto& sample : samples) {
    const auto pairs = lag_pairs(sample, region, h);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double a = sample.values[pairs.first[i]], b = sample.values[pairs.second[i]];
      switch (tag) {
        case EstimatorTag::kTheta1: x[i] = (a <= y && b <= y) ? 1.0 : 0.0; break;
        case EstimatorTag::kTheta2: x[i] = std::min(1.0 / a, 1.0 / b); break;
        case EstimatorTag::kTheta3: x[i] = 0.5 * std::abs(frechet_cdf(a) - frechet_cdf(b)); break;
      }
      total += x[i];
    }
    count += pairs.size();
    const auto lr = long_run_variance(x, region, out.bandwidth, sensitivity);
    acc.half += lr.half;
    acc.full += lr.full;
    acc.twice += lr.twice;
  }
  const double k = static_cast<double>(samples.size());
  const double mean = total / static_cast<double>(count);
  double scale = 1.0;
  switch (tag) {
    case EstimatorTag::kTheta1:
      if (mean == 0.0) throw NumericalError("sigma_plugin: p_hat = 0 at this threshold; raise y");
      out.theta_hat = -y * std::log(mean);
      scale = y * y / (mean * mean);
      break;
    case EstimatorTag::kTheta2:
      out.theta_hat = 1.0 / mean;
      scale = std::pow(out.theta_hat, 4);
      break;
    case EstimatorTag::kTheta3:
      out.theta_hat = (1.0 + 2.0 * mean) / (1.0 - 2.0 * mean);
      scale = std::pow(out.theta_hat + 1.0, 4);
      break;
  }
  out.value = scale * acc.full / k;
  out.at_half = scale * acc.half / k;
  out.at_double = sensitivity ? scale * acc.twice / k : 0.0;
  if (out.value < 0.0) {
    out.value = 0.0;
    out.floored = true;
  }
  return out;
}

PluginVariance sigma23_plugin(std::span<const FieldSample> samples, const LatticeWindow& region, const Site& h,
                              EstimatorTag tag, int bandwidth, bool sensitivity) {
  if (tag == EstimatorTag::kTheta1) throw ContractError("sigma23_plugin: use sigma_plugin for theta1");
  return sigma_plugin(samples, region, h, tag, bandwidth, 1.0, sensitivity);
}

}  // namespace maxstable
