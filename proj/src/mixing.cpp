#include "maxstable/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "maxstable/errors.hpp"
#include "maxstable/stats.hpp"
#include "maxstable/theta.hpp"

namespace maxstable {

std::string bound_family_name(BoundFamily f) {
  switch (f) {
    case BoundFamily::kCor2Countable: return "cor2-countable";
    case BoundFamily::kThm2Compact: return "thm2-compact";
    case BoundFamily::kThm2Family: return "thm2-family";
  }
  return "?";
}

std::string set_descriptor(std::span<const Site> sites) {
  std::string out = "{";
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (i > 0) out += ";";
    out += sites[i].to_string();
  }
  return out + "}";
}

namespace {

void require_disjoint(std::span<const Site> s1, std::span<const Site> s2, const char* op) {
  if (s1.empty() || s2.empty()) throw ContractError(std::string(op) + ": empty site set");
  std::unordered_set<Site, SiteHash> seen(s1.begin(), s1.end());
  for (const auto& s : s2) {
    if (seen.count(s)) throw ContractError(std::string(op) + ": sets overlap at " + s.to_string());
  }
}

std::vector<Site> set_union(std::span<const Site> a, std::span<const Site> b) {
  std::vector<Site> u(a.begin(), a.end());
  u.insert(u.end(), b.begin(), b.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

ThetaValue pair_theta_direct(const ModelSpec& spec, const Site& h) {
  return spec.is_brown_resnick() ? theta_pair_br(spec.variogram(), h) : theta_pair_mm(spec.kernel(), h);
}

// Sites at sup distance >= diameter have disjoint kernel supports.
bool beyond_support(const ModelSpec& spec, int r) {
  return spec.is_moving_maximum() && spec.kernel().compact() && r >= spec.kernel().diameter();
}

struct Block {
  McEstimate c;
  ThetaValue theta;
};

Block block_terms(const ModelSpec& spec, std::span<const Site> s, Rng& rng, const CompactBoundOptions& opt) {
  SetThetaOptions so;
  so.mc_draws = opt.theta_draws;
  Block b;
  b.c = capital_C(spec, s, opt.n_draws, rng, opt.truncation, opt.workers);
  b.theta = theta_set(spec, s, rng, so);
  return b;
}

double mc_part(const ThetaValue& t) { return t.method == ThetaValue::Method::kMonteCarlo ? t.error : 0.0; }

struct PairBound {
  double value = 0.0;
  double error = 0.0;
  double mc_error = 0.0;
  ThetaValue joint;
};

PairBound compact_term(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2, const Block& b1,
                       const Block& b2, Rng& rng, const CompactBoundOptions& opt) {
  PairBound out;
  if (beyond_support(spec, set_distance(s1, s2))) {
    // no atom reaches both sets: theta is additive
    out.joint = ThetaValue{b1.theta.value + b2.theta.value, ThetaValue::Method::kClosedForm,
                           b1.theta.error + b2.theta.error};
  } else {
    SetThetaOptions so;
    so.mc_draws = opt.theta_draws;
    const auto u = set_union(s1, s2);
    out.joint = theta_set(spec, u, rng, so);
  }
  const double csum = b1.c.value + b2.c.value;
  const double bracket = b1.theta.value + b2.theta.value - out.joint.value;
  out.value = 2.0 * csum * std::max(bracket, 0.0);
  const double c_err2 = b1.c.std_error * b1.c.std_error + b2.c.std_error * b2.c.std_error;
  const double t_err2 =
      b1.theta.error * b1.theta.error + b2.theta.error * b2.theta.error + out.joint.error * out.joint.error;
  const double t_mc2 = mc_part(b1.theta) * mc_part(b1.theta) + mc_part(b2.theta) * mc_part(b2.theta) +
                       mc_part(out.joint) * mc_part(out.joint);
  out.error = 2.0 * std::sqrt(c_err2 * bracket * bracket + csum * csum * t_err2);
  out.mc_error = 2.0 * std::sqrt(c_err2 * bracket * bracket + csum * csum * t_mc2);
  return out;
}

}  // namespace

MixingBoundReport beta_bound_countable(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2) {
  require_disjoint(s1, s2, "beta_bound_countable");
  MixingBoundReport r;
  r.s1 = set_descriptor(s1);
  r.s2 = set_descriptor(s2);
  r.family = BoundFamily::kCor2Countable;
  PairTheta pair(spec);
  double sum = 0.0;
  for (const auto& a : s1) {
    for (const auto& b : s2) {
      const auto t = pair(b - a);
      r.components.push_back({"theta(" + a.to_string() + "," + b.to_string() + ")", t.value, t.error});
      sum += std::max(0.0, 2.0 - t.value);
    }
  }
  r.beta = 4.0 * sum;
  r.alpha = r.beta / 2.0;
  return r;
}

MixingBoundReport beta_bound_compact(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2,
                                     Rng& rng, const CompactBoundOptions& opt) {
  require_disjoint(s1, s2, "beta_bound_compact");
  MixingBoundReport r;
  r.s1 = set_descriptor(s1);
  r.s2 = set_descriptor(s2);
  r.family = BoundFamily::kThm2Compact;
  const auto b1 = block_terms(spec, s1, rng, opt);
  const auto b2 = block_terms(spec, s2, rng, opt);
  const auto term = compact_term(spec, s1, s2, b1, b2, rng, opt);
  r.components = {{"C(S1)", b1.c.value, b1.c.std_error},
                  {"C(S2)", b2.c.value, b2.c.std_error},
                  {"theta(S1)", b1.theta.value, b1.theta.error},
                  {"theta(S2)", b2.theta.value, b2.theta.error},
                  {"theta(S1uS2)", term.joint.value, term.joint.error}};
  r.beta = term.value;
  r.alpha = r.beta / 2.0;
  r.mc_error = term.mc_error;
  r.mc_warning = term.mc_error > 0.1 * r.beta && term.mc_error > 0.0;
  return r;
}

MixingBoundReport beta_bound_family(const ModelSpec& spec, std::span<const std::vector<Site>> s1_blocks,
                                    std::span<const std::vector<Site>> s2_blocks, Rng& rng,
                                    const CompactBoundOptions& opt) {
  if (s1_blocks.empty() || s2_blocks.empty()) throw ContractError("beta_bound_family: empty family");
  std::vector<Site> all1, all2;
  for (const auto& b : s1_blocks) all1.insert(all1.end(), b.begin(), b.end());
  for (const auto& b : s2_blocks) all2.insert(all2.end(), b.begin(), b.end());
  require_disjoint(all1, all2, "beta_bound_family");
  MixingBoundReport r;
  r.s1 = set_descriptor(all1);
  r.s2 = set_descriptor(all2);
  r.family = BoundFamily::kThm2Family;
  std::vector<Block> t1, t2;
  for (std::size_t i = 0; i < s1_blocks.size(); ++i) {
    t1.push_back(block_terms(spec, s1_blocks[i], rng, opt));
    r.components.push_back({"C(S1_" + std::to_string(i) + ")", t1.back().c.value, t1.back().c.std_error});
    r.components.push_back({"theta(S1_" + std::to_string(i) + ")", t1.back().theta.value, t1.back().theta.error});
  }
  for (std::size_t j = 0; j < s2_blocks.size(); ++j) {
    t2.push_back(block_terms(spec, s2_blocks[j], rng, opt));
    r.components.push_back({"C(S2_" + std::to_string(j) + ")", t2.back().c.value, t2.back().c.std_error});
    r.components.push_back({"theta(S2_" + std::to_string(j) + ")", t2.back().theta.value, t2.back().theta.error});
  }
  double mc2 = 0.0;
  for (std::size_t i = 0; i < s1_blocks.size(); ++i) {
    for (std::size_t j = 0; j < s2_blocks.size(); ++j) {
      const auto term = compact_term(spec, s1_blocks[i], s2_blocks[j], t1[i], t2[j], rng, opt);
      r.components.push_back({"theta(S1_" + std::to_string(i) + "uS2_" + std::to_string(j) + ")", term.joint.value,
                              term.joint.error});
      r.beta += term.value;
      mc2 += term.mc_error * term.mc_error;
    }
  }
  r.alpha = r.beta / 2.0;
  r.mc_error = std::sqrt(mc2);
  r.mc_warning = r.mc_error > 0.1 * r.beta && r.mc_error > 0.0;
  return r;
}

double gamma_bound(const ModelSpec& spec, const Site& h) {
  return std::max(0.0, 2.0 * (2.0 - pair_theta_direct(spec, h).value));
}

double ring_sup_gamma(const ModelSpec& spec, int r) {
  if (r < 0) throw ContractError("ring_sup_gamma: negative radius");
  if (beyond_support(spec, r)) return 0.0;
  // Isotropic in |h|_2 and nonincreasing: the sup over a sup-norm sphere
  // sits on an axis.
  if (spec.is_brown_resnick() || spec.kernel().family() == KernelSpec::Family::kGaussian) {
    return gamma_bound(spec, Site::axis(spec.dim(), 0, r));
  }
  double best = 0.0;
  for (const auto& h : sup_sphere(spec.dim(), r)) best = std::max(best, gamma_bound(spec, h));
  return best;
}

std::vector<int> geometric_ladder(int max_radius, double ratio) {
  if (max_radius < 1 || !(ratio > 1.0)) throw ContractError("geometric_ladder: need max_radius >= 1, ratio > 1");
  std::vector<int> out;
  double r = 1.0;
  while (static_cast<int>(std::lround(r)) <= max_radius) {
    const int v = static_cast<int>(std::lround(r));
    if (out.empty() || v != out.back()) out.push_back(v);
    r *= ratio;
  }
  return out;
}

CltConditionReport clt_condition_check(const std::function<double(int)>& ring_gamma, const std::string& label,
                                       double delta, int d, std::span<const int> fit_range) {
  if (!(delta > 0.0)) throw ContractError("clt_condition_check: delta must be positive");
  if (d < 1 || d > kMaxDim) throw ContractError("clt_condition_check: bad dimension");
  if (fit_range.size() < 3) throw ContractError("clt_condition_check: fit_range needs at least 3 radii");
  for (std::size_t i = 0; i < fit_range.size(); ++i) {
    if (fit_range[i] < 1 || (i > 0 && fit_range[i] <= fit_range[i - 1])) {
      throw ContractError("clt_condition_check: fit_range must be ascending radii >= 1");
    }
  }
  CltConditionReport rep;
  rep.model = label;
  rep.delta = delta;
  rep.dim = d;
  rep.threshold = d * std::max(2.0, (2.0 + delta) / delta);
  rep.radii.assign(fit_range.begin(), fit_range.end());
  for (int r : rep.radii) rep.gamma_sup.push_back(std::max(0.0, ring_gamma(r)));

  // sup over |h| >= m, approximated on the ladder
  const std::size_t n = rep.radii.size();
  std::vector<double> tail_sup(n);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    running = std::max(running, rep.gamma_sup[i]);
    tail_sup[i] = running;
  }
  const double p = delta / (2.0 + delta);
  double series = 0.0;
  double tail = 0.0;
  rep.tail_ratio.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    const int lo = rep.radii[i];
    const int hi = i + 1 < n ? rep.radii[i + 1] : lo + 1;
    // rings lo .. hi-1 carry at most the value at lo
    for (int r = lo; r < hi; ++r) tail += static_cast<double>(sup_sphere_count(d, r)) * rep.gamma_sup[i];
    rep.tail_ratio[i] = tail / std::pow(static_cast<double>(lo), d - 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int lo = rep.radii[i];
    const int hi = i + 1 < n ? rep.radii[i + 1] : lo + 1;
    for (int m = lo; m < hi; ++m) series += std::pow(static_cast<double>(m), d - 1) * std::pow(tail_sup[i], p);
    rep.series_partial.push_back(series);
  }

  // vanishing tail
  std::size_t last_positive = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (rep.gamma_sup[i] > 0.0) last_positive = i;
  }
  if (last_positive == n || last_positive + 1 < n) {
    rep.vanishes = true;
    rep.zero_radius = last_positive == n ? rep.radii.front() : rep.radii[last_positive + 1];
    rep.b = std::numeric_limits<double>::infinity();
    rep.pass = true;
    std::ostringstream os;
    os << "gamma bound is 0 for |h| >= " << rep.zero_radius << "; both conditions hold trivially";
    rep.reason = os.str();
    return rep;
  }

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n; ++i) {
    lx.push_back(std::log(static_cast<double>(rep.radii[i])));
    ly.push_back(std::log(rep.gamma_sup[i]));
  }
  for (std::size_t i = 1; i < n; ++i) rep.local_slopes.push_back((ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]));

  // super-polynomial: local slopes steepen monotonically and markedly
  const auto& s = rep.local_slopes;
  bool steepening = s.size() >= 3;
  for (std::size_t i = 1; i < s.size() && steepening; ++i) steepening = s[i] < s[i - 1];
  if (steepening && s.back() < 1.5 * s.front() && s.front() < 0.0) {
    rep.super_polynomial = true;
    rep.b = std::numeric_limits<double>::infinity();
    rep.pass = true;
    std::ostringstream os;
    os << "local log-log slopes steepen from " << s.front() << " to " << s.back()
       << ": decay faster than any power, b = inf > " << rep.threshold;
    rep.reason = os.str();
    return rep;
  }

  // largest decade of the range
  const double top = lx.back();
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < n; ++i) {
    if (lx[i] >= top - std::log(10.0)) {
      fx.push_back(lx[i]);
      fy.push_back(ly[i]);
    }
  }
  if (fx.size() < 2) {
    fx.assign(lx.end() - 2, lx.end());
    fy.assign(ly.end() - 2, ly.end());
  }
  const auto fit = least_squares(fx, fy);
  rep.b = -fit.slope;
  rep.b_std_error = fit.slope_std_error;
  rep.pass = rep.b > rep.threshold;
  std::ostringstream os;
  os << "fitted decay exponent b = " << rep.b << " (se " << rep.b_std_error << ") "
     << (rep.pass ? ">" : "<=") << " d max(2, (2+delta)/delta) = " << rep.threshold;
  rep.reason = os.str();
  return rep;
}

CltConditionReport clt_condition_check(const ModelSpec& spec, double delta, int d, std::span<const int> fit_range) {
  if (d != spec.dim()) throw ContractError("clt_condition_check: d differs from the model dimension");
  return clt_condition_check([&spec](int r) { return ring_sup_gamma(spec, r); }, spec.describe(), delta, d,
                             fit_range);
}

std::string CltConditionReport::verdict_block() const {
  std::ostringstream os;
  os << "CLT condition check: " << (pass ? "PASS" : "FAIL") << '\n'
     << "  model      " << model << '\n'
     << "  d, delta   " << dim << ", " << delta << '\n'
     << "  threshold  b > " << threshold << '\n';
  if (vanishes) {
    os << "  decay      gamma = 0 from |h| = " << zero_radius << '\n';
  } else if (super_polynomial) {
    os << "  decay      super-polynomial (b = inf)\n";
  } else {
    os << "  decay      b = " << b << " +- " << b_std_error << '\n';
  }
  os << "  reason     " << reason << '\n';
  os << "  radius  gamma_sup  tail/m^(d-1)  series_partial\n";
  for (std::size_t i = 0; i < radii.size(); ++i) {
    os << "  " << std::setw(6) << radii[i] << "  " << std::setw(10) << std::setprecision(4) << gamma_sup[i] << "  "
       << std::setw(12) << tail_ratio[i] << "  " << std::setw(14) << series_partial[i] << '\n';
  }
  return os.str();
}

namespace {

// sup_{|t| >= m} (2 - theta(t)): exact for compact kernels (finitely many
// nonzero rings), the ring-m value for the radially monotone models.
double tail_sup(const ModelSpec& spec, int m) {
  if (spec.is_moving_maximum() && spec.kernel().compact()) {
    double best = 0.0;
    for (int r = m; !beyond_support(spec, r); ++r) best = std::max(best, ring_sup_gamma(spec, r));
    return best / 2.0;
  }
  return ring_sup_gamma(spec, m) / 2.0;
}

double ring_sum(const ModelSpec& spec, int r) {
  if (beyond_support(spec, r)) return 0.0;
  double s = 0.0;
  for (const auto& t : sup_sphere(spec.dim(), r)) s += gamma_bound(spec, t) / 2.0;
  return s;
}

}  // namespace

double bolthausen_alpha_bound(const ModelSpec& spec, int k, int l, int m) {
  if (k < 1 || (l < 1 && l != kUnboundedSet) || m < 1) {
    throw ContractError("bolthausen_alpha_bound: need k >= 1, l >= 1 or unbounded, m >= 1");
  }
  if (l != kUnboundedSet) return 2.0 * k * l * tail_sup(spec, m);

  constexpr int kExactRings = 256;
  constexpr int kMaxRadius = 1000000;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int r = m; r <= kMaxRadius; ++r) {
    if (beyond_support(spec, r)) return 2.0 * sum;
    // beyond the exact rings, |ring| * ring sup bounds the ring sum
    const double term = r - m < kExactRings
                            ? ring_sum(spec, r)
                            : static_cast<double>(sup_sphere_count(spec.dim(), r)) * tail_sup(spec, r);
    sum += term;
    if (term == 0.0 || (term < 1e-16 * sum && term < prev)) {
      // geometric decay from here on bounds the remainder by term * q / (1 - q)
      const double q = prev > 0.0 && std::isfinite(prev) ? term / prev : 0.0;
      if (q < 1.0) return 2.0 * (sum + (q > 0.0 ? term * q / (1.0 - q) : 0.0));
    }
    prev = term;
  }
  std::ostringstream os;
  os << "bolthausen_alpha_bound: sum of (2 - theta) over |t| >= " << m << " not converged by radius " << kMaxRadius
     << " (partial " << sum << "); tail is not summable at this resolution";
  throw NumericalError(os.str());
}

}  // namespace maxstable
