// Acceptance run: one PASS/FAIL line per criterion, exit code 4 on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "maxstable/commands.hpp"
#include "maxstable/config.hpp"
#include "maxstable/errors.hpp"
#include "maxstable/estimators.hpp"
#include "maxstable/field.hpp"
#include "maxstable/io.hpp"
#include "maxstable/mixing.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/pointprocess.hpp"
#include "maxstable/stats.hpp"
#include "maxstable/theta.hpp"

using namespace maxstable;
namespace fs = std::filesystem;

namespace {

int g_workers = 1;
const fs::path g_scratch = fs::temp_directory_path() / "maxstable_acceptance";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ModelSpec compact_mm(int dim = 2) { return ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(dim, 1.0, 2.0)); }

ModelSpec br(double scale, double exponent) {
  return ModelSpec::brown_resnick(2, VariogramSpec::power(scale, exponent));
}

// Field values on `window` for `count` replicates (replicate r uses stream r).
std::vector<FieldSample> replicate_fields(const ModelSpec& spec, const LatticeWindow& window, std::size_t count,
                                          std::uint64_t seed, const TruncationPolicy& trunc = {}) {
  FieldSimulator sim(spec, window, trunc);
  return parallel_replicates(count, g_workers, [&](std::size_t r) {
    Rng rng = Rng::for_stream(seed, streams::kReplicate, r);
    return sim.sample(rng);
  });
}

RatioEstimate theta_mc(const std::vector<FieldSample>& fields, std::span<const std::size_t> idx) {
  std::vector<double> inv;
  inv.reserve(fields.size());
  for (const auto& f : fields) {
    double m = 0.0;
    for (auto i : idx) m = std::max(m, f.values[i]);
    inv.push_back(1.0 / m);
  }
  return theta_from_inverse_maxima(inv);
}

Outcome marginal_law() {
  struct Family {
    std::string name;
    ModelSpec spec;
  };
  const std::vector<Family> families{
      {"brown-resnick", br(1.0, 1.0)},
      {"brown-resnick-smooth", br(2.0, 1.8)},
      {"mm-gaussian", ModelSpec::moving_maximum(KernelSpec::gaussian(2, 1.0))},
      {"mm-truncated-gaussian", compact_mm()},
      {"mm-indicator-box", ModelSpec::moving_maximum(KernelSpec::indicator_box(2, 1.0))},
  };
  const auto window = LatticeWindow::centered_cube(2, 3);
  const auto centre = *window.index_of(Site{0, 0});
  Outcome out{true, ""};
  double worst = 0.0;
  for (const auto& fam : families) {
    const auto fields = replicate_fields(fam.spec, window, 10000, 101);
    std::vector<double> x;
    for (const auto& f : fields) x.push_back(f.values[centre]);
    const double ks = ks_statistic(x, frechet_cdf);
    worst = std::max(worst, ks);
    out.pass = out.pass && ks < 0.02;
    out.detail += fam.name + " ks=" + fmt("%.4f", ks) + " ";
  }
  out.detail += "(max " + fmt("%.4f", worst) + ", limit 0.02)";
  return out;
}

Outcome theta_agreement() {
  Outcome out{true, ""};
  // Brown-Resnick pairs against 2 Psi(sqrt(V(h)) / 2)
  const auto spec = br(1.0, 1.0);
  const std::vector<Site> lags{{1, 0}, {0, 2}, {1, 1}, {3, 1}, {5, 0}};
  std::vector<Site> sites{Site{0, 0}};
  sites.insert(sites.end(), lags.begin(), lags.end());
  const auto window = LatticeWindow::from_sites(2, sites);
  const auto fields = replicate_fields(spec, window, 10000, 202);
  double worst = 0.0;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const std::size_t idx[] = {0, k + 1};
    const auto mc = theta_mc(fields, idx);
    const double exact = theta_pair_br(spec.variogram(), lags[k]).value;
    const double z = std::abs(mc.value - exact) / mc.std_error;
    worst = std::max(worst, z);
    out.pass = out.pass && z <= 3.0;
  }
  out.detail = "br max |z|=" + fmt("%.2f", worst);

  // moving maximum: quadrature against simulation
  const auto mm = compact_mm();
  const std::vector<Site> mm_lags{{1, 0}, {1, 1}, {2, 0}, {2, 1}, {3, 0}};
  std::vector<Site> mm_sites{Site{0, 0}};
  mm_sites.insert(mm_sites.end(), mm_lags.begin(), mm_lags.end());
  mm_sites.push_back(Site{0, 1});
  mm_sites.push_back(Site{-1, 2});
  const auto mm_window = LatticeWindow::from_sites(2, mm_sites);
  const auto mm_fields = replicate_fields(mm, mm_window, 10000, 203);
  double mm_worst = 0.0;
  auto compare = [&](std::span<const Site> set) {
    std::vector<std::size_t> idx;
    for (const auto& s : set) idx.push_back(*mm_window.index_of(s));
    const auto mc = theta_mc(mm_fields, idx);
    const auto q = theta_set_mm(mm.kernel(), set);
    const double z = std::abs(mc.value - q.value) / std::hypot(mc.std_error, q.error);
    mm_worst = std::max(mm_worst, z);
    out.pass = out.pass && z <= 3.0;
  };
  for (const auto& h : mm_lags) {
    const std::vector<Site> pair{Site{0, 0}, h};
    compare(pair);
  }
  const std::vector<Site> four{{0, 0}, {1, 0}, {0, 1}, {-1, 2}};
  compare(four);
  out.detail += ", mm max |z|=" + fmt("%.2f", mm_worst) + " (5 lags + 4-point set, limit 3)";
  return out;
}

ExperimentConfig compact_config() {
  auto c = parse_config(R"(model = moving-maximum
dim = 2
kernel.family = truncated-gaussian
kernel.bandwidth = 1
kernel.radius = 2
lags = 1,0
thresholds = 1
estimators = 1, 2, 3
trunc.max_atoms = 5000000
)");
  c.workers = g_workers;
  return c;
}

Outcome estimator_consistency() {
  auto c = compact_config();
  c.window_sizes = {32, 64, 128};
  c.replicates = 200;
  c.seed = 303;
  c.out = (g_scratch / "consistency").string();
  const auto r = cmd_estimate(c, false);
  Outcome out{true, ""};
  for (int e = 1; e <= 3; ++e) {
    std::vector<double> x, y;
    for (const auto& a : r.aggregate) {
      if (static_cast<int>(a.estimator) != e) continue;
      x.push_back(std::log(static_cast<double>(a.window_size) * a.window_size));
      y.push_back(std::log(a.rmse));
    }
    const auto fit = least_squares(x, y);
    const bool ok = x.size() == 3 && fit.slope >= -0.6 && fit.slope <= -0.4;
    out.pass = out.pass && ok;
    out.detail += "theta" + std::to_string(e) + " slope=" + fmt("%.3f", fit.slope) + " ";
  }
  out.detail += "(band [-0.6, -0.4], n = 32, 64, 128, M = 200)";
  return out;
}

Outcome asymptotic_normality() {
  auto c = compact_config();
  c.window_sizes = {200};
  c.replicates = 500;
  c.seed = 404;
  c.bandwidth = 14;
  c.out = (g_scratch / "normality").string();
  const auto r = cmd_clt_verify(c, false);
  Outcome out{!r.verdicts.empty(), ""};
  for (const auto& v : r.verdicts) {
    out.pass = out.pass && v.pass;
    out.detail += v.label + " ratio=" + fmt("%.3f", v.variance_ratio) + " ks_p=" + fmt("%.3f", v.ks_pvalue) + " ";
  }
  out.detail += "control(x2) " + std::string(r.control.pass ? "PASS" : "FAIL") + " (n = 200, M = 500)";
  return out;
}

Outcome optimal_threshold() {
  auto c = parse_config("model = brown-resnick\ndim = 2\nvariogram.family = power\nvariogram.scale = 0.5\n"
                        "variogram.exponent = 1.5\nlags = 1,0\n");
  c.workers = g_workers;
  c.out = (g_scratch / "variance_opt").string();
  c.theta4_draws = 200000;
  const auto a = cmd_variance_opt(c, false);
  c.theta4_draws = 400000;
  const auto b = cmd_variance_opt(c, false);
  Outcome out{true, ""};
  bool convex = true;
  const auto& g = a.grid;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double left = (g[i].second - g[i - 1].second) / (g[i].first - g[i - 1].first);
    const double right = (g[i + 1].second - g[i].second) / (g[i + 1].first - g[i].first);
    convex = convex && right > left;
  }
  const auto argmin = std::min_element(g.begin(), g.end(), [](auto& p, auto& q) { return p.second < q.second; });
  const bool interior = argmin != g.begin() && argmin + 1 != g.end();
  const double shift = std::abs(b.optimum.y_star - a.optimum.y_star) / a.optimum.y_star;
  out.pass = convex && interior && shift <= 0.05;
  out.detail = std::string("convex=") + (convex ? "yes" : "no") + " interior=" + (interior ? "yes" : "no") +
               " y*=" + fmt("%.4f", a.optimum.y_star) + " y*(2x draws)=" + fmt("%.4f", b.optimum.y_star) +
               " shift=" + fmt("%.4f", shift) + " (limit 0.05)";
  return out;
}

Outcome mixing_structure() {
  Outcome out{true, ""};
  Rng rng(505);
  CompactBoundOptions opt;
  opt.workers = g_workers;
  // beyond the diameter
  const auto mm = compact_mm();
  bool zero = true;
  for (int m = 4; m <= 8; ++m) {
    const std::vector<Site> a{{0, 0}}, b{{m, 0}}, c{{m, m - 2}, {m + 1, 0}};
    const std::vector<Site> blk{{0, 0}, {0, 1}, {-1, 0}};
    zero = zero && beta_bound_countable(mm, a, b).beta == 0.0 && beta_bound_countable(mm, blk, c).beta == 0.0;
  }
  // singleton specialization
  double worst_rel = 0.0;
  bool halves = true;
  for (const auto& spec : {mm, br(1.0, 1.0), br(0.5, 1.5), ModelSpec::moving_maximum(KernelSpec::gaussian(2, 1.0))}) {
    for (int m = 1; m <= 6; ++m) {
      const std::vector<Site> a{{0, 0}}, b{{m, m / 2}};
      const auto cor = beta_bound_countable(spec, a, b);
      const auto thm = beta_bound_compact(spec, a, b, rng, opt);
      const double scale = std::max(cor.beta, 1e-300);
      worst_rel = std::max(worst_rel, std::abs(thm.beta - cor.beta) / scale);
      halves = halves && cor.alpha == cor.beta / 2.0 && thm.alpha == thm.beta / 2.0;
    }
  }
  const std::vector<std::vector<Site>> f1{{{0, 0}, {0, 1}}, {{0, 3}}};
  const std::vector<std::vector<Site>> f2{{{2, 0}}, {{2, 2}, {3, 2}}};
  opt.n_draws = 5000;
  opt.theta_draws = 50000;
  const auto fam = beta_bound_family(mm, f1, f2, rng, opt);
  halves = halves && fam.alpha == fam.beta / 2.0;
  const bool exact = worst_rel <= 1e-12;
  out.pass = zero && exact && halves;
  out.detail = std::string("zero beyond diameter=") + (zero ? "yes" : "no") +
               " singleton max rel diff=" + fmt("%.2e", worst_rel) + " alpha=beta/2=" + (halves ? "yes" : "no");
  return out;
}

Outcome shared_extremal_ordering() {
  struct Case {
    std::string name;
    ModelSpec spec;
    std::vector<Site> s1, s2;
  };
  const std::vector<Case> cases{
      {"truncated-gaussian", compact_mm(), {{0, 0}}, {{1, 0}}},
      {"gaussian-1d", ModelSpec::moving_maximum(KernelSpec::gaussian(1, 1.0)), {{0}, {1}}, {{3}}},
      {"indicator-box", ModelSpec::moving_maximum(KernelSpec::indicator_box(2, 1.0)), {{0, 0}}, {{1, 1}, {2, 0}}},
  };
  Outcome out{true, ""};
  Rng rng(606);
  for (const auto& c : cases) {
    const auto p = mc_shared_extremal_prob(c.spec, c.s1, c.s2, 20000, rng, g_workers);
    SlyvniakOptions so;
    so.workers = g_workers;
    const auto integral = slyvniak_integral(c.spec, c.s1, c.s2, rng, so);
    const double slack = 3.0 * std::hypot(p.std_error, integral.error);
    const bool ok = p.value <= integral.value + slack;
    out.pass = out.pass && ok;
    out.detail += c.name + " p=" + fmt("%.4f", p.value) + " I=" + fmt("%.4f", integral.value) + " ";
  }
  out.detail += "(p <= I + 3 se)";
  return out;
}

Outcome coupling_exactness() {
  Rng rng(707);
  const auto window = LatticeWindow::cube(2, 5);
  const std::vector<Site> s1{{2, 2}, {2, 3}};
  ConditionalLawOptions opt;
  opt.replicates = 4000;
  opt.workers = g_workers;
  const auto r = conditional_law_check(compact_mm(), window, s1, rng, opt);
  Outcome out;
  out.pass = r.replicates >= 1000 && r.bit_exact_failures == 0 && r.ks_marginal < 0.05 && r.ks_counts < 0.05;
  out.detail = "bit-exact failures=" + std::to_string(r.bit_exact_failures) + "/" + std::to_string(r.replicates) +
               " ks marginal=" + fmt("%.4f", r.ks_marginal) + " ks counts=" + fmt("%.4f", r.ks_counts) +
               " (limit 0.05)";
  return out;
}

Outcome clt_checker() {
  const auto ladder = geometric_ladder(1024);
  const auto compact = clt_condition_check(compact_mm(), 1.0, 2, ladder);
  const auto brown = clt_condition_check(br(1.0, 1.0), 1.0, 2, ladder);
  const double b0 = 4.0;  // threshold 2 max(2, 3) = 6
  const auto synthetic =
      clt_condition_check([b0](int r) { return std::pow(static_cast<double>(r), -b0); }, "|h|^-4", 1.0, 2, ladder);
  Outcome out;
  out.pass = compact.pass && brown.pass && !synthetic.pass;
  out.detail = std::string("compact=") + (compact.pass ? "PASS" : "FAIL") + " brown-resnick=" +
               (brown.pass ? "PASS" : "FAIL") + " |h|^-4=" + (synthetic.pass ? "PASS" : "FAIL") +
               " (b fitted " + fmt("%.3f", synthetic.b) + " vs threshold " + fmt("%.1f", synthetic.threshold) + ")";
  return out;
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) return false;
  }
  for (const auto& p : rel) {
    if (!fs::exists(b / p) || read_file(a / p) != read_file(b / p)) return false;
    ++files;
  }
  return !rel.empty();
}

Outcome determinism() {
  Outcome out{true, ""};
  std::size_t files = 0;
  for (const std::string model : {"brown-resnick", "moving-maximum"}) {
    auto c = parse_config("replicates = 24\nseed = 808\n");
    c.model = model;
    c.window_sizes = model == "brown-resnick" ? std::vector<int>{6, 8} : std::vector<int>{16, 24};
    for (const std::string fmt_name : {"csv", "json"}) {
      c.format = fmt_name;
      const auto d1 = g_scratch / ("det_" + model + "_" + fmt_name + "_w1");
      const auto d8 = g_scratch / ("det_" + model + "_" + fmt_name + "_w8");
      fs::remove_all(d1);
      fs::remove_all(d8);
      c.workers = 1;
      c.out = (d1 / "simulate").string();
      (void)cmd_simulate(c);
      c.out = (d1 / "estimate").string();
      (void)cmd_estimate(c);
      c.workers = 8;
      c.out = (d8 / "simulate").string();
      (void)cmd_simulate(c);
      c.out = (d8 / "estimate").string();
      (void)cmd_estimate(c);
      out.pass = out.pass && same_tree(d1, d8, files);
    }
  }
  out.detail = std::to_string(files) + " files compared between 1 and 8 workers";
  return out;
}

}  // namespace

int main() {
  g_workers = resolve_workers(0);
  fs::remove_all(g_scratch);
  ensure_directory(g_scratch);
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "marginal law", marginal_law},
      {2, "theta oracle agreement", theta_agreement},
      {3, "estimator consistency", estimator_consistency},
      {4, "asymptotic normality", asymptotic_normality},
      {5, "optimal threshold", optimal_threshold},
      {6, "mixing-bound structure", mixing_structure},
      {7, "shared-extremal ordering", shared_extremal_ordering},
      {8, "coupling exactness", coupling_exactness},
      {9, "CLT condition checker", clt_checker},
      {10, "determinism", determinism},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && o.pass;
    std::printf("criterion %2d %-26s %s  %s [%.1fs]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  fs::remove_all(g_scratch);
  return all ? 0 : static_cast<int>(ExitCode::kAcceptanceFailure);
}
