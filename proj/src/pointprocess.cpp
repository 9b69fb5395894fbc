#include "maxstable/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "maxstable/errors.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/stats.hpp"

namespace maxstable {

double atom_contribution(const ModelSpec& spec, const FieldSample& field, const Atom& atom, std::size_t site_index) {
  if (spec.is_moving_maximum()) return moving_maximum_contribution(spec.kernel(), atom, field.window->site(site_index));
  if (atom.spectral.size() != field.size()) throw ContractError("atom_contribution: spectral/window size mismatch");
  return atom.z * atom.spectral[site_index];
}

namespace {

std::vector<std::size_t> site_indices(const LatticeWindow& w, std::span<const Site> s, const char* op) {
  std::vector<std::size_t> idx;
  idx.reserve(s.size());
  for (const auto& site : s) {
    const auto i = w.index_of(site);
    if (!i) throw ContractError(std::string(op) + ": site " + site.to_string() + " outside the window");
    idx.push_back(*i);
  }
  return idx;
}

std::vector<Site> set_union(std::span<const Site> a, std::span<const Site> b) {
  std::vector<Site> u(a.begin(), a.end());
  u.insert(u.end(), b.begin(), b.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

void require_disjoint(std::span<const Site> s1, std::span<const Site> s2, const char* op) {
  if (s1.empty() || s2.empty()) throw ContractError(std::string(op) + ": empty site set");
  std::unordered_set<Site, SiteHash> seen(s1.begin(), s1.end());
  for (const auto& s : s2) {
    if (seen.count(s)) throw ContractError(std::string(op) + ": sets overlap at " + s.to_string());
  }
}

}  // namespace

ExtremalDecomposition classify_extremal(const ModelSpec& spec, const PointProcessSample& pp, const FieldSample& field,
                                        std::span<const Site> s) {
  if (!field.window) throw ContractError("classify_extremal: field has no window");
  const auto idx = site_indices(*field.window, s, "classify_extremal");
  ExtremalDecomposition out;
  out.sites.assign(s.begin(), s.end());
  std::vector<char> extremal(pp.atoms.size(), 0);
  std::vector<double> best(idx.size(), 0.0);
  std::vector<std::size_t> attaining(idx.size(), 0);
  for (std::size_t a = 0; a < pp.atoms.size(); ++a) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double c = atom_contribution(spec, field, pp.atoms[a], idx[k]);
      const double eta = field.values[idx[k]];
      best[k] = std::max(best[k], c);
      if (c >= eta && c > 0.0) {
        extremal[a] = 1;
        ++attaining[k];
      }
    }
  }
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (best[k] != field.values[idx[k]]) {
      throw ContractError("classify_extremal: atoms do not reproduce the field at " + s[k].to_string());
    }
    if (attaining[k] > 1) ++out.ties;
  }
  for (std::size_t a = 0; a < pp.atoms.size(); ++a) (extremal[a] ? out.extremal : out.subextremal).push_back(a);
  return out;
}

MovingMaximumAtomStream::MovingMaximumAtomStream(const MovingMaximumSimulator& sim, Rng& rng)
    : sim_(&sim), rng_(&rng), points_(rng, sim.box_volume()) {}

Atom MovingMaximumAtomStream::next() {
  Atom atom;
  atom.z = points_.next();
  for (int i = 0; i < sim_->kernel().dim(); ++i) {
    const auto a = static_cast<std::size_t>(i);
    atom.location[a] = rng_->uniform(sim_->box_lower()[a], sim_->box_upper()[a]);
  }
  return atom;
}

CoupledProcess build_coupling(const MovingMaximumSimulator& sim, const PointProcessSample& pp,
                              const FieldSample& field, Rng& copy_rng, std::span<const Site> s1,
                              const CouplingOptions& opt) {
  const auto& window = sim.window();
  if (field.size() != window.size()) throw ContractError("build_coupling: field/simulator window mismatch");
  const ModelSpec spec = ModelSpec::moving_maximum(sim.kernel());
  const auto s1_idx = site_indices(window, s1, "build_coupling");
  const auto dec = classify_extremal(spec, pp, field, s1);
  const std::size_t n = window.size();

  CoupledProcess out;
  out.field.window = field.window;
  out.field.seed = field.seed;
  out.field.model = field.model;
  out.field.values.assign(n, 0.0);
  auto absorb = [&](const Atom& atom, Provenance p) {
    for (std::size_t t = 0; t < n; ++t) {
      out.field.values[t] = std::max(out.field.values[t], atom_contribution(spec, field, atom, t));
    }
    out.atoms.push_back(atom);
    out.provenance.push_back(p);
  };
  for (std::size_t a : dec.extremal) absorb(pp.atoms[a], Provenance::kOriginal);
  out.from_original = dec.extremal.size();

  MovingMaximumAtomStream stream(sim, copy_rng);
  const double f_max = sim.kernel().f_max();
  double min_hat = *std::min_element(out.field.values.begin(), out.field.values.end());
  for (;;) {
    if (out.copy_atoms_drawn == opt.max_copy_atoms) {
      out.field.truncation_bias_flag = true;
      break;
    }
    Atom atom = stream.next();
    ++out.copy_atoms_drawn;
    if (atom.z * f_max < min_hat && !(atom.z > opt.extend_to_z)) break;
    bool below = true;
    for (std::size_t k : s1_idx) {
      if (!(atom_contribution(spec, field, atom, k) < field.values[k])) {
        below = false;
        break;
      }
    }
    if (!below) continue;
    absorb(atom, Provenance::kCopy);
    ++out.from_copy;
    min_hat = *std::min_element(out.field.values.begin(), out.field.values.end());
  }
  out.field.atoms_used = out.atoms.size();
  return out;
}

ProbabilityEstimate mc_shared_extremal_prob(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2,
                                            std::size_t replicates, Rng& rng, int workers) {
  if (!spec.is_moving_maximum()) throw ContractError("mc_shared_extremal_prob: moving-maximum model required");
  require_disjoint(s1, s2, "mc_shared_extremal_prob");
  if (replicates < 1) throw ContractError("mc_shared_extremal_prob: replicates must be >= 1");
  MovingMaximumSimulator sim(spec, std::make_shared<const LatticeWindow>(
                                       LatticeWindow::from_sites(spec.dim(), set_union(s1, s2))));
  const std::uint64_t root = rng.engine()();
  auto outcome = parallel_replicates(replicates, workers, [&](std::size_t r) -> int {
    Rng local = Rng::for_stream(root, streams::kReplicate, r);
    PointProcessSample pp;
    const auto f = sim.sample(local, &pp);
    if (f.truncation_bias_flag) return -1;
    const auto d1 = classify_extremal(spec, pp, f, s1);
    const auto d2 = classify_extremal(spec, pp, f, s2);
    // extremal lists are sorted
    std::vector<std::size_t> shared;
    std::set_intersection(d1.extremal.begin(), d1.extremal.end(), d2.extremal.begin(), d2.extremal.end(),
                          std::back_inserter(shared));
    return shared.empty() ? 0 : 1;
  });
  ProbabilityEstimate p;
  std::size_t hits = 0;
  for (int o : outcome) {
    if (o < 0) {
      ++p.excluded;
      continue;
    }
    ++p.used;
    hits += static_cast<std::size_t>(o);
  }
  if (p.used == 0) throw NumericalError("mc_shared_extremal_prob: every replicate was truncation-flagged");
  p.value = static_cast<double>(hits) / static_cast<double>(p.used);
  p.std_error = std::sqrt(p.value * (1.0 - p.value) / static_cast<double>(p.used));
  return p;
}

SlyvniakResult slyvniak_integral(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2, Rng& rng,
                                 const SlyvniakOptions& opt) {
  if (!spec.is_moving_maximum()) throw ContractError("slyvniak_integral: moving-maximum model required");
  require_disjoint(s1, s2, "slyvniak_integral");
  if (opt.cells_per_unit < 1 || opt.inner_draws < 2) {
    throw ContractError("slyvniak_integral: need cells_per_unit >= 1 and inner_draws >= 2");
  }
  const KernelSpec& kernel = spec.kernel();
  const int dim = spec.dim();
  const double radius = kernel.radius();
  SlyvniakResult res;

  // u must lie within the kernel radius of both sets
  std::array<double, kMaxDim> lo{}, hi{};
  for (int i = 0; i < dim; ++i) {
    auto range = [&](std::span<const Site> s) {
      int a = s[0][i], b = s[0][i];
      for (const auto& x : s) a = std::min(a, x[i]), b = std::max(b, x[i]);
      return std::pair<double, double>(a - radius, b + radius);
    };
    const auto [l1, h1] = range(s1);
    const auto [l2, h2] = range(s2);
    lo[static_cast<std::size_t>(i)] = std::max(l1, l2);
    hi[static_cast<std::size_t>(i)] = std::min(h1, h2);
    if (!(lo[static_cast<std::size_t>(i)] < hi[static_cast<std::size_t>(i)])) return res;
  }

  // fine grid with a multiple of 3 cells per axis so the 3x coarser
  // midpoints are a subset of the fine ones
  std::array<int, kMaxDim> cells{};
  std::array<double, kMaxDim> width{};
  double cell_volume = 1.0;
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) {
    const auto a = static_cast<std::size_t>(i);
    int c = static_cast<int>(std::ceil((hi[a] - lo[a]) * opt.cells_per_unit));
    c = 3 * ((c + 2) / 3);
    cells[a] = c;
    width[a] = (hi[a] - lo[a]) / c;
    cell_volume *= width[a];
    total *= static_cast<std::size_t>(c);
  }
  const auto sites = set_union(s1, s2);
  const auto window = std::make_shared<const LatticeWindow>(LatticeWindow::from_sites(dim, sites));
  const auto idx1 = site_indices(*window, s1, "slyvniak_integral");
  const auto idx2 = site_indices(*window, s2, "slyvniak_integral");

  struct Cell {
    std::vector<double> f;  // kernel value per window site
    bool coarse = false;
  };
  std::vector<Cell> grid;
  std::array<int, kMaxDim> k{};
  std::array<double, kMaxDim> u{};
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    bool coarse = true;
    for (int i = dim - 1; i >= 0; --i) {
      const auto a = static_cast<std::size_t>(i);
      k[a] = static_cast<int>(rem % static_cast<std::size_t>(cells[a]));
      rem /= static_cast<std::size_t>(cells[a]);
      u[a] = lo[a] + (k[a] + 0.5) * width[a];
      coarse = coarse && (k[a] % 3 == 1);
    }
    Cell cell;
    cell.coarse = coarse;
    cell.f.resize(window->size());
    bool any1 = false, any2 = false;
    for (std::size_t t = 0; t < window->size(); ++t) cell.f[t] = kernel.density_at(window->site(t), u);
    for (std::size_t t : idx1) any1 = any1 || cell.f[t] > 0.0;
    for (std::size_t t : idx2) any2 = any2 || cell.f[t] > 0.0;
    if (any1 && any2) grid.push_back(std::move(cell));
  }
  res.cells = total;
  if (grid.empty()) return res;

  MovingMaximumSimulator sim(spec, window);
  const std::uint64_t root = rng.engine()();
  const double coarse_volume = cell_volume * std::pow(3.0, dim);
  auto draws = parallel_replicates(opt.inner_draws, opt.workers, [&](std::size_t r) {
    Rng local = Rng::for_stream(root, streams::kInner, r);
    const auto f = sim.sample(local);
    std::vector<double> inv(f.values.size());
    for (std::size_t t = 0; t < inv.size(); ++t) inv[t] = 1.0 / f.values[t];
    double fine = 0.0, coarse = 0.0;
    for (const auto& cell : grid) {
      double a1 = 0.0, a2 = 0.0;
      for (std::size_t t : idx1) a1 = std::max(a1, cell.f[t] * inv[t]);
      for (std::size_t t : idx2) a2 = std::max(a2, cell.f[t] * inv[t]);
      const double m = std::min(a1, a2);
      fine += m;
      if (cell.coarse) coarse += m;
    }
    return std::pair<double, double>(fine * cell_volume, coarse * coarse_volume);
  });
  std::vector<double> fine(draws.size()), coarse(draws.size());
  for (std::size_t r = 0; r < draws.size(); ++r) fine[r] = draws[r].first, coarse[r] = draws[r].second;
  const auto sf = summarize(fine);
  const auto sc = summarize(coarse);
  res.value = sf.mean;
  res.coarse_value = sc.mean;
  res.mc_error = sf.std_error();
  res.quadrature_error = std::abs(sf.mean - sc.mean) / 8.0;
  res.error = std::hypot(res.mc_error, res.quadrature_error);
  res.mc_warning = res.mc_error > 0.5 * res.value;
  return res;
}

ConditionalLawReport conditional_law_check(const ModelSpec& spec, const LatticeWindow& window, std::span<const Site> s,
                                           Rng& rng, const ConditionalLawOptions& opt) {
  if (!spec.is_moving_maximum()) throw ContractError("conditional_law_check: moving-maximum model required");
  if (opt.replicates < 2) throw ContractError("conditional_law_check: replicates must be >= 2");
  const auto wptr = std::make_shared<const LatticeWindow>(window);
  MovingMaximumSimulator sim(spec, wptr);
  const auto s_idx = site_indices(window, s, "conditional_law_check");
  std::vector<char> in_s(window.size(), 0);
  for (std::size_t i : s_idx) in_s[i] = 1;
  std::vector<std::size_t> outside;
  for (std::size_t t = 0; t < window.size(); ++t) {
    if (!in_s[t]) outside.push_back(t);
  }
  if (outside.size() < 2) throw ContractError("conditional_law_check: need two window sites outside S");

  struct Row {
    bool exact = true;
    std::vector<double> coupled, direct;  // values outside S
    double count_coupled = 0.0, count_direct = 0.0;
  };
  const std::uint64_t root = rng.engine()();
  const double z0 = opt.count_threshold;
  auto rows = parallel_replicates(opt.replicates, opt.workers, [&](std::size_t r) {
    Rng a = Rng::for_stream(root, streams::kCoupling, 2 * r);
    Rng b = Rng::for_stream(root, streams::kCoupling, 2 * r + 1);
    Rng c = Rng::for_stream(root, streams::kDirect, r);
    PointProcessSample pp;
    const auto eta = sim.sample(a, &pp);
    CouplingOptions co;
    co.extend_to_z = z0;
    const auto hat = build_coupling(sim, pp, eta, b, s, co);
    Row row;
    for (std::size_t i : s_idx) row.exact = row.exact && hat.field.values[i] == eta.values[i];
    for (const auto& atom : hat.atoms) row.count_coupled += atom.z > z0 ? 1.0 : 0.0;

    // direct Phi: field and, from the same stream, atoms down to z0
    Rng c2 = c;
    const auto direct = sim.sample(c);
    MovingMaximumAtomStream stream(sim, c2);
    for (;;) {
      const Atom atom = stream.next();
      if (!(atom.z > z0)) break;
      row.count_direct += 1.0;
    }
    for (std::size_t t : outside) {
      row.coupled.push_back(hat.field.values[t]);
      row.direct.push_back(direct.values[t]);
    }
    return row;
  });

  ConditionalLawReport rep;
  rep.replicates = rows.size();
  std::vector<double> mc, md, cc, cd, ic, id;
  for (const auto& row : rows) {
    if (!row.exact) ++rep.bit_exact_failures;
    mc.insert(mc.end(), row.coupled.begin(), row.coupled.end());
    md.insert(md.end(), row.direct.begin(), row.direct.end());
    cc.push_back(row.count_coupled);
    cd.push_back(row.count_direct);
    ic.push_back(1.0 / std::max(row.coupled[0], row.coupled[1]));
    id.push_back(1.0 / std::max(row.direct[0], row.direct[1]));
  }
  const std::size_t n = rows.size();
  rep.ks_marginal = two_sample_ks(mc, md);
  // pooled sites are dependent; the p-value uses the replicate count
  rep.ks_marginal_pvalue = two_sample_ks_pvalue(rep.ks_marginal, n, n);
  rep.ks_counts = two_sample_ks(cc, cd);
  rep.ks_counts_pvalue = two_sample_ks_pvalue(rep.ks_counts, n, n);
  const auto tc = theta_from_inverse_maxima(ic);
  const auto td = theta_from_inverse_maxima(id);
  rep.theta_coupled = tc.value;
  rep.theta_coupled_se = tc.std_error;
  rep.theta_direct = td.value;
  rep.theta_direct_se = td.std_error;
  const double se = std::hypot(tc.std_error, td.std_error);
  rep.theta_discrepancy_in_se = se > 0.0 ? std::abs(tc.value - td.value) / se : 0.0;
  return rep;
}

}  // namespace maxstable
