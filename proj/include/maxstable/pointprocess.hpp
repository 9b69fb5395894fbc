#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "maxstable/field.hpp"
#include "maxstable/lattice.hpp"
#include "maxstable/models.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

// Value of atom `atom` at window site `site_index`: z * f(t - u) for moving
// maxima, z * Y(t) for Brown-Resnick. Bit-identical to what the simulator
// stored in the field.
double atom_contribution(const ModelSpec& spec, const FieldSample& field, const Atom& atom, std::size_t site_index);

struct ExtremalDecomposition {
  std::vector<Site> sites;                // S
  std::vector<std::size_t> extremal;      // indices into the atom list
  std::vector<std::size_t> subextremal;
  std::size_t ties = 0;  // sites of S where several atoms attain eta exactly
};

// Atom i is S-extremal iff z_i f_i(s) >= eta(s) for some s in S (exact
// comparison on stored values; ties make every tying atom extremal).
// Throws ContractError when S is not in the field window or the atoms do not
// reproduce the field on S.
ExtremalDecomposition classify_extremal(const ModelSpec& spec, const PointProcessSample& pp, const FieldSample& field,
                                        std::span<const Site> s);

// Decreasing enumeration of moving-maximum atoms on a location box; the
// same draws, in the same order, as MovingMaximumSimulator with the same
// RNG state, but unbounded.
class MovingMaximumAtomStream {
 public:
  MovingMaximumAtomStream(const MovingMaximumSimulator& sim, Rng& rng);
  Atom next();
  std::size_t count() const { return points_.count(); }

 private:
  const MovingMaximumSimulator* sim_;
  Rng* rng_;
  FrechetPointStream points_;
};

enum class Provenance { kOriginal, kCopy };

struct CoupledProcess {
  std::vector<Atom> atoms;
  std::vector<Provenance> provenance;
  std::size_t from_original = 0;
  std::size_t from_copy = 0;
  std::size_t copy_atoms_drawn = 0;
  FieldSample field;  // eta_hat on the window
};

struct CouplingOptions {
  // Keep drawing copy atoms at least down to this z (for atom-count checks);
  // infinity disables the extension.
  double extend_to_z = std::numeric_limits<double>::infinity();
  std::size_t max_copy_atoms = 10000000;
};

// Phi_hat = Phi^+_{S1} u {phi in Phi_tilde : phi <_{S1} eta}. Phi and eta
// come from `sim` (moving maximum); Phi_tilde is drawn lazily from
// `copy_rng` until no further copy atom can reach eta_hat anywhere on the
// window, so eta_hat is exact on the whole window.
CoupledProcess build_coupling(const MovingMaximumSimulator& sim, const PointProcessSample& pp,
                              const FieldSample& field, Rng& copy_rng, std::span<const Site> s1,
                              const CouplingOptions& opt = {});

struct ProbabilityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;  // truncation-flagged replicates
};

// Frequency of {Phi^+_{S1} n Phi^+_{S2} != empty} with binomial standard
// error. Moving maxima only.
ProbabilityEstimate mc_shared_extremal_prob(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2,
                                            std::size_t replicates, Rng& rng, int workers = 1);

struct SlyvniakOptions {
  int cells_per_unit = 12;  // midpoint grid resolution for u
  std::size_t inner_draws = 2000;
  int workers = 1;
};

struct SlyvniakResult {
  double value = 0.0;
  double mc_error = 0.0;
  double quadrature_error = 0.0;
  double error = 0.0;  // combined
  double coarse_value = 0.0;  // same draws on a 3x coarser grid
  std::size_t cells = 0;
  bool mc_warning = false;  // Monte Carlo error above half the value
};

// int P[f not<_{S1} eta, f not<_{S2} eta] mu(df) for mu = z^-2 dz du. The z
// integral is done exactly (w = 1/z), leaving
// int E[min(A1(u), A2(u))] du with A_i(u) = max_{s in S_i} f(s - u) / eta(s);
// u runs over a midpoint grid, the expectation over independent eta draws.
SlyvniakResult slyvniak_integral(const ModelSpec& spec, std::span<const Site> s1, std::span<const Site> s2, Rng& rng,
                                 const SlyvniakOptions& opt = {});

struct ConditionalLawOptions {
  std::size_t replicates = 4000;
  double count_threshold = 1.0;  // atom counts with z above this level
  int workers = 1;
};

struct ConditionalLawReport {
  std::size_t replicates = 0;
  std::size_t bit_exact_failures = 0;  // eta_hat != eta somewhere on S
  double ks_marginal = 0.0;  // pooled eta_hat vs eta outside S
  double ks_marginal_pvalue = 0.0;
  double ks_counts = 0.0;  // atoms above the threshold
  double ks_counts_pvalue = 0.0;
  double theta_coupled = 0.0, theta_coupled_se = 0.0;
  double theta_direct = 0.0, theta_direct_se = 0.0;
  double theta_discrepancy_in_se = 0.0;
};

// Builds Phi_hat from independent (Phi, Phi_tilde) on `window` with S1 = s
// and compares it with independent direct draws of Phi. The theta pair is
// the first two window sites outside s.
ConditionalLawReport conditional_law_check(const ModelSpec& spec, const LatticeWindow& window, std::span<const Site> s,
                                           Rng& rng, const ConditionalLawOptions& opt = {});

}  // namespace maxstable
