#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "maxstable/errors.hpp"
#include "maxstable/pointprocess.hpp"

using namespace maxstable;

namespace {

ModelSpec compact_mm() { return ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(2, 1.0, 2.0)); }

}  // namespace

TEST_SUITE("pointprocess-lab") {
  TEST_CASE("extremal atoms reproduce the field on S") {
    const auto spec = compact_mm();
    const auto window = LatticeWindow::cube(2, 6);
    MovingMaximumSimulator sim(spec, std::make_shared<const LatticeWindow>(window));
    const std::vector<Site> s{{1, 1}, {1, 2}, {4, 4}};
    for (int r = 0; r < 50; ++r) {
      Rng rng = Rng::for_stream(21, streams::kReplicate, static_cast<std::uint64_t>(r));
      PointProcessSample pp;
      const auto field = sim.sample(rng, &pp);
      const auto dec = classify_extremal(spec, pp, field, s);
      CHECK(dec.extremal.size() + dec.subextremal.size() == pp.atoms.size());
      CHECK_FALSE(dec.extremal.empty());
      for (const auto& site : s) {
        const auto idx = *window.index_of(site);
        double best = 0.0;
        for (auto i : dec.extremal) best = std::max(best, atom_contribution(spec, field, pp.atoms[i], idx));
        CHECK(best == field.values[idx]);
        for (auto i : dec.subextremal) CHECK(atom_contribution(spec, field, pp.atoms[i], idx) < field.values[idx]);
      }
    }
  }

  TEST_CASE("dropping a subextremal atom leaves the field on S unchanged") {
    const auto spec = compact_mm();
    const auto window = LatticeWindow::cube(2, 5);
    MovingMaximumSimulator sim(spec, std::make_shared<const LatticeWindow>(window));
    const std::vector<Site> s{{2, 2}, {3, 2}};
    Rng rng(27);
    PointProcessSample pp;
    const auto field = sim.sample(rng, &pp);
    const auto dec = classify_extremal(spec, pp, field, s);
    REQUIRE_FALSE(dec.subextremal.empty());
    for (auto drop : dec.subextremal) {
      for (const auto& site : s) {
        const auto idx = *window.index_of(site);
        double m = 0.0;
        for (std::size_t i = 0; i < pp.atoms.size(); ++i) {
          if (i != drop) m = std::max(m, atom_contribution(spec, field, pp.atoms[i], idx));
        }
        CHECK(m == field.values[idx]);
      }
    }
  }

  TEST_CASE("classification checks its inputs") {
    const auto spec = compact_mm();
    const auto window = LatticeWindow::cube(2, 4);
    MovingMaximumSimulator sim(spec, std::make_shared<const LatticeWindow>(window));
    Rng rng(22);
    PointProcessSample pp;
    auto field = sim.sample(rng, &pp);
    const std::vector<Site> outside{{9, 9}};
    CHECK_THROWS_AS(classify_extremal(spec, pp, field, outside), ContractError);
    field.values[0] *= 2.0;
    const std::vector<Site> first{window.site(0)};
    CHECK_THROWS_AS(classify_extremal(spec, pp, field, first), ContractError);
  }

  TEST_CASE("atom stream replays the simulator draws") {
    const auto spec = compact_mm();
    MovingMaximumSimulator sim(spec, std::make_shared<const LatticeWindow>(LatticeWindow::cube(2, 5)));
    Rng a(23), b(23);
    PointProcessSample pp;
    (void)sim.sample(a, &pp);
    MovingMaximumAtomStream stream(sim, b);
    for (const auto& atom : pp.atoms) {
      const auto next = stream.next();
      CHECK(next.z == atom.z);
      CHECK(next.location == atom.location);
    }
    CHECK(stream.next().z < pp.atoms.back().z);
  }

  TEST_CASE("coupling keeps S1 bit-exact") {
    const auto spec = compact_mm();
    const auto window = LatticeWindow::cube(2, 6);
    MovingMaximumSimulator sim(spec, std::make_shared<const LatticeWindow>(window));
    const std::vector<Site> s1{{2, 2}, {2, 3}};
    for (int r = 0; r < 50; ++r) {
      Rng rng = Rng::for_stream(24, streams::kReplicate, static_cast<std::uint64_t>(r));
      Rng copy = Rng::for_stream(24, streams::kCoupling, static_cast<std::uint64_t>(r));
      PointProcessSample pp;
      const auto field = sim.sample(rng, &pp);
      const auto c = build_coupling(sim, pp, field, copy, s1);
      const auto dec = classify_extremal(spec, pp, field, s1);
      CHECK(c.from_original == dec.extremal.size());
      CHECK(c.from_original + c.from_copy == c.atoms.size());
      CHECK(c.copy_atoms_drawn >= c.from_copy);
      for (const auto& site : s1) {
        const auto idx = *window.index_of(site);
        CHECK(c.field.values[idx] == field.values[idx]);
      }
      for (std::size_t i = 0; i < c.field.size(); ++i) CHECK(c.field.values[i] > 0.0);
    }
  }

  TEST_CASE("no shared extremal atoms beyond the kernel diameter") {
    const auto spec = compact_mm();
    const std::vector<Site> s1{{0, 0}}, far{{4, 0}}, near{{1, 0}};
    Rng rng(25);
    const auto p = mc_shared_extremal_prob(spec, s1, far, 500, rng);
    CHECK(p.value == 0.0);
    CHECK(p.used == 500);
    SlyvniakOptions so;
    so.inner_draws = 200;
    const auto integral = slyvniak_integral(spec, s1, far, rng, so);
    CHECK(integral.value == 0.0);
    CHECK(integral.error == 0.0);

    const auto pn = mc_shared_extremal_prob(spec, s1, near, 2000, rng);
    const auto in = slyvniak_integral(spec, s1, near, rng, so);
    CHECK(pn.value > 0.0);
    CHECK(in.value > 0.0);
    CHECK(pn.value <= in.value + 3.0 * (pn.std_error + in.error));
    CHECK(in.coarse_value > 0.0);
    CHECK(std::abs(in.value - in.coarse_value) < 0.05 * in.value);
  }

  TEST_CASE("conditional law check on a small window") {
    const auto spec = compact_mm();
    const auto window = LatticeWindow::cube(2, 4);
    const std::vector<Site> s{{1, 1}};
    Rng rng(26);
    ConditionalLawOptions opt;
    opt.replicates = 400;
    const auto r = conditional_law_check(spec, window, s, rng, opt);
    CHECK(r.replicates == 400);
    CHECK(r.bit_exact_failures == 0);
    CHECK(r.ks_marginal_pvalue > 0.001);
    CHECK(r.ks_counts_pvalue > 0.001);
    CHECK(r.theta_discrepancy_in_se < 4.0);
  }
}
