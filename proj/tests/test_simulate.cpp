#include <doctest.h>

#include <cmath>
#include <vector>

#include "maxstable/errors.hpp"
#include "maxstable/field.hpp"
#include "maxstable/gaussian.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/pointprocess.hpp"
#include "maxstable/stats.hpp"

using namespace maxstable;

TEST_SUITE("fields-core") {
  TEST_CASE("Frechet point stream is strictly decreasing") {
    Rng rng(9);
    const auto z = frechet_points(rng, 1000);
    for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] < z[i - 1]);
    CHECK_THROWS_AS(frechet_points(rng, 0), ContractError);
  }

  TEST_CASE("derived seeds are distinct and reproducible") {
    CHECK(derive_seed(1, 1, 0) == derive_seed(1, 1, 0));
    CHECK(derive_seed(1, 1, 0) != derive_seed(1, 1, 1));
    CHECK(derive_seed(1, 1, 0) != derive_seed(1, 2, 0));
    CHECK(derive_seed(1, 1, 0) != derive_seed(2, 1, 0));
  }

  TEST_CASE("Gaussian increments: pinned covariance") {
    const auto v = VariogramSpec::power(2.0, 1.5);
    const std::vector<Site> sites{Site{0, 0}, Site{1, 0}, Site{3, 2}};
    GaussianIncrementSampler g(v, sites);
    CHECK(g.variance()[0] == 0.0);
    CHECK(g.variance()[2] == doctest::Approx(v(Site{3, 2})));
    Rng rng(4);
    const int n = 60000;
    double s12 = 0.0, s22 = 0.0, s11 = 0.0;
    std::vector<double> w(3);
    for (int k = 0; k < n; ++k) {
      g.sample(rng, w);
      CHECK(w[0] == 0.0);
      s11 += w[1] * w[1];
      s22 += w[2] * w[2];
      s12 += w[1] * w[2];
    }
    const double c12 = (v(Site{1, 0}) + v(Site{3, 2}) - v(Site{2, 2})) / 2.0;
    CHECK(std::abs(s11 / n - v(Site{1, 0})) < 0.05 * v(Site{1, 0}));
    CHECK(std::abs(s22 / n - v(Site{3, 2})) < 0.05 * v(Site{3, 2}));
    CHECK(std::abs(s12 / n - c12) < 0.05 * v(Site{3, 2}));
  }

  TEST_CASE("degenerate variogram gives a constant field") {
    const auto spec = ModelSpec::brown_resnick(1, VariogramSpec::degenerate());
    FieldSimulator sim(spec, LatticeWindow::cube(1, 5));
    Rng rng(2);
    const auto f = sim.sample(rng);
    for (double x : f.values) CHECK(x == f.values[0]);
  }

  TEST_CASE("moving maximum: field is the max over retained atoms") {
    const auto spec = ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(2, 1.0, 2.0));
    const auto w = LatticeWindow::cube(2, 6);
    Rng rng(21);
    const auto d = simulate_moving_maximum(spec, w, rng);
    CHECK_FALSE(d.field.truncation_bias_flag);
    CHECK(d.atoms.stopping.certified);
    for (std::size_t i = 1; i < d.atoms.atoms.size(); ++i) CHECK(d.atoms.atoms[i].z < d.atoms.atoms[i - 1].z);
    for (std::size_t t = 0; t < w.size(); ++t) {
      double m = 0.0;
      for (const auto& a : d.atoms.atoms) m = std::max(m, atom_contribution(spec, d.field, a, t));
      CHECK(m == d.field.values[t]);
      CHECK(d.field.values[t] > 0.0);
    }
  }

  TEST_CASE("same seed, same field") {
    const auto spec = ModelSpec::brown_resnick(2, VariogramSpec::power(1.0, 1.0));
    FieldSimulator sim(spec, LatticeWindow::cube(2, 4));
    Rng a(77), b(77);
    CHECK(sim.sample(a).values == sim.sample(b).values);
  }

  TEST_CASE("single dominant atom: ratios follow the kernel") {
    const auto kernel = KernelSpec::indicator_box(1, 100.0);
    const auto spec = ModelSpec::moving_maximum(kernel);
    const auto w = LatticeWindow::cube(1, 4);
    Rng rng(3);
    const auto d = simulate_moving_maximum(spec, w, rng);
    const auto& top = d.atoms.atoms.front();
    for (std::size_t t = 0; t < w.size(); ++t) {
      REQUIRE(d.field.values[t] == top.z * kernel.density_at(w.site(t), top.location));
    }
    CHECK(d.field.values[3] / d.field.values[0] ==
          doctest::Approx(kernel.density_at(Site{3}, top.location) / kernel.density_at(Site{0}, top.location)));
  }

  TEST_CASE("marginals are unit Frechet") {
    for (const auto& spec : {ModelSpec::brown_resnick(2, VariogramSpec::power(1.0, 1.0)),
                             ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(2, 1.0, 2.0))}) {
      FieldSimulator sim(spec, LatticeWindow::centered_cube(2, 3));
      auto v = parallel_replicates(4000, 1, [&](std::size_t r) {
        Rng rng = Rng::for_stream(5, streams::kReplicate, r);
        return sim.sample(rng).values[4];
      });
      CHECK(ks_statistic(v, frechet_cdf) < 1.63 / std::sqrt(4000.0));
    }
  }

  TEST_CASE("indicator-box: lags beyond the diameter are independent") {
    const auto spec = ModelSpec::moving_maximum(KernelSpec::indicator_box(1, 1.0));
    FieldSimulator sim(spec, LatticeWindow::from_sites(1, {Site{0}, Site{3}}));
    auto inv = parallel_replicates(20000, 1, [&](std::size_t r) {
      Rng rng = Rng::for_stream(8, streams::kReplicate, r);
      const auto f = sim.sample(rng);
      return 1.0 / std::max(f.values[0], f.values[1]);
    });
    const auto est = theta_from_inverse_maxima(inv);
    CHECK(std::abs(est.value - 2.0) < 3.0 * est.std_error);
  }

  TEST_CASE("max-stability with n = 5") {
    const auto spec = ModelSpec::brown_resnick(1, VariogramSpec::power(1.0, 1.0));
    Rng rng(12);
    const auto rep = max_stability_check(spec, LatticeWindow::cube(1, 2), 5, 4000, rng);
    CHECK(rep.ks_rescaled < 1.63 / std::sqrt(4000.0));
    CHECK(rep.theta_discrepancy_in_se() < 3.0);
  }

  TEST_CASE("configuration errors") {
    const auto spec = ModelSpec::brown_resnick(2, VariogramSpec::power(1.0, 1.0));
    CHECK_THROWS_AS(FieldSimulator(spec, LatticeWindow::cube(1, 3)), ConfigError);
    TruncationPolicy p;
    p.max_atoms = 0;
    CHECK_THROWS_AS(FieldSimulator(spec, LatticeWindow::cube(2, 3), p), ConfigError);
  }

  TEST_CASE("atom cap sets the bias flag") {
    const auto spec = ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(2, 1.0, 2.0));
    TruncationPolicy p;
    p.max_atoms = 3;
    FieldSimulator sim(spec, LatticeWindow::cube(2, 8), p);
    Rng rng(1);
    const auto f = sim.sample(rng);
    CHECK(f.truncation_bias_flag);
    CHECK(f.atoms_used == 3);
  }

  TEST_CASE("a larger atom budget never lowers a site") {
    const auto window = LatticeWindow::cube(2, 6);
    for (const auto& spec : {ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(2, 1.0, 2.0)),
                             ModelSpec::brown_resnick(2, VariogramSpec::power(1.0, 1.0))}) {
      std::vector<double> prev;
      for (std::size_t cap : {5, 50, 500, 100000}) {
        TruncationPolicy p;
        p.max_atoms = cap;
        FieldSimulator sim(spec, window, p);
        Rng rng(77);
        const auto f = sim.sample(rng);
        for (std::size_t i = 0; i < prev.size(); ++i) CHECK(f.values[i] >= prev[i]);
        prev = f.values;
      }
    }
  }

  TEST_CASE("serial and parallel replicate loops agree") {
    auto fn = [](std::size_t r) {
      Rng rng = Rng::for_stream(3, streams::kReplicate, r);
      return rng.uniform_open();
    };
    CHECK(serial_replicates(50, fn) == parallel_replicates(50, 4, fn));
    CHECK_THROWS_AS(parallel_replicates(10, 3,
                                        [](std::size_t r) -> int {
                                          if (r == 7) throw NumericalError("boom");
                                          return 0;
                                        }),
                    NumericalError);
  }
}
