#include <doctest.h>

#include <cmath>
#include <vector>

#include "maxstable/errors.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/theta.hpp"

using namespace maxstable;

TEST_SUITE("theta-analytic") {
  TEST_CASE("Brown-Resnick pair closed form") {
    // V(h) = |h|^2 / 1 at |h| = 2 gives V = 4: 2 Psi(1)
    const auto v = VariogramSpec::power(1.0, 2.0);
    CHECK(theta_pair_br(v, Site{2, 0}).value == doctest::Approx(1.68268949213708589717).epsilon(1e-15));
    CHECK(theta_pair_br(VariogramSpec::power(1.0, 1.0), Site{1, 0}).value ==
          doctest::Approx(1.38292492254802620728).epsilon(1e-15));
    CHECK(theta_pair_br(v, Site{0, 0}).value == 1.0);
    CHECK(theta_pair_br(VariogramSpec::degenerate(), Site{5, 5}).value == 1.0);
  }

  TEST_CASE("moving-maximum pair coefficients") {
    const auto g = KernelSpec::gaussian(1, 1.3);
    CHECK(theta_pair_mm(g, Site{2}).value == doctest::Approx(1.5582436725750805235).epsilon(1e-14));
    const auto box = KernelSpec::indicator_box(2, 1.0);
    CHECK(theta_pair_mm(box, Site{1, 0}).value == doctest::Approx(1.5));
    CHECK(theta_pair_mm(box, Site{2, 0}).value == 2.0);
    CHECK(theta_pair_mm(box, Site{7, 3}).value == 2.0);
    const auto tg = KernelSpec::truncated_gaussian(1, 1.0, 2.0);
    CHECK(theta_pair_mm(tg, Site{1}).value == doctest::Approx(1.44538656736086861974).epsilon(1e-6));
    CHECK(theta_pair_mm(tg, Site{4}).value == 2.0);
  }

  TEST_CASE("quadrature agrees with the closed forms") {
    const auto g = KernelSpec::gaussian(2, 1.0);
    const std::vector<Site> pair{Site{0, 0}, Site{1, 1}};
    QuadratureOptions opt;
    opt.rel_tol = 1e-8;
    CHECK(theta_set_mm(g, pair, opt).value ==
          doctest::Approx(theta_pair_mm(g, Site{1, 1}).value).epsilon(1e-6));
    const auto box = KernelSpec::indicator_box(2, 1.5);
    const std::vector<Site> bp{Site{0, 0}, Site{1, 2}};
    CHECK(theta_set_mm(box, bp).value == doctest::Approx(theta_pair_mm(box, Site{1, 2}).value).epsilon(1e-3));
  }

  TEST_CASE("set coefficients: singleton, monotone, bounded by the count") {
    const auto spec = ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(2, 1.0, 2.0));
    Rng rng(3);
    const std::vector<Site> one{Site{4, 4}};
    CHECK(theta_set(spec, one, rng).value == 1.0);
    const std::vector<Site> two{Site{0, 0}, Site{1, 0}};
    const std::vector<Site> three{Site{0, 0}, Site{1, 0}, Site{0, 1}};
    const double t2 = theta_set(spec, two, rng).value;
    const double t3 = theta_set(spec, three, rng).value;
    CHECK(t2 <= t3);
    CHECK(t3 <= 3.0);
    CHECK(t3 >= 1.0);
  }

  TEST_CASE("Brown-Resnick Monte Carlo set coefficient matches the pair closed form") {
    const auto v = VariogramSpec::power(1.0, 1.0);
    const std::vector<Site> pair{Site{0, 0}, Site{2, 0}};
    const double exact = theta_pair_br(v, Site{2, 0}).value;
    for (auto est : {SpectralEstimator::kPinnedOrigin, SpectralEstimator::kNormalized}) {
      Rng rng(17);
      const auto mc = theta_set_br_mc(v, pair, 100000, rng, est);
      CHECK(std::abs(mc.value - exact) < 4.0 * mc.error);
    }
    Rng rng(1);
    CHECK_THROWS_AS(theta_set_br_mc(v, pair, 10, rng), ContractError);
  }

  TEST_CASE("tau_a") {
    const auto spec = ModelSpec::moving_maximum(KernelSpec::indicator_box(1, 1.0));
    CHECK(tau_a(spec, Site{5}, 2.0) == 0.0);
    CHECK(tau_a_from_theta(2.0, 1.0) == 0.0);
    CHECK(tau_a_from_theta(1.5, 2.0) == doctest::Approx(0.25));
  }

  TEST_CASE("C(S)") {
    const auto spec = ModelSpec::moving_maximum(KernelSpec::indicator_box(1, 1.0));
    Rng rng(5);
    const std::vector<Site> one{Site{0}};
    CHECK(capital_C(spec, one, 100, rng).value == 1.0);
    // independent pair: E[max(1/X, 1/Y)] with 1/X, 1/Y iid Exp(1) is 1.5
    const std::vector<Site> far{Site{0}, Site{10}};
    const auto c = capital_C(spec, far, 40000, rng);
    CHECK(std::abs(c.value - 1.5) < 4.0 * c.std_error);
  }

  TEST_CASE("integrate_box") {
    const std::vector<double> lo{0.0}, hi{1.0};
    const auto r = integrate_box([](std::span<const double> x) { return x[0] * x[0]; }, lo, hi);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(r.converged);
    const std::vector<double> lo2{-1.0, 0.0}, hi2{1.0, 2.0};
    const auto r2 = integrate_box([](std::span<const double> x) { return std::exp(-x[0] * x[0]) * x[1]; }, lo2, hi2);
    CHECK(r2.value == doctest::Approx(2.0 * std::sqrt(M_PI) * std::erf(1.0)).epsilon(1e-6));
  }
}
