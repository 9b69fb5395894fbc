#include <doctest.h>

#include <cmath>
#include <vector>

#include "maxstable/errors.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/stats.hpp"

using namespace maxstable;

TEST_SUITE("stats") {
  TEST_CASE("normal quantile and cdf reference values") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.95996398454005385560).epsilon(1e-13));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.84134474606854294859).epsilon(1e-14));
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-9}) {
      CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-10 * std::max(p, 1e-2));
    }
  }

  TEST_CASE("frechet cdf") {
    CHECK(frechet_cdf(1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(frechet_cdf(0.0) == 0.0);
    CHECK(frechet_cdf(-2.0) == 0.0);
  }

  TEST_CASE("one-sample KS below the 1% critical value in at least 99% of trials") {
    const std::size_t n = 500, trials = 300;
    int below = 0;
    for (std::size_t k = 0; k < trials; ++k) {
      Rng rng = Rng::for_stream(11, streams::kReplicate, k);
      std::vector<double> x(n);
      for (auto& v : x) v = rng.uniform_open();
      const double d = ks_statistic(x, [](double u) { return std::clamp(u, 0.0, 1.0); });
      below += d < 1.63 / std::sqrt(static_cast<double>(n)) ? 1 : 0;
    }
    CHECK(below >= 297);
  }

  TEST_CASE("two-sample KS edge cases") {
    const std::vector<double> a{3, 1, 2, 2, 5};
    CHECK(two_sample_ks(a, a) == 0.0);
    const std::vector<double> b{10, 11};
    CHECK(two_sample_ks(a, b) == 1.0);
    const std::vector<double> c{1, 2};
    const std::vector<double> d{2, 3};
    CHECK(two_sample_ks(c, d) == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, [](double) { return 0.0; }), ContractError);
  }

  TEST_CASE("Kolmogorov survival") {
    CHECK(kolmogorov_survival(1.3580986) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(kolmogorov_survival(1.6276236) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(kolmogorov_survival(0.0) == 1.0);
  }

  TEST_CASE("least squares recovers a line") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{3, 5, 7, 9};
    const auto fit = least_squares(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.slope_std_error == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("summaries") {
    const std::vector<double> v{1, 2, 3, 4};
    const auto s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(s.variance == doctest::Approx(5.0 / 3.0));
    CHECK(s.std_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));
  }
}
