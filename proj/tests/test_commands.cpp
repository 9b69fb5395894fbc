#include <doctest.h>

#include <filesystem>
#include <string>

#include "maxstable/commands.hpp"
#include "maxstable/config.hpp"
#include "maxstable/errors.hpp"
#include "maxstable/io.hpp"

using namespace maxstable;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("maxstable_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_mm() {
  return parse_config(R"(model = moving-maximum
kernel.family = truncated-gaussian
window.sizes = 8, 12
replicates = 6
seed = 9
)");
}

}  // namespace

TEST_SUITE("cli-harness") {
  TEST_CASE("simulate output does not depend on the worker count") {
    for (const std::string model : {"moving-maximum", "brown-resnick"}) {
      auto c = small_mm();
      c.model = model;
      c.out = scratch("w1").string();
      c.workers = 1;
      const auto a = cmd_simulate(c);
      c.out = scratch("w3").string();
      c.workers = 3;
      const auto b = cmd_simulate(c);
      REQUIRE(a.files.size() == 6);
      REQUIRE(b.files.size() == 6);
      for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(read_file(a.files[i]) == read_file(b.files[i]));
      CHECK(read_file(a.manifest) == read_file(b.manifest));
    }
  }

  TEST_CASE("estimate rows and aggregates") {
    auto c = small_mm();
    c.out = scratch("est").string();
    const auto r = cmd_estimate(c);
    // 2 sizes x 6 replicates x 3 estimators
    CHECK(r.rows.size() == 36);
    CHECK(r.aggregate.size() == 6);
    for (const auto& a : r.aggregate) {
      CHECK(a.count + a.errors == 6);
      CHECK(a.theta > 1.0);
      CHECK(a.theta < 2.0);
    }
    CHECK(fs::exists(fs::path(c.out) / "estimates.csv"));
    CHECK(fs::exists(fs::path(c.out) / "aggregate.csv"));
    CHECK(fs::exists(fs::path(c.out) / "manifest.json"));
    c.format = "json";
    c.out = scratch("est_json").string();
    (void)cmd_estimate(c);
    CHECK(fs::exists(fs::path(c.out) / "estimates.json"));
  }

  TEST_CASE("clt verdicts") {
    Rng rng(3);
    std::vector<double> z(2000);
    for (auto& v : z) v = 1.5 * rng.normal();
    const auto ok = make_clt_verdict(z, 2.25, 0.8, 1.25, 0.01);
    CHECK(ok.pass);
    CHECK(ok.variance_ratio == doctest::Approx(1.0).epsilon(0.1));
    const auto wide = make_clt_verdict(z, 1.0, 0.8, 1.25, 0.01);
    CHECK_FALSE(wide.pass);
    CHECK_FALSE(wide.ratio_ok);
  }

  TEST_CASE("bounds ladder") {
    auto c = parse_config("model = moving-maximum\nbounds.max_distance = 5\nsets.s1 = 0,0\nsets.s2 = 1,0;1,1\n");
    c.out = scratch("bounds").string();
    const auto r = cmd_bounds(c);
    REQUIRE(r.ladder.size() == 5);
    for (std::size_t i = 1; i < r.ladder.size(); ++i) CHECK(r.ladder[i].gamma <= r.ladder[i - 1].gamma);
    CHECK(r.ladder[3].beta_countable == 0.0);
    CHECK(r.ladder[0].beta_compact == doctest::Approx(r.ladder[0].beta_countable).epsilon(1e-9));
    CHECK_FALSE(r.set_reports.empty());
    CHECK(fs::exists(fs::path(c.out) / "bounds.csv"));
  }

  TEST_CASE("variance-opt on an iid field") {
    auto c = parse_config("model = moving-maximum\ndim = 1\nkernel.family = indicator-box\nkernel.radius = 0.25\n");
    c.out = scratch("vopt").string();
    const auto r = cmd_variance_opt(c);
    CHECK(r.theta == doctest::Approx(2.0));
    CHECK(r.optimum.y_star == doctest::Approx(1.04361211887889785668).epsilon(2e-3));
    CHECK(r.grid.size() == 17);
    CHECK(fs::exists(fs::path(c.out) / "sigma1_profile.csv"));
  }

  TEST_CASE("coupling requires a moving maximum") {
    auto c = parse_config("sets.s1 = 0,0\n");
    c.out = scratch("coupling").string();
    CHECK_THROWS_AS(cmd_coupling(c), ConfigError);
  }
}
