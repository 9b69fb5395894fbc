#include <doctest.h>

#include <string>

#include "maxstable/config.hpp"
#include "maxstable/errors.hpp"
#include "maxstable/io.hpp"

using namespace maxstable;

TEST_SUITE("cli-harness") {
  TEST_CASE("config round trip") {
    const auto c = parse_config(R"(# moving maximum on a line
model = moving-maximum
dim = 1
kernel.family = gaussian
kernel.bandwidth = 1.3
window.sizes = 16, 32, 64
thresholds = 0.5, 1.0
replicates = 7
seed = 42
trunc.max_atoms = 5000000
sets.s1 = 0;1
)");
    CHECK(c.model == "moving-maximum");
    CHECK(c.dim == 1);
    CHECK(c.kernel_bandwidth == 1.3);
    CHECK(c.window_sizes == std::vector<int>{16, 32, 64});
    CHECK(c.lags == std::vector<Site>{Site{1}});
    CHECK(c.truncation.max_atoms == 5000000);
    CHECK(c.set1 == std::vector<Site>{Site{0}, Site{1}});
    validate_config(c);
    const auto again = parse_config(serialize_config(c));
    CHECK(again == c);
    CHECK(serialize_config(again) == serialize_config(c));
  }

  TEST_CASE("config errors name the line") {
    CHECK_THROWS_WITH_AS(parse_config("seed = 1\nbogus = 2\n"), doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("seed = 1\nseed = 2\n"), doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("replicates = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lags = 1,0,0\n"), ConfigError);
  }

  TEST_CASE("window families are validated") {
    auto c = parse_config("window.sizes = 8, 16, 32\n");
    validate_config(c);
    CHECK(region_window(c, 8).size() == 64);
    c.window_sizes = {16, 8};
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    // a slab of fixed thickness keeps |boundary| / |window| = 1
    auto slab = parse_config("window.shape = slab\nwindow.thickness = 1\nwindow.sizes = 8, 16\n");
    CHECK(region_window(slab, 8).size() == 8);
    CHECK_THROWS_AS(validate_config(slab), ConfigError);
    // the largest window (8 x 8) has ratio 28 / 64
    auto bounded = parse_config("window.sizes = 4, 8\nwindow.max_boundary_ratio = 0.4\n");
    CHECK_THROWS_AS(validate_config(bounded), ConfigError);
  }

  TEST_CASE("model specs from configs") {
    CHECK(model_spec(parse_config("")).is_brown_resnick());
    const auto mm = model_spec(parse_config("model = moving-maximum\nkernel.family = indicator-box\nkernel.radius = 0.25\n"));
    CHECK(mm.is_moving_maximum());
    CHECK(mm.kernel().diameter() == 0.5);
    CHECK_THROWS_AS(model_spec(parse_config("model = gaussian\n")), ConfigError);
  }

  TEST_CASE("site lists") {
    const auto s = parse_sites("1,0; 0,-2", 2);
    CHECK(s == std::vector<Site>{Site{1, 0}, Site{0, -2}});
    CHECK(parse_sites(format_sites(s), 2) == s);
  }

  TEST_CASE("csv quoting round trip") {
    CsvTable t({"name", "value"});
    t.row({"plain", "1"});
    t.row({"with,comma", "a \"quote\""});
    t.row({"line\nbreak", format_number(0.1)});
    const auto rows = parse_csv(t.str());
    REQUIRE(rows.size() == 4);
    CHECK(rows[2][0] == "with,comma");
    CHECK(rows[2][1] == "a \"quote\"");
    CHECK(rows[3][0] == "line\nbreak");
    CHECK(std::stod(rows[3][1]) == 0.1);
    CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
  }
}
