#include <doctest.h>

#include <set>

#include "maxstable/errors.hpp"
#include "maxstable/lattice.hpp"

using namespace maxstable;

TEST_SUITE("lattice") {
  TEST_CASE("sup spheres") {
    for (int r = 0; r <= 5; ++r) {
      const auto s1 = sup_sphere(1, r);
      const auto s2 = sup_sphere(2, r);
      const auto s3 = sup_sphere(3, r);
      CHECK(static_cast<std::int64_t>(s1.size()) == sup_sphere_count(1, r));
      CHECK(static_cast<std::int64_t>(s2.size()) == sup_sphere_count(2, r));
      CHECK(static_cast<std::int64_t>(s3.size()) == sup_sphere_count(3, r));
      for (const auto& h : s2) CHECK(h.sup_norm() == r);
      CHECK(std::is_sorted(s2.begin(), s2.end()));
    }
    CHECK(sup_sphere_count(2, 3) == 24);
    CHECK(sup_sphere_count(2, 0) == 1);
  }

  TEST_CASE("box windows") {
    const auto w = LatticeWindow::cube(2, 4);
    CHECK(w.size() == 16);
    CHECK(w.is_box());
    CHECK(w.boundary_count() == 12);
    CHECK(w.index_of(Site{0, 0}).value() == 0);
    CHECK(w.index_of(Site{3, 3}).value() == 15);
    CHECK_FALSE(w.contains(Site{4, 0}));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w.index_of(w.site(i)).value() == i);
    const auto big = w.inflated_by_lag(Site{2, -1});
    CHECK(big.size() == 6 * 5);
    CHECK(big.contains(Site{5, -1}));
  }

  TEST_CASE("boundary ratio decreases for cubes") {
    double prev = 2.0;
    for (int n : {4, 8, 16, 32}) {
      const double r = LatticeWindow::cube(2, n).boundary_ratio();
      CHECK(r < prev);
      prev = r;
    }
  }

  TEST_CASE("site sets") {
    CHECK_THROWS_AS(LatticeWindow::from_sites(2, {Site{0, 0}, Site{0, 0}}), ContractError);
    const std::vector<Site> a{Site{0, 0}, Site{1, 0}};
    const std::vector<Site> b{Site{4, 2}, Site{3, 3}};
    CHECK(set_distance(a, b) == 3);
    CHECK((Site{1, -2} - Site{3, 1}) == Site{-2, -3});
    CHECK(Site{3, -7}.sup_norm() == 7);
  }
}
