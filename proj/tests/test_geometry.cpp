#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "bergman/geometry.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {

DyadicArc level_arc(Grid g, int level, std::int64_t index) { return DyadicArc::make(g, level, index); }

}  // namespace

TEST_CASE("region masses match closed forms and the quadrature oracle") {
  CHECK(region_mass(Region::disk(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  const auto half = level_arc(Grid::Zero, 1, 0);
  CHECK(region_mass(half.box(), 0.0) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(region_mass(half.box(), 1.0) == doctest::Approx(0.28125).epsilon(1e-14));
  CHECK(region_mass(level_arc(Grid::Zero, 0, 0).top(), 0.0) == doctest::Approx(0.25).epsilon(1e-14));

  for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
    for (const Region& g : {half.box(), half.top(), level_arc(Grid::Third, 5, 7).box()}) {
      const double exact = region_mass(g, alpha);
      CHECK(std::abs(exact - oracle::region_mass(g, alpha)) <= 1e-6 * exact);
    }
  }
}

TEST_CASE("random arcs and alphas agree with the quadrature oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(-0.9, 3.0);
  for (int n = 0; n < 40; ++n) {
    const Grid g = kGrids[rng() % 2];
    const int level = static_cast<int>(rng() % 13);
    const auto arc = level_arc(g, level, static_cast<std::int64_t>(rng() % (std::uint64_t{1} << level)));
    const double alpha = ua(rng);
    const Region region = rng() % 2 ? arc.box() : arc.top();
    const double exact = region_mass(region, alpha);
    CHECK(std::abs(exact - oracle::region_mass(region, alpha)) <= 1e-6 * exact);
  }
}

TEST_CASE("box mass splits into the top and the two child boxes") {
  for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
    for (Grid g : kGrids) {
      for (int level = 0; level <= 10; ++level) {
        const auto arc = level_arc(g, level, (std::int64_t{1} << level) / 3);
        double rhs = region_mass(arc.top(), alpha);
        for (const auto& c : arc.children()) rhs += region_mass(c.box(), alpha);
        CHECK(std::abs(region_mass(arc.box(), alpha) - rhs) <= 1e-12 * rhs);
      }
    }
  }
}

TEST_CASE("top-half bound holds with equality at the unit arc") {
  for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
    const double bound = top_fraction_bound(alpha);
    const auto whole = level_arc(Grid::Zero, 0, 0);
    const double gap = region_mass(whole.top(), alpha) / region_mass(whole.box(), alpha) - bound;
    CHECK(std::abs(gap) < 1e-12);
    for (int level = 1; level <= 12; ++level) {
      const auto arc = level_arc(Grid::Third, level, 1);
      CHECK(region_mass(arc.top(), alpha) >= bound * region_mass(arc.box(), alpha) * (1.0 - 1e-12));
    }
    CHECK(box_to_top_constant(alpha) == doctest::Approx(1.0 / bound).epsilon(1e-14));
  }
}

TEST_CASE("arc navigation") {
  const auto root = level_arc(Grid::Zero, 0, 0);
  const auto kids = root.children();
  REQUIRE(kids.size() == 2);
  CHECK(kids[0] == level_arc(Grid::Zero, 1, 0));
  CHECK(kids[1] == level_arc(Grid::Zero, 1, 1));
  CHECK(kids[1].parent() == root);
  CHECK(DyadicArc::root(Grid::Zero).children().size() == 1);

  const auto anc = ancestors(Grid::Zero, 0.1, 0.9);
  REQUIRE(anc.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(anc[j].level == j);
  CHECK(anc[3].contains_angle(0.1));

  CHECK(kids[0].box_contains(0.25 - 1e-9, 0.6));
  CHECK_FALSE(kids[0].box_contains(0.5 + 1e-9, 0.6));
  CHECK_FALSE(kids[0].box_contains(0.1, 0.4));
  CHECK(ancestors(Grid::Zero, 0.1, 1.0).empty());
}

TEST_CASE("third grid wraps past angle zero") {
  const auto last = level_arc(Grid::Third, 1, 1);
  CHECK(last.start() == doctest::Approx(5.0 / 6.0));
  CHECK(last.contains_angle(0.1));
  CHECK(arc_containing(Grid::Third, 1, 0.1) == last);
  CHECK(region_mass(last.box(), 0.0) == doctest::Approx(0.375));
}

TEST_CASE("level partition covers the circle") {
  for (Grid g : kGrids) {
    for (int level : {0, 3, 9}) {
      std::int64_t total = 0;
      for (std::int64_t m = 0; m < (std::int64_t{1} << level); ++m) total += level_arc(g, level, m).length_ticks();
      CHECK(total == kCircleTicks);
    }
  }
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS_AS(level_arc(Grid::Zero, 2, 4), std::invalid_argument);
  CHECK_THROWS_AS(level_arc(Grid::Zero, 1, -1), std::invalid_argument);
  CHECK_THROWS_AS(require_alpha(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Region::sector(0.0, 0.5, 0.7, 0.3).validate(), std::invalid_argument);
}
