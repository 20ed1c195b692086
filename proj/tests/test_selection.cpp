#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "bergman/random.hpp"
#include "bergman/selection.hpp"

using namespace bergman;

namespace {

// Peeling by pairwise containment tests, O(n^2) per round.
std::vector<std::vector<DyadicArc>> naive_layers(std::vector<DyadicArc> rest) {
  std::vector<std::vector<DyadicArc>> out;
  while (!rest.empty()) {
    std::vector<DyadicArc> top, next;
    for (const auto& a : rest) {
      bool inside = false;
      for (const auto& b : rest) inside = inside || (b != a && b.contains(a));
      (inside ? next : top).push_back(a);
    }
    std::sort(top.begin(), top.end());
    out.push_back(top);
    rest = next;
  }
  return out;
}

}  // namespace

TEST_CASE("layering of chains, antichains and random sets") {
  const auto a0 = DyadicArc::make(Grid::Zero, 0, 0);
  const auto a1 = DyadicArc::make(Grid::Zero, 1, 1);
  const auto a2 = DyadicArc::make(Grid::Zero, 2, 3);
  const auto chain = layerize({a2, a0, a1});
  REQUIRE(chain.size() == 3);
  CHECK(chain[0] == std::vector<DyadicArc>{a0});
  CHECK(chain[1] == std::vector<DyadicArc>{a1});
  CHECK(chain[2] == std::vector<DyadicArc>{a2});

  std::vector<DyadicArc> level2;
  for (int m = 0; m < 4; ++m) level2.push_back(DyadicArc::make(Grid::Third, 2, m));
  CHECK(layerize(level2).size() == 1);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::set<DyadicArc> pick;
    while (pick.size() < 50) {
      const int level = static_cast<int>(uniform_index(rng, 7));
      pick.insert(DyadicArc::make(Grid::Third, level, static_cast<std::int64_t>(uniform_index(rng, 1u << level))));
    }
    auto layers = layerize({pick.begin(), pick.end()});
    for (auto& l : layers) std::sort(l.begin(), l.end());
    CHECK(layers == naive_layers({pick.begin(), pick.end()}));
  }
  CHECK_THROWS(layerize({a0, DyadicArc::make(Grid::Third, 1, 0)}));
}

TEST_CASE("stopping depth") {
  CHECK(stopping_depth(0.0, 1.0, 1.0) == 109);
  CHECK(stopping_depth(0.0, 2.0, 1.0) > 109);
  CHECK(stopping_depth(1.0, 1.0, 1.0) == 86);
  CHECK_THROWS(stopping_depth(0.0, 0.5, 1.0));
}

TEST_CASE("a lone selected arc keeps its whole box") {
  const auto mesh = Mesh::dyadic(6);
  const auto K = DyadicArc::make(Grid::Zero, 3, 2);
  const auto f = indicator(mesh, K.box());
  const auto cert = exceptional_sets(f, Weight::unit(mesh), Grid::Zero, 1, 0.0, 6);
  REQUIRE(cert.arcs.size() == 1);
  CHECK(cert.arcs[0].arc == K.parent());
  CHECK(cert.arcs[0].kept_mass == doctest::Approx(cert.arcs[0].box_mass).epsilon(1e-15));
  CHECK(cert.pass());
  CHECK(cert.n0 == 109);
}

TEST_CASE("exceptional sets of a box indicator match direct cell sums") {
  const int depth = 7;
  const auto mesh = Mesh::dyadic(depth);
  const auto K = DyadicArc::make(Grid::Zero, 2, 1);
  const auto f = indicator(mesh, K.box());
  const auto w = make_weight(WeightSpec::unit(), 0.0, depth);
  for (std::optional<int> n0 : {std::optional<int>{}, std::optional<int>{2}}) {
    const auto cert = exceptional_sets(f, w, Grid::Zero, 0, 0.0, depth, n0);
    REQUIRE(cert.arcs.size() == static_cast<std::size_t>((2 << (depth - 2)) - 1));
    const auto masses = mesh->masses(0.0);
    std::vector<int> overlap(mesh->size(), 0);
    for (const auto& rec : cert.arcs) {
      double kept = 0.0;
      for (std::size_t c = 0; c < mesh->size(); ++c) {
        const double th = mesh->cell_angle_mid(c), r = mesh->cell_radius_mid(c);
        if (!rec.arc.box_contains(th, r)) continue;
        bool removed = false;
        if (rec.layer + cert.n0 < static_cast<int>(cert.layers.size())) {
          for (const auto& b : cert.layers[rec.layer + cert.n0]) {
            removed = removed || (rec.arc.contains(b) && b.box_contains(th, r));
          }
        }
        if (!removed) {
          kept += f[c] * masses[static_cast<Eigen::Index>(c)];
          ++overlap[c];
        }
      }
      CHECK(rec.kept_integral == doctest::Approx(kept).epsilon(1e-12));
      CHECK(rec.pass);
    }
    CHECK(cert.max_overlap == *std::max_element(overlap.begin(), overlap.end()));
    CHECK(cert.pass() == (cert.max_overlap <= cert.n0));
  }
}

TEST_CASE("packing of the level two boxes") {
  std::vector<DyadicArc> arcs;
  for (int m = 0; m < 4; ++m) arcs.push_back(DyadicArc::make(Grid::Zero, 2, m));
  const auto row = packing_check(arcs, make_weight(WeightSpec::unit(), 0.0, 4), 0.0, 4);
  CHECK(row.lhs == doctest::Approx(0.4375).epsilon(1e-14));
  CHECK(row.rhs_explicit == doctest::Approx(4.0 * 0.4375).epsilon(1e-13));
  CHECK(row.pass);
}

TEST_CASE("packing of singletons and chains") {
  const auto w = make_weight(WeightSpec::random(12, 3.0), 0.5, 6);
  const auto single = packing_check({DyadicArc::make(Grid::Third, 3, 5)}, w, 0.5, 6);
  CHECK(single.pass);
  CHECK(single.lhs <= single.rhs_explicit);
  std::vector<DyadicArc> chain{DyadicArc::make(Grid::Third, 1, 1)};
  while (chain.size() < 5) chain.push_back(chain.back().children()[0]);
  const auto row = packing_check(chain, w, 0.5, 6);
  CHECK(row.pass);
  CHECK(row.ratio > 0.0);
  CHECK_THROWS(packing_check({}, w, 0.5, 6));
  CHECK_THROWS(packing_check({DyadicArc::make(Grid::Zero, 7, 0)}, w, 0.5, 6));
}

TEST_CASE("min sum at unit parameters equals four") {
  const auto s = min_sum_bound(1.0, 1.0, 1.0, 0.0, 64);
  CHECK(std::abs(s.lhs - 4.0) <= 1e-9);
  CHECK(s.tail >= 0.0);
  CHECK(s.tail < 1e-9);
  CHECK(std::abs(min_sum_bound(1.0, 1.0, 1.0, 0.0, 128).lhs - 4.0) <= 1e-9);
}

TEST_CASE("min sum shrinks with the second parameter") {
  double prev = INFINITY;
  for (double g2 : {1.0, 1e-2, 1e-4, 1e-6}) {
    const double v = min_sum_bound(1.0, g2, 1.0, 0.0, 64).lhs;
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-4);
  CHECK_THROWS(min_sum_bound(1.0, 1.0, 1.0, 0.0, 32));
  CHECK_THROWS(min_sum_bound(-1.0, 1.0, 1.0, 0.0, 64));
  CHECK_THROWS(min_sum_bound(1.0, 1.0, 1.0, -0.5, 64));
}

TEST_CASE("fitted min sum constants are finite and stable under truncation") {
  const std::vector<double> gammas{1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
  const std::vector<double> etas{0.1, 1.0, 10.0};
  for (double delta : {0.0, 1.0, 2.0, 3.0}) {
    const auto a = fit_min_sum_constant(delta, 64, gammas, etas);
    const auto b = fit_min_sum_constant(delta, 128, gammas, etas);
    CHECK(std::isfinite(a.constant));
    CHECK(std::abs(a.constant - b.constant) <= 0.1 * std::abs(b.constant));
  }
}
