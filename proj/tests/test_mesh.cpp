#include <doctest.h>

#include <cmath>
#include <random>

#include "bergman/mesh.hpp"
#include "bergman/random.hpp"
#include "bergman/report.hpp"
#include "bergman/serialize.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {

RealFunction random_function(const MeshPtr& mesh, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->size()));
  for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = uniform(rng, lo, hi);
  return RealFunction(mesh, v);
}

}  // namespace

TEST_CASE("cells partition the disk") {
  for (double alpha : {-0.5, 0.0, 2.5}) {
    for (auto mesh : {Mesh::dyadic(7), Mesh::overlay(7)}) {
      CHECK(mesh->masses(alpha).sum() == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK(Mesh::dyadic(5)->size() == 63);
  CHECK(Mesh::overlay(5)->refines(*Mesh::dyadic(5)));
  CHECK_FALSE(Mesh::dyadic(5)->refines(*Mesh::overlay(5)));
}

TEST_CASE("averages of constants and indicators") {
  const auto mesh = Mesh::overlay(6);
  const auto c = RealFunction::constant(mesh, 2.5);
  CHECK(average(c, DyadicArc::make(Grid::Third, 3, 5).box(), 0.7) == doctest::Approx(2.5).epsilon(1e-14));
  const auto top = indicator(mesh, DyadicArc::make(Grid::Zero, 0, 0).top());
  CHECK(average(top, Region::disk(), 0.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(weighted_average(top, unit(mesh), Region::disk(), 0.0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("dyadic function averaged over a shifted box matches Monte Carlo") {
  const int depth = 6;
  const auto mesh = Mesh::dyadic(depth);
  const auto f = random_function(mesh, 5, 1.0, 2.0);
  const Region box = DyadicArc::make(Grid::Third, 2, 3).box();
  for (double alpha : {0.0, 1.0}) {
    const double exact = average(f, box, alpha);
    std::mt19937_64 rng(17);
    const int n = 1000000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto [angle, r] = oracle::sample(box, alpha, rng);
      acc += f[mesh->locate(angle, r)];
    }
    CHECK(std::abs(acc / n - exact) <= 1e-3);
  }
}

TEST_CASE("norms and the weak quasinorm") {
  const auto mesh = Mesh::dyadic(6);
  const auto half = indicator(mesh, DyadicArc::make(Grid::Zero, 1, 0).box());
  CHECK(lp_norm(half, unit(mesh), 1.0, 0.0) == doctest::Approx(0.375).epsilon(1e-14));

  Eigen::VectorXd a(3), m(3);
  a << 2.0, 1.0, 0.0;
  m << 0.1, 0.5, 0.4;
  CHECK(weak_quasinorm_impl(a, m) == doctest::Approx(0.6).epsilon(1e-15));

  CHECK(weak_quasinorm(3.0 * half, unit(mesh), 0.0) == doctest::Approx(3.0 * 0.375).epsilon(1e-14));

  const auto w = random_function(mesh, 2, 0.5, 3.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto f = random_function(mesh, 100 + s, 0.0, 4.0);
    CHECK(within(weak_quasinorm(f, w, 0.3), lp_norm(f, w, 1.0, 0.3)));
    CHECK(lp_norm(-2.0 * f, w, 1.5, 0.3) == doctest::Approx(2.0 * lp_norm(f, w, 1.5, 0.3)).epsilon(1e-13));
    const double l2 = lp_norm(f, w, 2.0, 0.3);
    CHECK(l2 * l2 == doctest::Approx(lp_norm(f * f, w, 1.0, 0.3)).epsilon(1e-13));
    CHECK(level_set_mass(f, w, 2.0, 0.3) * 2.0 <= weak_quasinorm(f, w, 0.3) * (1 + 1e-12));
  }
}

TEST_CASE("integrals are invariant under refinement") {
  const auto f = random_function(Mesh::dyadic(5), 3, -1.0, 1.0);
  const auto w = random_function(Mesh::dyadic(5), 4, 0.5, 2.0);
  for (auto finer : {Mesh::dyadic(6), Mesh::overlay(7)}) {
    const auto g = f.on(finer);
    CHECK(integrate(g, 0.5) == doctest::Approx(integrate(f, 0.5)).epsilon(1e-12));
    CHECK(lp_norm(g, w.on(finer), 3.0, 0.5) == doctest::Approx(lp_norm(f, w, 3.0, 0.5)).epsilon(1e-12));
    CHECK(weak_quasinorm(g, w, 0.5) == doctest::Approx(weak_quasinorm(f, w, 0.5)).epsilon(1e-12));
    const Region box = DyadicArc::make(Grid::Zero, 2, 1).box();
    CHECK(integrate(g, box, 0.5) == doctest::Approx(integrate(f, box, 0.5)).epsilon(1e-12));
  }
}

TEST_CASE("mesh functions survive a json round trip") {
  const auto f = random_function(Mesh::overlay(4), 9, -3.0, 3.0);
  const auto back = real_function_from_json(nlohmann::json::parse(to_json(f, {0.0, 1.0}).dump()));
  CHECK(back.mesh().is_overlay());
  CHECK(back.mesh().depth() == 4);
  CHECK((back.values().array() == f.values().array()).all());

  const ComplexFunction z = f.map([](double v) { return std::complex<double>(v, -v / 3.0); });
  const auto zb = complex_function_from_json(nlohmann::json::parse(to_json(z).dump()));
  CHECK((zb.values().array() == z.values().array()).all());

  auto j = to_json(f);
  j["extra"] = 1;
  CHECK_THROWS(real_function_from_json(j));
}

TEST_CASE("mismatched value counts are rejected") {
  CHECK_THROWS_AS(RealFunction(Mesh::dyadic(3), Eigen::VectorXd::Zero(4)), std::invalid_argument);
  CHECK_THROWS_AS(indicator(Mesh::dyadic(4), DyadicArc::make(Grid::Third, 2, 0).box()), std::invalid_argument);
}
