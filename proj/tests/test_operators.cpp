#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "bergman/operators.hpp"
#include "bergman/projection.hpp"
#include "bergman/random.hpp"

using namespace bergman;

namespace {

RealFunction random_function(const MeshPtr& mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->size()));
  for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = uniform(rng, -1.0, 3.0);
  return RealFunction(mesh, v);
}

// Sum over every box of the grid of its average, tested cell by cell.
Eigen::VectorXd naive_sparse(const RealFunction& f, Grid grid, double alpha, int depth) {
  const auto out_mesh = Mesh::overlay(f.mesh().depth());
  const auto a = abs(f);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_mesh->size()));
  for (int j = 0; j <= depth; ++j) {
    for (std::int64_t m = 0; m < (std::int64_t{1} << j); ++m) {
      const Region box = DyadicArc::make(grid, j, m).box();
      const double avg = integrate(a, box, alpha) / region_mass(box, alpha);
      for (std::size_t c = 0; c < out_mesh->size(); ++c) {
        if (box.contains(out_mesh->cell_angle_mid(c), out_mesh->cell_radius_mid(c))) {
          out[static_cast<Eigen::Index>(c)] += avg;
        }
      }
    }
  }
  return out;
}

double max_error(const ProjectionSample& s, const std::function<std::complex<double>(std::complex<double>)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.angle.size(); ++i) {
    const auto z = std::polar(s.radius[i], 2.0 * M_PI * s.angle[i]);
    e = std::max(e, std::abs(s.values[static_cast<Eigen::Index>(i)] - exact(z)));
  }
  return e;
}

}  // namespace

TEST_CASE("sparse operator of the constant counts boxes") {
  const int depth = 6;
  const auto out = sparse_apply(RealFunction::constant(Mesh::dyadic(depth), 1.0), Grid::Zero, 0.3, depth).values;
  const Mesh& mesh = out.mesh();
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    CHECK(out[c] == doctest::Approx(mesh.cell_band(c) + 1).epsilon(1e-13));
  }
}

TEST_CASE("sparse operator of a half box indicator") {
  const auto mesh = Mesh::dyadic(5);
  const auto f = indicator(mesh, DyadicArc::make(Grid::Zero, 1, 0).box());
  const auto out = sparse_apply(f, Grid::Zero, 0.0, 5).values;
  const auto c = out.mesh().locate(0.2, 0.6);
  CHECK(out[c] == doctest::Approx(1.375).epsilon(1e-14));
}

TEST_CASE("sparse operator agrees with the per-box loop") {
  for (double alpha : {-0.5, 0.0, 1.5}) {
    for (Grid g : kGrids) {
      for (int depth : {3, 6}) {
        const auto f = random_function(depth % 2 ? Mesh::dyadic(depth) : Mesh::overlay(depth), 40 + depth);
        const auto fast = sparse_apply(f, g, alpha, depth).values.values();
        const auto slow = naive_sparse(f, g, alpha, depth);
        CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12 * slow.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_CASE("sparse operator is additive on non-negative functions") {
  const auto mesh = Mesh::dyadic(6);
  const auto f = abs(random_function(mesh, 1));
  const auto g = abs(random_function(mesh, 2));
  const auto lhs = sparse_both(f + g, 0.0, 6).values();
  const auto rhs = (sparse_both(f, 0.0, 6) + sparse_both(g, 0.0, 6)).values();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.maxCoeff());

  const auto h = random_function(mesh, 3);
  const auto k = -1.0 * random_function(mesh, 4);
  const auto sub = sparse_both(h + k, 0.0, 6).values();
  const auto sum = (sparse_both(h, 0.0, 6) + sparse_both(k, 0.0, 6)).values();
  CHECK(((sub.array() - sum.array()) <= 1e-12 * sum.maxCoeff()).all());
}

TEST_CASE("dyadic maximal function") {
  const auto mesh = Mesh::dyadic(5);
  const auto one = Weight::unit(mesh);
  const auto c1 = dyadic_maximal(RealFunction::constant(mesh, 1.0), make_weight(WeightSpec::random(1, 3.0), 0.0, 5),
                                 Grid::Third, 0.0);
  CHECK(c1.values().isOnes(1e-13));

  const auto half = DyadicArc::make(Grid::Zero, 1, 0);
  const auto m = dyadic_maximal(indicator(mesh, half.box()), one, Grid::Zero, 0.0);
  for (std::size_t c = 0; c < m.size(); ++c) {
    const bool inside = half.box_contains(m.mesh().cell_angle_mid(c), m.mesh().cell_radius_mid(c));
    CHECK(m[c] == doctest::Approx(inside ? 1.0 : 0.375).epsilon(1e-14));
  }

  const auto w = make_weight(WeightSpec::random(5, 2.0), 0.0, 5);
  const auto arc = DyadicArc::make(Grid::Zero, 2, 1);
  const auto wf = w.function() * indicator(mesh, arc.box());
  const auto global = dyadic_maximal(wf, one, Grid::Zero, 0.0);
  const auto rooted = dyadic_maximal(wf, one, Grid::Zero, 0.0, arc);
  for (std::size_t c = 0; c < global.size(); ++c) {
    if (arc.box_contains(global.mesh().cell_angle_mid(c), global.mesh().cell_radius_mid(c))) {
      CHECK(rooted[c] == doctest::Approx(global[c]).epsilon(1e-14));
    } else {
      CHECK(rooted[c] == 0.0);
    }
  }
}

TEST_CASE("projection reproduces constants and holomorphic monomials") {
  for (double alpha : {0.0, 1.0}) {
    const auto one = bergman_project(RealFunction::constant(Mesh::dyadic(6), 1.0), alpha, 6, 4);
    CHECK(one.values.size() == static_cast<Eigen::Index>(Mesh::dyadic(6)->size()));
    const double e1 = max_error(one, [](auto) { return std::complex<double>(1.0); });
    CHECK(e1 <= 2e-3);
    const auto sq = bergman_project([](std::complex<double> z) { return z * z; }, alpha, 6, 4);
    CHECK(max_error(sq, [](auto z) { return z * z; }) <= 5e-3);
    const auto conj = bergman_project([](std::complex<double> z) { return std::conj(z); }, alpha, 6, 4);
    CHECK(max_error(conj, [](auto) { return std::complex<double>(0.0); }) <= 5e-3);
    const auto r2 = bergman_project([](std::complex<double> z) { return std::norm(z); }, alpha, 6, 4);
    CHECK(max_error(r2, [alpha](auto) { return std::complex<double>(1.0 / (2.0 + alpha)); }) <= 5e-3);
  }
}

TEST_CASE("projection error shrinks under refinement") {
  const auto f = RealFunction::constant(Mesh::dyadic(5), 1.0);
  auto err = [&](int depth, int k) {
    return max_error(bergman_project(f.on(Mesh::dyadic(depth)), 0.0, depth, k),
                     [](auto) { return std::complex<double>(1.0); });
  };
  CHECK(err(7, 4) < err(5, 2));
}

TEST_CASE("projection rejects bad quadrature parameters") {
  const auto f = RealFunction::constant(Mesh::dyadic(3), 1.0);
  CHECK_THROWS(bergman_project(f, 0.0, 3, 0));
  CHECK_THROWS(bergman_project(f, -1.5, 3, 2));
}
