#pragma once

#include <optional>

#include "bergman/arcs.hpp"
#include "bergman/mesh.hpp"
#include "bergman/weights.hpp"

namespace bergman {

struct SparseOutput {
  RealFunction values;
  int depth = 0;
  Grid grid = Grid::Zero;
};

/// T^beta_alpha f = sum over boxes of D^beta with level <= depth of the
/// dA_alpha average of |f| times the box indicator; exact on the overlay mesh.
template <typename Scalar>
SparseOutput sparse_apply(const MeshFunction<Scalar>& f, Grid grid, double alpha, int depth);

/// T^0 f + T^(1/3) f.
template <typename Scalar>
RealFunction sparse_both(const MeshFunction<Scalar>& f, double alpha, int depth);

/// Dyadic maximal function of |f| over D^beta with respect to u dA_alpha.
/// With a root arc only boxes inside S_root are used and the result vanishes
/// outside S_root.
RealFunction dyadic_maximal(const RealFunction& abs_f, const Weight& u, Grid grid, double alpha,
                            std::optional<DyadicArc> root = std::nullopt);

template <typename Scalar>
RealFunction dyadic_maximal(const MeshFunction<Scalar>& f, const Weight& u, Grid grid, double alpha,
                            std::optional<DyadicArc> root = std::nullopt) {
  return dyadic_maximal(abs(f), u, grid, alpha, root);
}

RealFunction sparse_apply_abs(const RealFunction& abs_f, Grid grid, double alpha, int depth);

template <typename Scalar>
SparseOutput sparse_apply(const MeshFunction<Scalar>& f, Grid grid, double alpha, int depth) {
  return {sparse_apply_abs(abs(f), grid, alpha, depth), depth, grid};
}

template <typename Scalar>
RealFunction sparse_both(const MeshFunction<Scalar>& f, double alpha, int depth) {
  const RealFunction a = abs(f);
  return sparse_apply_abs(a, Grid::Zero, alpha, depth) + sparse_apply_abs(a, Grid::Third, alpha, depth);
}

}  // namespace bergman
