#include "bergman/operators.hpp"

#include <stdexcept>

namespace bergman {

RealFunction sparse_apply_abs(const RealFunction& abs_f, Grid grid, double alpha, int depth) {
  require_alpha(alpha);
  if (abs_f.mesh().depth() < depth) throw std::invalid_argument("function mesh is shallower than the operator depth");
  const MeshPtr mesh = Mesh::overlay(abs_f.mesh().depth());
  const auto idx = BoxIndex::get(mesh, grid, depth);
  const Eigen::VectorXd m = mesh->masses(alpha);
  const Eigen::VectorXd f = abs_f.on(mesh).values();
  const Eigen::VectorXd avg = idx->box_sums(f.cwiseProduct(m)).cwiseQuotient(idx->box_sums(m));
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh->size()));
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    double acc = 0.0;
    for (int j = 0; j <= idx->cell_level(c); ++j) acc += avg[static_cast<Eigen::Index>(idx->ancestor_slot(c, j))];
    out[static_cast<Eigen::Index>(c)] = acc;
  }
  return RealFunction(mesh, std::move(out));
}

RealFunction dyadic_maximal(const RealFunction& abs_f, const Weight& u, Grid grid, double alpha,
                            std::optional<DyadicArc> root) {
  require_alpha(alpha);
  if (root && root->grid != grid) throw std::invalid_argument("root arc belongs to another grid");
  MeshPtr mesh = common_mesh(abs_f.mesh_ptr(), u.mesh_ptr());
  if (!mesh->aligned_with(grid)) mesh = Mesh::overlay(mesh->depth());
  const int depth = mesh->depth();
  const auto idx = BoxIndex::get(mesh, grid, depth);
  const Eigen::VectorXd um = u.function().on(mesh).values().cwiseProduct(mesh->masses(alpha));
  const Eigen::VectorXd f = abs_f.on(mesh).values();
  const Eigen::VectorXd avg = idx->box_sums(f.cwiseProduct(um)).cwiseQuotient(idx->box_sums(um));
  const int top = root ? std::max(root->level, 0) : 0;
  const std::size_t root_slot = root ? BoxIndex::slot(*root) : 0;
  if (root && root->level > depth) throw std::invalid_argument("root arc is deeper than the mesh");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->size()));
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    if (idx->cell_level(c) < top || idx->ancestor_slot(c, top) != root_slot) continue;
    double m = 0.0;
    for (int j = top; j <= idx->cell_level(c); ++j) {
      m = std::max(m, avg[static_cast<Eigen::Index>(idx->ancestor_slot(c, j))]);
    }
    out[static_cast<Eigen::Index>(c)] = m;
  }
  return RealFunction(mesh, std::move(out));
}

}  // namespace bergman
