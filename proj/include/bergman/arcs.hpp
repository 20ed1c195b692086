#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bergman/geometry.hpp"
#include "bergman/mesh.hpp"

namespace bergman {

/// Bookkeeping of the boxes of one grid D^beta, levels 0..depth, on a mesh
/// aligned with that grid.
///
/// Arcs are addressed by slots: level j, index m lives at 2^j - 1 + m. The
/// level -1 root has the same box as the level-0 arc and shares its slot.
class BoxIndex {
 public:
  BoxIndex(MeshPtr mesh, Grid grid, int depth);

  /// Shared instance per (mesh, grid, depth).
  static std::shared_ptr<const BoxIndex> get(const MeshPtr& mesh, Grid grid, int depth);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  Grid grid() const { return grid_; }
  int depth() const { return depth_; }
  std::size_t slot_count() const { return (std::size_t{2} << depth_) - 1; }

  static std::size_t slot(int level, std::int64_t index) {
    if (level < 0) return 0;
    return (std::size_t{1} << level) - 1 + static_cast<std::size_t>(index);
  }
  static std::size_t slot(const DyadicArc& arc) { return slot(arc.level, arc.index); }
  static int slot_level(std::size_t s);
  DyadicArc arc(std::size_t s) const;

  /// Deepest level whose box contains the cell (min of its band and depth).
  int cell_level(std::size_t cell) const { return level_[cell]; }
  std::int64_t cell_leaf(std::size_t cell) const { return leaf_[cell]; }
  std::size_t ancestor_slot(std::size_t cell, int level) const {
    return slot(level, leaf_[cell] >> (level_[cell] - level));
  }

  /// Per slot, the sum of the per-cell values over the cells of its box.
  Eigen::VectorXd box_sums(const Eigen::VectorXd& per_cell) const;

  std::span<const std::size_t> box_cells(std::size_t s) const {
    return {box_cells_.data() + box_offset_[s], box_offset_[s + 1] - box_offset_[s]};
  }
  /// Cells meeting the top-half of the arc.
  std::span<const std::size_t> top_cells(std::size_t s) const {
    return {top_cells_.data() + top_offset_[s], top_offset_[s + 1] - top_offset_[s]};
  }

 private:
  MeshPtr mesh_;
  Grid grid_;
  int depth_;
  std::vector<int> level_;
  std::vector<std::int64_t> leaf_;
  std::vector<std::size_t> box_offset_;
  std::vector<std::size_t> box_cells_;
  std::vector<std::size_t> top_offset_;
  std::vector<std::size_t> top_cells_;
};

/// Finite set of test arcs: every arc of the listed grids up to `depth`,
/// together with the root.
struct ArcFamily {
  int depth = 8;
  std::vector<Grid> grids{Grid::Zero, Grid::Third};

  static ArcFamily two_grid(int depth) { return {depth, {Grid::Zero, Grid::Third}}; }
  static ArcFamily single(int depth, Grid grid) { return {depth, {grid}}; }

  bool has(Grid grid) const;
  std::string key() const;
  std::vector<DyadicArc> arcs() const;
};

/// Mesh on which functions living on `base` can be examined against every
/// box of the family: refines `base` and is aligned with all family grids.
MeshPtr family_mesh(const MeshPtr& base, const ArcFamily& family);

}  // namespace bergman
