#include "bergman/arcs.hpp"

#include <bit>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace bergman {

BoxIndex::BoxIndex(MeshPtr mesh, Grid grid, int depth)
    : mesh_(std::move(mesh)), grid_(grid), depth_(depth) {
  if (!mesh_->aligned_with(grid)) throw std::invalid_argument("mesh is not aligned with the grid");
  if (depth < 0 || depth > mesh_->depth()) throw std::invalid_argument("box depth exceeds mesh depth");
  const std::size_t n = mesh_->size();
  level_.resize(n);
  leaf_.resize(n);
  std::vector<std::size_t> box_count(slot_count(), 0);
  std::vector<std::size_t> top_count(slot_count(), 0);
  for (std::size_t c = 0; c < n; ++c) {
    const int band = mesh_->cell_band(c);
    const int lvl = std::min(band, depth_);
    level_[c] = lvl;
    leaf_[c] = mesh_->leaf_index(c, grid) >> (band - lvl);
    for (int j = 0; j <= lvl; ++j) ++box_count[ancestor_slot(c, j)];
    if (band <= depth_) ++top_count[ancestor_slot(c, lvl)];
  }
  box_offset_.assign(slot_count() + 1, 0);
  top_offset_.assign(slot_count() + 1, 0);
  for (std::size_t s = 0; s < slot_count(); ++s) {
    box_offset_[s + 1] = box_offset_[s] + box_count[s];
    top_offset_[s + 1] = top_offset_[s] + top_count[s];
  }
  box_cells_.resize(box_offset_.back());
  top_cells_.resize(top_offset_.back());
  std::vector<std::size_t> box_fill(box_offset_.begin(), box_offset_.end() - 1);
  std::vector<std::size_t> top_fill(top_offset_.begin(), top_offset_.end() - 1);
  for (std::size_t c = 0; c < n; ++c) {
    for (int j = 0; j <= level_[c]; ++j) box_cells_[box_fill[ancestor_slot(c, j)]++] = c;
    if (mesh_->cell_band(c) <= depth_) top_cells_[top_fill[ancestor_slot(c, level_[c])]++] = c;
  }
}

std::shared_ptr<const BoxIndex> BoxIndex::get(const MeshPtr& mesh, Grid grid, int depth) {
  static std::mutex mutex;
  static std::map<std::tuple<const Mesh*, Grid, int>, std::shared_ptr<const BoxIndex>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{mesh.get(), grid, depth}];
  if (!slot) slot = std::make_shared<const BoxIndex>(mesh, grid, depth);
  return slot;
}

int BoxIndex::slot_level(std::size_t s) { return std::bit_width(s + 1) - 1; }

DyadicArc BoxIndex::arc(std::size_t s) const {
  const int level = slot_level(s);
  return DyadicArc{grid_, level, static_cast<std::int64_t>(s + 1 - (std::size_t{1} << level))};
}

Eigen::VectorXd BoxIndex::box_sums(const Eigen::VectorXd& per_cell) const {
  if (static_cast<std::size_t>(per_cell.size()) != mesh_->size()) {
    throw std::invalid_argument("per-cell vector does not match the mesh");
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(slot_count()));
  for (std::size_t c = 0; c < mesh_->size(); ++c) {
    acc[static_cast<Eigen::Index>(ancestor_slot(c, level_[c]))] += per_cell[static_cast<Eigen::Index>(c)];
  }
  for (int j = depth_; j >= 1; --j) {
    const std::size_t first = slot(j, 0);
    const std::size_t count = std::size_t{1} << j;
    for (std::size_t m = 0; m < count; ++m) {
      acc[static_cast<Eigen::Index>(slot(j - 1, static_cast<std::int64_t>(m >> 1)))] +=
          acc[static_cast<Eigen::Index>(first + m)];
    }
  }
  return acc;
}

bool ArcFamily::has(Grid grid) const {
  for (Grid g : grids) {
    if (g == grid) return true;
  }
  return false;
}

std::string ArcFamily::key() const {
  std::string k = "J" + std::to_string(depth);
  for (Grid g : grids) k += ":" + to_string(g);
  return k;
}

std::vector<DyadicArc> ArcFamily::arcs() const {
  std::vector<DyadicArc> out;
  for (Grid g : grids) {
    out.push_back(DyadicArc::root(g));
    for (int j = 0; j <= depth; ++j) {
      for (std::int64_t m = 0; m < (std::int64_t{1} << j); ++m) out.push_back(DyadicArc{g, j, m});
    }
  }
  return out;
}

MeshPtr family_mesh(const MeshPtr& base, const ArcFamily& family) {
  const bool overlay = base->is_overlay() || family.has(Grid::Third);
  const int depth = std::max(base->depth(), family.depth);
  auto target = Mesh::make(depth, overlay ? Mesh::Kind::Overlay : Mesh::Kind::Dyadic);
  return base->refines(*target) ? base : target;
}

}  // namespace bergman
