#include "bergman/mesh.hpp"

#include <map>
#include <mutex>
#include <numeric>
#include <utility>

namespace bergman {

namespace {

std::int64_t arc_ticks(int level) { return kCircleTicks >> level; }

}  // namespace

Mesh::Mesh(int depth, Kind kind) : depth_(depth), kind_(kind) {
  breaks_.resize(static_cast<std::size_t>(depth + 1));
  for (int b = 0; b <= depth; ++b) {
    auto& br = breaks_[static_cast<std::size_t>(b)];
    const std::int64_t step = arc_ticks(b);
    const std::int64_t count = std::int64_t{1} << b;
    for (std::int64_t m = 0; m < count; ++m) {
      br.push_back(m * step);
      if (kind == Kind::Overlay) br.push_back(wrap_ticks(m * step + kThirdTicks));
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
  }
  for (int b = 0; b <= depth; ++b) {
    band_offset_.push_back(band_of_.size());
    const auto& br = breaks_[static_cast<std::size_t>(b)];
    for (std::size_t s = 0; s < br.size(); ++s) {
      const std::int64_t e = s + 1 < br.size() ? br[s + 1] : kCircleTicks;
      band_of_.push_back(b);
      start_.push_back(br[s]);
      length_.push_back(e - br[s]);
    }
  }
}

MeshPtr Mesh::make(int depth, Kind kind) {
  if (depth < 1 || depth > kMaxDepth) throw std::invalid_argument("mesh depth must lie in [1, 20]");
  static std::mutex mutex;
  static std::map<std::pair<int, Kind>, MeshPtr> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{depth, kind}];
  if (!slot) slot = MeshPtr(new Mesh(depth, kind));
  return slot;
}

MeshPtr Mesh::dyadic(int depth) { return make(depth, Kind::Dyadic); }

MeshPtr Mesh::overlay(int depth) { return make(depth, Kind::Overlay); }

double Mesh::band_inner(int band) const { return band == 0 ? 0.0 : 1.0 - std::ldexp(1.0, -band); }

double Mesh::band_outer(int band) const {
  return band == depth_ ? 1.0 : 1.0 - std::ldexp(1.0, -band - 1);
}

std::span<const std::int64_t> Mesh::band_breaks(int band) const {
  return breaks_[static_cast<std::size_t>(band)];
}

double Mesh::cell_angle_mid(std::size_t cell) const {
  return ticks_to_angle(start_[cell]) +
         0.5 * static_cast<double>(length_[cell]) / static_cast<double>(kCircleTicks);
}

double Mesh::cell_radius_mid(std::size_t cell) const {
  const int b = band_of_[cell];
  return 0.5 * (band_inner(b) + band_outer(b));
}

Region Mesh::cell_region(std::size_t cell) const {
  const int b = band_of_[cell];
  return Region{start_[cell], length_[cell], band_inner(b), band_outer(b), RegionKind::Sector};
}

std::vector<double> Mesh::band_masses(double alpha) const {
  std::vector<double> out(static_cast<std::size_t>(band_count()));
  for (int b = 0; b < band_count(); ++b) out[static_cast<std::size_t>(b)] = annulus_mass(band_inner(b), band_outer(b), alpha);
  return out;
}

Eigen::VectorXd Mesh::masses(double alpha) const {
  std::lock_guard lock(mass_mutex_);
  if (auto it = mass_cache_.find(alpha); it != mass_cache_.end()) return it->second;
  const auto radial = band_masses(alpha);
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  const double per_tick = 1.0 / static_cast<double>(kCircleTicks);
  for (std::size_t c = 0; c < size(); ++c) {
    out[static_cast<Eigen::Index>(c)] =
        static_cast<double>(length_[c]) * per_tick * radial[static_cast<std::size_t>(band_of_[c])];
  }
  mass_cache_.emplace(alpha, out);
  return out;
}

std::size_t Mesh::locate(double angle, double radius) const {
  if (!(radius >= 0.0 && radius < 1.0)) throw std::invalid_argument("point outside the open disk");
  int b = 0;
  while (b < depth_ && radius >= band_outer(b)) ++b;
  const auto& br = breaks_[static_cast<std::size_t>(b)];
  const std::int64_t t = angle_to_ticks(angle);
  auto it = std::upper_bound(br.begin(), br.end(), t);
  return band_offset_[static_cast<std::size_t>(b)] + static_cast<std::size_t>(std::distance(br.begin(), it)) - 1;
}

std::int64_t Mesh::leaf_index(std::size_t cell, Grid grid) const {
  if (!aligned_with(grid)) throw std::logic_error("mesh cells are not aligned with the requested grid");
  const int b = band_of_[cell];
  return wrap_ticks(start_[cell] - grid_offset_ticks(grid)) / arc_ticks(b);
}

bool Mesh::refines(const Mesh& coarse) const {
  if (depth_ < coarse.depth_) return false;
  return is_overlay() || !coarse.is_overlay();
}

std::vector<std::size_t> Mesh::parent_cells(const Mesh& coarse) const {
  if (!refines(coarse)) throw std::invalid_argument("target mesh does not refine the source mesh");
  std::vector<std::size_t> out(size());
  for (std::size_t c = 0; c < size(); ++c) {
    const int b = std::min(band_of_[c], coarse.depth_);
    const auto& br = coarse.breaks_[static_cast<std::size_t>(b)];
    auto it = std::upper_bound(br.begin(), br.end(), start_[c]);
    out[c] = coarse.band_offset_[static_cast<std::size_t>(b)] +
             static_cast<std::size_t>(std::distance(br.begin(), it)) - 1;
  }
  return out;
}

MeshPtr common_mesh(const MeshPtr& a, const MeshPtr& b) {
  if (a.get() == b.get()) return a;
  if (a->refines(*b)) return a;
  if (b->refines(*a)) return b;
  const bool overlay = a->is_overlay() || b->is_overlay();
  return Mesh::make(std::max(a->depth(), b->depth()), overlay ? Mesh::Kind::Overlay : Mesh::Kind::Dyadic);
}

RealFunction max(const RealFunction& a, const RealFunction& b) {
  const MeshPtr mesh = common_mesh(a, b);
  return RealFunction(mesh, a.on(mesh).values().cwiseMax(b.on(mesh).values()));
}

RealFunction indicator(const MeshPtr& mesh, const Region& region) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->size()));
  mesh->for_each_overlap(region, [&](std::size_t cell, std::int64_t ticks, double lo, double hi) {
    const int b = mesh->cell_band(cell);
    if (ticks != mesh->cell_length(cell) || lo != mesh->band_inner(b) || hi != mesh->band_outer(b)) {
      throw std::invalid_argument("region is not a union of mesh cells");
    }
    v[static_cast<Eigen::Index>(cell)] = 1.0;
  });
  return RealFunction(mesh, std::move(v));
}

double weak_quasinorm_impl(const Eigen::VectorXd& abs_values, const Eigen::VectorXd& weighted_mass) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(abs_values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return abs_values[a] > abs_values[b]; });
  double best = 0.0;
  double mass = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = abs_values[order[i]];
    if (!(v > 0.0)) break;
    while (i < order.size() && abs_values[order[i]] == v) mass += weighted_mass[order[i++]];
    best = std::max(best, v * mass);
  }
  return best;
}

}  // namespace bergman
