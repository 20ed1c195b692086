#include "bergman/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace bergman {

std::int64_t grid_offset_ticks(Grid grid) { return grid == Grid::Zero ? 0 : kThirdTicks; }

double grid_shift(Grid grid) { return grid == Grid::Zero ? 0.0 : 1.0 / 3.0; }

std::string to_string(Grid grid) { return grid == Grid::Zero ? "0" : "1/3"; }

std::int64_t wrap_ticks(std::int64_t ticks) {
  ticks %= kCircleTicks;
  return ticks < 0 ? ticks + kCircleTicks : ticks;
}

std::int64_t angle_to_ticks(double normalized_angle) {
  double frac = normalized_angle - std::floor(normalized_angle);
  return wrap_ticks(std::llround(frac * static_cast<double>(kCircleTicks)));
}

double ticks_to_angle(std::int64_t ticks) {
  return static_cast<double>(wrap_ticks(ticks)) / static_cast<double>(kCircleTicks);
}

void require_alpha(double alpha) {
  if (!(alpha > -1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be a finite number > -1");
  }
}

Region Region::disk() { return Region{0, kCircleTicks, 0.0, 1.0, RegionKind::Sector}; }

Region Region::sector(double start, double length, double r_inner, double r_outer) {
  Region r{angle_to_ticks(start), std::llround(length * static_cast<double>(kCircleTicks)),
           r_inner, r_outer, RegionKind::Sector};
  r.validate();
  return r;
}

Region Region::carleson_box(std::int64_t start_ticks, std::int64_t length_ticks) {
  const double h = static_cast<double>(length_ticks) / static_cast<double>(kCircleTicks);
  Region r{wrap_ticks(start_ticks), length_ticks, 1.0 - h, 1.0, RegionKind::CarlesonBox};
  r.validate();
  return r;
}

Region Region::top_half(std::int64_t start_ticks, std::int64_t length_ticks) {
  const double h = static_cast<double>(length_ticks) / static_cast<double>(kCircleTicks);
  Region r{wrap_ticks(start_ticks), length_ticks, 1.0 - h, 1.0 - 0.5 * h, RegionKind::TopHalf};
  r.validate();
  return r;
}

bool Region::contains(double angle, double radius) const {
  if (!(radius >= r_inner && radius < r_outer)) return false;
  return wrap_ticks(angle_to_ticks(angle) - start_ticks) < length_ticks;
}

void Region::validate() const {
  if (!(r_inner >= 0.0 && r_inner <= r_outer && r_outer <= 1.0)) {
    throw std::invalid_argument("region radial interval must satisfy 0 <= r1 <= r2 <= 1");
  }
  if (length_ticks <= 0 || length_ticks > kCircleTicks) {
    throw std::invalid_argument("region angular length must lie in (0, 1]");
  }
  if (start_ticks < 0 || start_ticks >= kCircleTicks) {
    throw std::invalid_argument("region angular start must be reduced modulo 1");
  }
}

double annulus_mass(double r_inner, double r_outer, double alpha) {
  require_alpha(alpha);
  if (!(r_inner >= 0.0 && r_inner <= r_outer && r_outer <= 1.0)) {
    throw std::invalid_argument("annulus radial interval must satisfy 0 <= r1 <= r2 <= 1");
  }
  const double e = alpha + 1.0;
  return std::pow(one_minus_sq(r_inner), e) - std::pow(one_minus_sq(r_outer), e);
}

double region_mass(const Region& region, double alpha) {
  require_alpha(alpha);
  region.validate();
  return region.angle_length() * annulus_mass(region.r_inner, region.r_outer, alpha);
}

DyadicArc DyadicArc::make(Grid grid, int level, std::int64_t index) {
  if (level < -1 || level > kMaxLevel) throw std::invalid_argument("dyadic level out of range");
  if (level == -1) {
    if (index != 0) throw std::invalid_argument("root arc has index 0");
    return root(grid);
  }
  if (index < 0 || index >= (std::int64_t{1} << level)) {
    throw std::invalid_argument("dyadic index out of range for level");
  }
  return {grid, level, index};
}

std::int64_t DyadicArc::start_ticks() const {
  if (is_root()) return grid_offset_ticks(grid);
  return wrap_ticks(index * (kCircleTicks >> level) + grid_offset_ticks(grid));
}

std::int64_t DyadicArc::length_ticks() const {
  return is_root() ? kCircleTicks : (kCircleTicks >> level);
}

double DyadicArc::length() const { return is_root() ? 1.0 : std::ldexp(1.0, -level); }

DyadicArc DyadicArc::parent() const {
  if (is_root()) throw std::logic_error("the root arc has no parent");
  if (level == 0) return root(grid);
  return {grid, level - 1, index >> 1};
}

std::vector<DyadicArc> DyadicArc::children() const {
  if (is_root()) return {DyadicArc{grid, 0, 0}};
  if (level >= kMaxLevel) throw std::logic_error("dyadic level exceeds tick resolution");
  return {DyadicArc{grid, level + 1, 2 * index}, DyadicArc{grid, level + 1, 2 * index + 1}};
}

bool DyadicArc::contains(const DyadicArc& other) const {
  if (other.grid != grid) throw std::invalid_argument("containment is only defined within a grid");
  if (is_root()) return true;
  if (other.is_root() || other.level < level) return false;
  return (other.index >> (other.level - level)) == index;
}

bool DyadicArc::contains_angle(double angle) const {
  if (is_root()) return true;
  return arc_containing(grid, level, angle).index == index;
}

Region DyadicArc::box() const {
  if (is_root()) return Region{0, kCircleTicks, 0.0, 1.0, RegionKind::CarlesonBox};
  return Region::carleson_box(start_ticks(), length_ticks());
}

Region DyadicArc::top() const {
  if (is_root()) return Region{0, kCircleTicks, 0.0, 0.5, RegionKind::TopHalf};
  return Region::top_half(start_ticks(), length_ticks());
}

bool DyadicArc::box_contains(double angle, double radius) const {
  if (!(radius >= 0.0 && radius < 1.0)) return false;
  if (radius < 1.0 - length()) return false;
  return contains_angle(angle);
}

std::string DyadicArc::label() const {
  return "D" + to_string(grid) + ":" + std::to_string(level) + ":" + std::to_string(index);
}

DyadicArc arc_containing(Grid grid, int level, double angle) {
  if (level < 0) return DyadicArc::root(grid);
  double rel = angle - grid_shift(grid);
  rel -= std::floor(rel);
  auto m = static_cast<std::int64_t>(std::floor(std::ldexp(rel, level)));
  const std::int64_t count = std::int64_t{1} << level;
  if (m >= count) m = count - 1;
  if (m < 0) m = 0;
  return {grid, level, m};
}

std::vector<DyadicArc> ancestors(Grid grid, double angle, double radius) {
  std::vector<DyadicArc> out;
  if (!(radius >= 0.0 && radius < 1.0)) return out;
  for (int j = 0; j <= kMaxLevel && 1.0 - std::ldexp(1.0, -j) <= radius; ++j) {
    out.push_back(arc_containing(grid, j, angle));
  }
  return out;
}

double top_fraction_bound(double alpha) {
  require_alpha(alpha);
  return 1.0 - std::pow(0.75, alpha + 1.0);
}

double box_to_top_constant(double alpha) {
  require_alpha(alpha);
  const double four = std::pow(4.0, alpha + 1.0);
  return four / (four - std::pow(3.0, alpha + 1.0));
}

}  // namespace bergman
