#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace bergman {

// Angles are measured in integer ticks: the circle has 3 * 2^40 of them, so
// every endpoint of both dyadic grids (shift 0 and shift 1/3) down to level 40
// is an exact integer.
inline constexpr int kTickBits = 40;
inline constexpr std::int64_t kThirdTicks = std::int64_t{1} << kTickBits;
inline constexpr std::int64_t kCircleTicks = 3 * kThirdTicks;
inline constexpr int kMaxLevel = kTickBits;

enum class Grid : std::uint8_t { Zero = 0, Third = 1 };

inline constexpr std::array<Grid, 2> kGrids{Grid::Zero, Grid::Third};

std::int64_t grid_offset_ticks(Grid grid);
double grid_shift(Grid grid);
std::string to_string(Grid grid);

/// Reduces a tick count into [0, kCircleTicks).
std::int64_t wrap_ticks(std::int64_t ticks);
std::int64_t angle_to_ticks(double normalized_angle);
double ticks_to_angle(std::int64_t ticks);

enum class RegionKind : std::uint8_t { CarlesonBox, TopHalf, Sector };

/// A polar rectangle of the disk: an arc of the circle (possibly wrapping past
/// angle 0) times a radial interval [r_inner, r_outer).
struct Region {
  std::int64_t start_ticks = 0;
  std::int64_t length_ticks = kCircleTicks;
  double r_inner = 0.0;
  double r_outer = 1.0;
  RegionKind kind = RegionKind::Sector;

  static Region disk();
  static Region sector(double start, double length, double r_inner, double r_outer);
  /// Carleson box over an arbitrary arc given in ticks.
  static Region carleson_box(std::int64_t start_ticks, std::int64_t length_ticks);
  static Region top_half(std::int64_t start_ticks, std::int64_t length_ticks);

  double angle_start() const { return ticks_to_angle(start_ticks); }
  double angle_length() const {
    return static_cast<double>(length_ticks) / static_cast<double>(kCircleTicks);
  }
  bool contains(double angle, double radius) const;
  /// Throws std::invalid_argument if the radial or angular data is malformed.
  void validate() const;
};

/// dA_alpha mass of the full annulus r_inner <= |z| < r_outer.
double annulus_mass(double r_inner, double r_outer, double alpha);

/// Closed-form dA_alpha mass of a region; the whole disk has mass 1.
double region_mass(const Region& region, double alpha);

/// 1 - r^2 evaluated as (1 - r)(1 + r) so that radii close to 1 keep full
/// relative precision.
inline double one_minus_sq(double r) { return (1.0 - r) * (1.0 + r); }

/// An arc [2^-j m + beta, 2^-j (m+1) + beta) of the grid D^beta. Level -1 is
/// the conventional root whose box is the whole disk.
struct DyadicArc {
  Grid grid = Grid::Zero;
  int level = 0;
  std::int64_t index = 0;

  static DyadicArc root(Grid grid) { return {grid, -1, 0}; }
  static DyadicArc make(Grid grid, int level, std::int64_t index);

  bool is_root() const { return level < 0; }
  std::int64_t start_ticks() const;
  std::int64_t length_ticks() const;
  double start() const { return ticks_to_angle(start_ticks()); }
  double length() const;

  DyadicArc parent() const;
  /// Two children for level >= 0; the root has the single level-0 arc.
  std::vector<DyadicArc> children() const;
  /// Angular containment inside the same grid (the root contains everything).
  bool contains(const DyadicArc& other) const;
  bool contains_angle(double angle) const;

  Region box() const;
  Region top() const;
  bool box_contains(double angle, double radius) const;

  std::string label() const;

  auto operator<=>(const DyadicArc&) const = default;
};

/// Every arc of `grid` whose Carleson box contains the point, ordered from
/// level 0 downwards. Empty for points outside the open disk.
std::vector<DyadicArc> ancestors(Grid grid, double angle, double radius);

/// Arc of `grid` at `level` whose angular range contains `angle`.
DyadicArc arc_containing(Grid grid, int level, double angle);

/// Lower bound |T_I|_alpha / |S_I|_alpha >= 1 - (3/4)^(alpha+1).
double top_fraction_bound(double alpha);

/// 4^(alpha+1) / (4^(alpha+1) - 3^(alpha+1)), the constant bounding
/// |S_I| / |T_I|.
double box_to_top_constant(double alpha);

void require_alpha(double alpha);

}  // namespace bergman
