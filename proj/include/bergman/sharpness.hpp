#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergman/harness.hpp"

namespace bergman {

/// Growth candidates psi(x) = x, x log(e + x), x^1.5.
inline constexpr std::array<const char*, 3> kPsiNames{"x", "x_log", "x_pow1.5"};
std::array<double, 3> psi_values(double x);

enum class SweepFamily { Power, RandomSpiked };

struct SweepPoint {
  double param = 0.0;
  std::string weight_id;
  double b1 = 1.0;
  double binf = 1.0;
  double cw = 1.0;
  double lhs = 0.0;
  std::string best_f;
  std::array<double, 3> psi_ratio{};
  /// lhs / ([w]_B1 log(e + [w]_Binf)).
  double coro_ratio = 0.0;
  /// lhs / [w]_B1^0.5.
  double sqrt_ratio = 0.0;
  double b1_next = 1.0;
  bool resolution_limited = false;
};

struct SweepTable {
  SweepFamily family = SweepFamily::Power;
  double alpha = 0.0;
  int depth = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> f_ids;
  std::vector<SweepPoint> points;

  /// [w]_B1 strictly increasing along the sweep.
  bool b1_increasing() const;
  /// max of coro_ratio over the sweep divided by its median.
  double coro_spread() const;
  /// last over first sqrt_ratio.
  double sqrt_growth() const;

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// Default power sweep t_i = -(alpha+1) + 0.05 * 2^-i, i = 0..count-1.
std::vector<double> default_power_params(double alpha, int count = 6);

/// Weight of the sweep at one parameter. Power: t. RandomSpiked: a random
/// weight (seed, ratio cap 2) times a dip of height `param` on the box of
/// D^0 at level depth-2, index 0.
WeightSpec sweep_weight(SweepFamily family, double param, std::uint64_t seed, int depth);

/// Default test functions: the constant, indicators of tops of both grids at
/// every level (index 0) including the deepest, and boxes at the two deepest
/// levels.
std::vector<FunctionSpec> sweep_functions(int depth);

/// lhs = max over f of ||T f||_{L^{1,inf}(w)} / ||f||_{L^1(w)}, T = T^0 + T^(1/3),
/// with the maximizing f id.
std::pair<double, std::string> best_weak_ratio(const Weight& w, const std::vector<NamedFunction>& fs, double alpha,
                                               int depth);

SweepTable sweep(SweepFamily family, const std::vector<double>& params, const std::vector<FunctionSpec>& f_corpus,
                 double alpha, int depth, std::uint64_t seed);

/// Search coordinates: weight = power(t) * bump(level, index, a) on D^0 and
/// f = indicator of the top (ftop) or box of (f_grid, f_level, f_index).
struct SearchConfig {
  double t = 0.0;
  int bump_level = 1;
  std::int64_t bump_index = 0;
  double bump_a = 1.0;
  Grid f_grid = Grid::Zero;
  int f_level = 1;
  std::int64_t f_index = 0;
  bool f_top = true;

  WeightSpec weight() const;
  FunctionSpec function() const;
  nlohmann::json to_json() const;
  static SearchConfig from_json(const nlohmann::json& j);
};

struct SearchStep {
  int evaluation = 0;
  int coordinate = -1;
  SearchConfig config;
  double objective = 0.0;
  bool accepted = false;
  double best = 0.0;
};

struct SearchResult {
  SearchConfig best;
  double objective = 0.0;
  double lhs = 0.0;
  double b1 = 1.0;
  std::vector<SearchStep> trajectory;

  nlohmann::json to_json() const;
};

/// objective = lhs / ([w]_B1 log(e + [w]_B1)) for the configuration, with lhs
/// the weak-(1,1) ratio of T^0 + T^(1/3) and two-grid constants.
double search_objective(const SearchConfig& c, double alpha, int depth, double* lhs = nullptr, double* b1 = nullptr);

/// Seeded starting point inside the admissible box.
SearchConfig initial_config(std::uint64_t seed, double alpha, int depth);

/// Coordinate ascent: each evaluation perturbs one coordinate (cyclic order)
/// with a seeded proposal and keeps it if the objective does not drop.
SearchResult extremal_search(int budget, std::uint64_t seed, double alpha, int depth);
SearchResult extremal_search(int budget, std::uint64_t seed, double alpha, int depth, const SearchConfig& start);

}  // namespace bergman
