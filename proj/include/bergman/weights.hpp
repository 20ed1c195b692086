#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergman/arcs.hpp"
#include "bergman/mesh.hpp"
#include "bergman/report.hpp"

namespace bergman {

struct WeightSpec {
  enum class Family { Unit, Power, Bump, Random, Product };

  Family family = Family::Unit;
  double t = 0.0;
  Grid grid = Grid::Zero;
  int level = 0;
  std::int64_t index = 0;
  double a = 1.0;
  std::optional<std::uint64_t> seed;
  double ratio_cap = 1.0;
  std::vector<WeightSpec> factors;

  static WeightSpec unit() { return {}; }
  static WeightSpec power(double t);
  static WeightSpec bump(int level, std::int64_t index, double a, Grid grid = Grid::Zero);
  static WeightSpec random(std::uint64_t seed, double ratio_cap);
  static WeightSpec product(std::vector<WeightSpec> factors);

  /// Parses {"family": ...}; unknown keys and missing seeds are rejected
  /// with std::invalid_argument naming the field.
  static WeightSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string id() const;
};

/// A strictly positive mesh function with memoized class constants.
class Weight {
 public:
  Weight(std::string id, RealFunction values, std::optional<double> power_exponent = std::nullopt);

  static Weight unit(const MeshPtr& mesh);

  const RealFunction& function() const { return values_; }
  const MeshPtr& mesh_ptr() const { return values_.mesh_ptr(); }
  const std::string& id() const { return id_; }
  std::optional<double> power_exponent() const { return power_exponent_; }
  bool is_unit() const;

  double cached(const std::string& key, const std::function<double()>& compute) const;

 private:
  std::string id_;
  RealFunction values_;
  std::optional<double> power_exponent_;
  struct Cache {
    std::mutex mutex;
    std::map<std::string, double> values;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Realizes a weight on a mesh of the given depth. Power weights are exact
/// dA_alpha cell averages of (1-|z|^2)^t and therefore depend on alpha.
Weight make_weight(const WeightSpec& spec, double alpha, int depth);

Weight product(const Weight& a, const Weight& b);

/// Cell value of the power weight: average of (1-r^2)^t over the band
/// [r1, r2) with respect to dA_alpha.
double power_cell_average(double r1, double r2, double t, double alpha);

/// [w]_{B_p,alpha(u)} restricted to the family (p > 1: duality product of
/// averages; p = 1: sup of the u-weighted box maximal function over w).
/// Values are lower bounds for the supremum over all arcs and are clamped
/// below at 1, which every such constant satisfies.
double bp_constant(const Weight& w, const Weight& u, double p, const ArcFamily& family, double alpha);

/// [w]_{B_inf,alpha}. With a single-grid family the maximal function is the
/// dyadic one of that grid; with both grids it is the larger of the two
/// dyadic maximal functions and arcs range over both grids.
double binf_constant(const Weight& w, const ArcFamily& family, double alpha);

/// max over family arcs of (max w / min w) over the cells meeting the top-half.
double top_regularity_cw(const Weight& w, const ArcFamily& family);

/// Per arc I of `grid`: integral over S_I of phi(M_I(z)) dA_alpha where M_I
/// is the dyadic maximal function of w chi_{S_I} rooted at I. Indexed by slot.
Eigen::VectorXd rooted_maximal_integrals(const BoxIndex& index, const Eigen::VectorXd& box_averages,
                                         const Eigen::VectorXd& cell_masses,
                                         const std::function<double(double)>& phi);

/// Reverse Hoelder, rooted-maximal and small-set checks on every arc of each
/// family grid, using that grid's own B_inf and top-regularity constants.
/// One row per (grid, check) carrying the tightest arc and failure counts.
std::vector<InequalityReport> reverse_holder_report(const Weight& w, double alpha, const ArcFamily& family,
                                                    std::uint64_t seed);

}  // namespace bergman
