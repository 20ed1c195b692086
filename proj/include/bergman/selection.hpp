#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "bergman/arcs.hpp"
#include "bergman/report.hpp"
#include "bergman/weights.hpp"

namespace bergman {

/// Peels maximal arcs: layer 0 holds the arcs not strictly inside another
/// member, layer i the maximal arcs of what remains. All arcs share a grid.
std::vector<std::vector<DyadicArc>> layerize(const std::vector<DyadicArc>& arcs);

/// Smallest integer n with n >= (log(8 c) - log(1 - delta)) / (-log delta) * (1 + 2^(alpha+3) B),
/// delta = (3/4)^(alpha+1).
int stopping_depth(double alpha, double cw, double binf);

struct SelectedArc {
  DyadicArc arc;
  int layer = 0;
  double box_integral = 0.0;   // int_{S_I} |f| w dA_alpha
  double kept_integral = 0.0;  // int_{E_I} |f| w dA_alpha
  double box_mass = 0.0;
  double kept_mass = 0.0;
  double removed_mass = 0.0;  // mass of the layer-(i + n0) boxes inside I
  /// No layer-(i + n0) box can exist inside I above the truncation depth.
  bool starved = false;
  bool pass = true;
};

struct SelectionCertificate {
  Grid grid = Grid::Zero;
  int band = 0;
  int depth = 0;
  double alpha = 0.0;
  double cw = 1.0;
  double binf = 1.0;
  int n0 = 0;
  int n0_formula = 0;
  std::vector<std::vector<DyadicArc>> layers;
  std::vector<SelectedArc> arcs;
  std::vector<int> overlap;
  int max_overlap = 0;
  bool factor_pass = true;
  bool overlap_pass = true;
  std::size_t starved = 0;
  /// n0 / ((1 + log c_w) B).
  double overlap_constant_ratio = 0.0;

  bool pass() const { return factor_pass && overlap_pass; }
  nlohmann::json to_json() const;
};

/// Builds the collection of arcs of D^beta (levels <= depth) whose w-average of
/// |f| lies in [2^(-j-1), 2^(-j)], layers it, cuts E_I = S_I minus the boxes of
/// layer i + n0 inside I, and checks int_{S_I} |f| w <= 6 int_{E_I} |f| w and
/// sum chi_{E_I} <= n0. `n0_override` replaces the stopping depth (only the
/// construction identity is meaningful then).
SelectionCertificate exceptional_sets(const RealFunction& f, const Weight& w, Grid grid, int j, double alpha,
                                      int depth, std::optional<int> n0_override = std::nullopt);

/// sum |S_J|_w <= 4^(alpha+1) B / (4^(alpha+1) - 3^(alpha+1)) |union S_J|_w, with B
/// the B_inf constant of the arcs' grid at `depth`.
InequalityReport packing_check(const std::vector<DyadicArc>& arcs, const Weight& w, double alpha, int depth);

struct MinSum {
  double lhs = 0.0;
  double truncated = 0.0;
  double tail = 0.0;
};

/// sum_{k,j >= 0} min{g1 2^-k, eta g2 2^-j 2^((delta-1)k)}: exact for k <= K
/// (each k-slice in closed form) plus an upper bound for the k > K tail.
MinSum min_sum_bound(double g1, double g2, double eta, double delta, int K);

struct MinSumFit {
  double delta = 0.0;
  int K = 0;
  double constant = 0.0;
  double g1 = 0.0, g2 = 0.0, eta = 0.0;
};

/// max over the parameter grid of (lhs - eta/2) / (g1 log2(e + g2)).
MinSumFit fit_min_sum_constant(double delta, int K, const std::vector<double>& gammas,
                               const std::vector<double>& etas);

}  // namespace bergman
