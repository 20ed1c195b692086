#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergman/arcs.hpp"
#include "bergman/projection.hpp"
#include "bergman/report.hpp"
#include "bergman/weights.hpp"

namespace bergman {

/// Test function recipe: indicator of a box or top-half, a constant, or a
/// positive random cellwise function.
struct FunctionSpec {
  enum class Kind { Constant, Box, Top, Random };

  Kind kind = Kind::Constant;
  Grid grid = Grid::Zero;
  int level = 0;
  std::int64_t index = 0;
  double value = 1.0;
  std::optional<std::uint64_t> seed;

  static FunctionSpec constant(double value);
  static FunctionSpec box(Grid grid, int level, std::int64_t index);
  static FunctionSpec top(Grid grid, int level, std::int64_t index);
  static FunctionSpec random(std::uint64_t seed);

  static FunctionSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string id() const;
};

struct NamedFunction {
  std::string id;
  RealFunction f;
};

NamedFunction make_function(const FunctionSpec& spec, int depth);

/// Seeded mixture of power, bump, random and product weights, all with
/// finite constants at the given depth.
std::vector<WeightSpec> weight_corpus(std::uint64_t seed, std::size_t count, double alpha, int depth);

/// Seeded mixture of box and top indicators of both grids (including the
/// deepest tops), random cellwise functions and the constant 1.
std::vector<FunctionSpec> function_corpus(std::uint64_t seed, std::size_t count, int depth);

/// sup over family arcs of (<u^(-r'/p)>)^(1/r') (<v^(t'/p)>)^(1/t'), dA_alpha averages.
double two_weight_constant(const Weight& u, const Weight& v, double p, double r, double t, double alpha,
                           const ArcFamily& family);

enum class WeakMode { Main1, Main2, Coro };
enum class StrongMode { Main3, Utov, SparseExplicit, Mixed1, Mixed2 };

std::string to_string(WeakMode mode);
std::string to_string(StrongMode mode);

struct StrongParams {
  double p = 2.0;
  double q = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();
  double t = std::numeric_limits<double>::quiet_NaN();
};

/// lhs = ||T(f v) / v||_{L^{1,inf}(u v)} / ||f||_{L^1(u v)} with T = T^0 + T^(1/3);
/// rhs_explicit = the bracketed constant of the chosen theorem. Ratio only.
/// Mode Coro reads the weight from u and requires v = 1. With a kernel the
/// same quotient for the quadrature projection is recorded in provenance.
InequalityReport weak_type_report(WeakMode mode, double p, const NamedFunction& f, const Weight& u,
                                  const Weight& v, double alpha, int depth, const KernelMatrix* kernel = nullptr);

/// Strong-type quotients ||T f||_{L^p(target)} / ||f||_{L^p(source)}. Mode
/// SparseExplicit asserts the fully explicit bound per grid and, by the
/// triangle inequality, their sum for T^0 + T^(1/3); all other modes are
/// ratio only. Main3 reads the weight from u.
std::vector<InequalityReport> strong_type_report(StrongMode mode, const StrongParams& params,
                                                 const NamedFunction& f, const Weight& u, const Weight& v,
                                                 double alpha, int depth, const KernelMatrix* kernel = nullptr);

/// Explicit constant of the single-grid strong-type chain.
double sparse_explicit_factor(double p, double r, double t, double alpha);

/// Per-arc checks of the product rule [uv]_{B_p} <= [u]_{B_1}^p [v]_{B_p(u)} and of
/// the weight-change inequality <|f|^q>^u <= [v]_{B_p(u)}^(1/p) (<|f|^{pq}>^{uv})^(1/p).
std::vector<InequalityReport> class_algebra_check(const Weight& u, const Weight& v, double p, double q,
                                                  double alpha, const ArcFamily& family,
                                                  const std::vector<NamedFunction>& functions);

/// |{M_w f > lambda}|_w <= ||f||_{L^1(w)} / lambda for each lambda, compared exactly.
std::vector<InequalityReport> maximal_weak_report(const NamedFunction& f, const Weight& w, Grid grid,
                                                  double alpha, const std::vector<double>& lambdas);

/// ||M f||_{L^p} <= 2 (p')^(1/p) ||f||_{L^p} for the unweighted dyadic maximal function.
InequalityReport maximal_strong_report(const NamedFunction& f, Grid grid, double p, double alpha);

/// max over evaluation points of |P f(z)| / (T^0 f + T^(1/3) f)(z).
double sparse_domination_ratio(const RealFunction& f, const KernelMatrix& kernel, int depth);

}  // namespace bergman
