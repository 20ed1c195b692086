#include "bergman/weights.hpp"

#include "bergman/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bergman {

using nlohmann::json;

WeightSpec WeightSpec::power(double t) {
  WeightSpec s;
  s.family = Family::Power;
  s.t = t;
  return s;
}

WeightSpec WeightSpec::bump(int level, std::int64_t index, double a, Grid grid) {
  WeightSpec s;
  s.family = Family::Bump;
  s.level = level;
  s.index = index;
  s.a = a;
  s.grid = grid;
  return s;
}

WeightSpec WeightSpec::random(std::uint64_t seed, double ratio_cap) {
  WeightSpec s;
  s.family = Family::Random;
  s.seed = seed;
  s.ratio_cap = ratio_cap;
  return s;
}

WeightSpec WeightSpec::product(std::vector<WeightSpec> factors) {
  WeightSpec s;
  s.family = Family::Product;
  s.factors = std::move(factors);
  return s;
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw std::invalid_argument(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(where + ": field '" + key + "' has the wrong type");
  }
}

Grid parse_grid(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "0") return Grid::Zero;
    if (s == "1/3") return Grid::Third;
  } else if (j.is_number()) {
    const double v = j.get<double>();
    if (v == 0.0) return Grid::Zero;
    if (std::abs(v - 1.0 / 3.0) < 1e-12) return Grid::Third;
  }
  throw std::invalid_argument(where + ": field 'grid' must be \"0\" or \"1/3\"");
}

}  // namespace

WeightSpec WeightSpec::from_json(const json& j) {
  const std::string where = "weight spec";
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  const auto family = require<std::string>(j, "family", where);
  if (family == "unit") {
    reject_unknown(j, {"family"}, where);
    return unit();
  }
  if (family == "power") {
    reject_unknown(j, {"family", "t"}, where);
    return power(require<double>(j, "t", where));
  }
  if (family == "bump") {
    reject_unknown(j, {"family", "level", "index", "a", "grid"}, where);
    const Grid g = j.contains("grid") ? parse_grid(j.at("grid"), where) : Grid::Zero;
    auto s = bump(require<int>(j, "level", where), require<std::int64_t>(j, "index", where),
                  require<double>(j, "a", where), g);
    if (!(s.a > 0.0)) throw std::invalid_argument(where + ": field 'a' must be positive");
    return s;
  }
  if (family == "random") {
    reject_unknown(j, {"family", "seed", "ratio_cap"}, where);
    auto s = random(require<std::uint64_t>(j, "seed", where), require<double>(j, "ratio_cap", where));
    if (!(s.ratio_cap >= 1.0)) throw std::invalid_argument(where + ": field 'ratio_cap' must be >= 1");
    return s;
  }
  if (family == "product") {
    reject_unknown(j, {"family", "of"}, where);
    if (!j.contains("of") || !j.at("of").is_array() || j.at("of").empty()) {
      throw std::invalid_argument(where + ": field 'of' must be a nonempty array");
    }
    std::vector<WeightSpec> fs;
    for (const auto& e : j.at("of")) fs.push_back(from_json(e));
    return product(std::move(fs));
  }
  throw std::invalid_argument(where + ": field 'family' has unknown value '" + family + "'");
}

json WeightSpec::to_json() const {
  switch (family) {
    case Family::Unit:
      return {{"family", "unit"}};
    case Family::Power:
      return {{"family", "power"}, {"t", t}};
    case Family::Bump:
      return {{"family", "bump"}, {"level", level}, {"index", index}, {"a", a}, {"grid", to_string(grid)}};
    case Family::Random:
      return {{"family", "random"}, {"seed", seed.value_or(0)}, {"ratio_cap", ratio_cap}};
    case Family::Product: {
      json of = json::array();
      for (const auto& f : factors) of.push_back(f.to_json());
      return {{"family", "product"}, {"of", of}};
    }
  }
  return {};
}

std::string WeightSpec::id() const {
  switch (family) {
    case Family::Unit:
      return "unit";
    case Family::Power:
      return "power:t=" + format_double(t);
    case Family::Bump:
      return "bump:" + to_string(grid) + ":" + std::to_string(level) + ":" + std::to_string(index) +
             ":a=" + format_double(a);
    case Family::Random:
      return "random:seed=" + std::to_string(seed.value_or(0)) + ":cap=" + format_double(ratio_cap);
    case Family::Product: {
      std::string s = "product(";
      for (std::size_t i = 0; i < factors.size(); ++i) s += (i ? "*" : "") + factors[i].id();
      return s + ")";
    }
  }
  return {};
}

Weight::Weight(std::string id, RealFunction values, std::optional<double> power_exponent)
    : id_(std::move(id)), values_(std::move(values)), power_exponent_(power_exponent) {
  for (Eigen::Index c = 0; c < values_.values().size(); ++c) {
    const double v = values_.values()[c];
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights must be finite and strictly positive");
  }
}

Weight Weight::unit(const MeshPtr& mesh) { return Weight("unit", RealFunction::constant(mesh, 1.0), 0.0); }

bool Weight::is_unit() const { return (values_.values().array() == 1.0).all(); }

double Weight::cached(const std::string& key, const std::function<double()>& compute) const {
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
  }
  const double v = compute();
  std::lock_guard lock(cache_->mutex);
  cache_->values.emplace(key, v);
  return v;
}

double power_cell_average(double r1, double r2, double t, double alpha) {
  require_alpha(alpha);
  if (!(alpha + t + 1.0 > 0.0)) throw std::invalid_argument("power weight needs t > -(alpha + 1)");
  const double e = alpha + 1.0;
  const double et = alpha + t + 1.0;
  const double a1 = one_minus_sq(r1);
  const double a2 = one_minus_sq(r2);
  const double num = std::pow(a1, et) - std::pow(a2, et);
  const double den = std::pow(a1, e) - std::pow(a2, e);
  return (e / et) * (num / den);
}

Weight make_weight(const WeightSpec& spec, double alpha, int depth) {
  require_alpha(alpha);
  switch (spec.family) {
    case WeightSpec::Family::Unit:
      return Weight::unit(Mesh::dyadic(depth));
    case WeightSpec::Family::Power: {
      if (!(spec.t > -(alpha + 1.0))) {
        throw std::invalid_argument("power weight exponent t must exceed -(alpha + 1)");
      }
      auto mesh = Mesh::dyadic(depth);
      Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->size()));
      for (int b = 0; b < mesh->band_count(); ++b) {
        const double value = power_cell_average(mesh->band_inner(b), mesh->band_outer(b), spec.t, alpha);
        const std::size_t begin = mesh->band_offset(b);
        const std::size_t end = b + 1 < mesh->band_count() ? mesh->band_offset(b + 1) : mesh->size();
        for (std::size_t c = begin; c < end; ++c) v[static_cast<Eigen::Index>(c)] = value;
      }
      return Weight(spec.id(), RealFunction(mesh, std::move(v)), spec.t);
    }
    case WeightSpec::Family::Bump: {
      if (!(spec.a > 0.0)) throw std::invalid_argument("bump height must be positive");
      if (spec.level < 0 || spec.level > depth) throw std::invalid_argument("bump level outside the mesh depth");
      const auto arc = DyadicArc::make(spec.grid, spec.level, spec.index);
      auto mesh = spec.grid == Grid::Zero ? Mesh::dyadic(depth) : Mesh::overlay(depth);
      RealFunction v = indicator(mesh, arc.box());
      v.values() = (spec.a - 1.0) * v.values().array() + 1.0;
      return Weight(spec.id(), std::move(v));
    }
    case WeightSpec::Family::Random: {
      if (!spec.seed) throw std::invalid_argument("random weight requires a seed");
      if (!(spec.ratio_cap >= 1.0)) throw std::invalid_argument("random weight ratio cap must be >= 1");
      auto mesh = Mesh::dyadic(depth);
      std::mt19937_64 rng(*spec.seed);
      const double log_cap = std::log(spec.ratio_cap);
      Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->size()));
      for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = std::exp(log_cap * uniform01(rng));
      return Weight(spec.id(), RealFunction(mesh, std::move(v)));
    }
    case WeightSpec::Family::Product: {
      if (spec.factors.empty()) throw std::invalid_argument("product weight needs factors");
      Weight acc = make_weight(spec.factors.front(), alpha, depth);
      for (std::size_t i = 1; i < spec.factors.size(); ++i) acc = product(acc, make_weight(spec.factors[i], alpha, depth));
      return Weight(spec.id(), acc.function(), acc.power_exponent());
    }
  }
  throw std::logic_error("unhandled weight family");
}

Weight product(const Weight& a, const Weight& b) {
  std::optional<double> t;
  if (a.power_exponent() && b.is_unit()) t = a.power_exponent();
  if (b.power_exponent() && a.is_unit()) t = b.power_exponent();
  if (a.is_unit() && b.is_unit()) return Weight::unit(common_mesh(a.function(), b.function()));
  return Weight("product(" + a.id() + "*" + b.id() + ")", a.function() * b.function(), t);
}

namespace {

struct Lifted {
  std::shared_ptr<const BoxIndex> index;
  Eigen::VectorXd mass;
  Eigen::VectorXd w;
  Eigen::VectorXd u;
};

Lifted lift(const Weight& w, const Weight& u, const ArcFamily& family, Grid grid, double alpha) {
  const MeshPtr base = common_mesh(w.function(), u.function());
  const MeshPtr mesh = family_mesh(base, family);
  Lifted l;
  l.index = BoxIndex::get(mesh, grid, family.depth);
  l.mass = mesh->masses(alpha);
  l.w = w.function().on(mesh).values();
  l.u = u.function().on(mesh).values();
  return l;
}

std::string key(const std::string& kind, double a, const std::string& extra, const ArcFamily& f) {
  return kind + "|" + format_double(a) + "|" + extra + "|" + f.key();
}

double grid_bp(const Lifted& l, double p) {
  const BoxIndex& idx = *l.index;
  const Eigen::VectorXd um = l.u.cwiseProduct(l.mass);
  const Eigen::VectorXd U = idx.box_sums(um);
  const Eigen::VectorXd W = idx.box_sums(l.w.cwiseProduct(um));
  double best = 0.0;
  if (p > 1.0) {
    const Eigen::VectorXd dual = l.w.array().pow(-1.0 / (p - 1.0)).matrix().cwiseProduct(um);
    const Eigen::VectorXd S = idx.box_sums(dual);
    for (Eigen::Index s = 0; s < U.size(); ++s) {
      best = std::max(best, (W[s] / U[s]) * std::pow(S[s] / U[s], p - 1.0));
    }
    return best;
  }
  for (std::size_t c = 0; c < idx.mesh().size(); ++c) {
    double m = 0.0;
    for (int j = 0; j <= idx.cell_level(c); ++j) {
      const auto s = static_cast<Eigen::Index>(idx.ancestor_slot(c, j));
      m = std::max(m, W[s] / U[s]);
    }
    best = std::max(best, m / l.w[static_cast<Eigen::Index>(c)]);
  }
  return best;
}

}  // namespace

double bp_constant(const Weight& w, const Weight& u, double p, const ArcFamily& family, double alpha) {
  if (!(p >= 1.0)) throw std::invalid_argument("bp_constant needs p >= 1");
  return w.cached(key("bp", alpha, format_double(p) + "|" + u.id(), family), [&] {
    double best = 1.0;
    for (Grid g : family.grids) best = std::max(best, grid_bp(lift(w, u, family, g, alpha), p));
    return best;
  });
}

Eigen::VectorXd rooted_maximal_integrals(const BoxIndex& idx, const Eigen::VectorXd& box_averages,
                                         const Eigen::VectorXd& cell_masses,
                                         const std::function<double(double)>& phi) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.slot_count()));
  for (std::size_t c = 0; c < idx.mesh().size(); ++c) {
    double run = 0.0;
    const double m = cell_masses[static_cast<Eigen::Index>(c)];
    for (int j = idx.cell_level(c); j >= 0; --j) {
      const auto s = static_cast<Eigen::Index>(idx.ancestor_slot(c, j));
      run = std::max(run, box_averages[s]);
      acc[s] += phi(run) * m;
    }
  }
  return acc;
}

namespace {

double grid_binf(const Lifted& l) {
  const BoxIndex& idx = *l.index;
  const Eigen::VectorXd M = idx.box_sums(l.mass);
  const Eigen::VectorXd W = idx.box_sums(l.w.cwiseProduct(l.mass));
  const Eigen::VectorXd A = W.cwiseQuotient(M);
  const Eigen::VectorXd I = rooted_maximal_integrals(idx, A, l.mass, [](double x) { return x; });
  return I.cwiseQuotient(W).maxCoeff();
}

double two_grid_binf(const Lifted& a, const Lifted& b) {
  const std::array<const Lifted*, 2> grids{&a, &b};
  std::array<Eigen::VectorXd, 2> M, W, A, own;
  for (int g = 0; g < 2; ++g) {
    const BoxIndex& idx = *grids[g]->index;
    M[g] = idx.box_sums(grids[g]->mass);
    W[g] = idx.box_sums(grids[g]->w.cwiseProduct(grids[g]->mass));
    A[g] = W[g].cwiseQuotient(M[g]);
  }
  const Eigen::VectorXd& mass = a.mass;
  const Eigen::VectorXd& w = a.w;
  double best = 0.0;
  for (int g = 0; g < 2; ++g) {
    const BoxIndex& own_idx = *grids[g]->index;
    const BoxIndex& other = *grids[1 - g]->index;
    Eigen::VectorXd X = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(other.slot_count()));
    std::vector<std::size_t> touched;
    for (std::size_t s = 0; s < own_idx.slot_count(); ++s) {
      const int level = BoxIndex::slot_level(s);
      touched.clear();
      for (std::size_t c : own_idx.box_cells(s)) {
        const double wm = w[static_cast<Eigen::Index>(c)] * mass[static_cast<Eigen::Index>(c)];
        for (int j = 0; j <= other.cell_level(c); ++j) {
          const std::size_t k = other.ancestor_slot(c, j);
          if (X[static_cast<Eigen::Index>(k)] == 0.0) touched.push_back(k);
          X[static_cast<Eigen::Index>(k)] += wm;
        }
      }
      double integral = 0.0;
      for (std::size_t c : own_idx.box_cells(s)) {
        double m = 0.0;
        for (int j = own_idx.cell_level(c); j >= level; --j) {
          m = std::max(m, A[g][static_cast<Eigen::Index>(own_idx.ancestor_slot(c, j))]);
        }
        for (int j = 0; j <= other.cell_level(c); ++j) {
          const auto k = static_cast<Eigen::Index>(other.ancestor_slot(c, j));
          m = std::max(m, X[k] / M[1 - g][k]);
        }
        integral += m * mass[static_cast<Eigen::Index>(c)];
      }
      best = std::max(best, integral / W[g][static_cast<Eigen::Index>(s)]);
      for (std::size_t k : touched) X[static_cast<Eigen::Index>(k)] = 0.0;
    }
  }
  return best;
}

}  // namespace

double binf_constant(const Weight& w, const ArcFamily& family, double alpha) {
  if (family.grids.empty()) throw std::invalid_argument("arc family has no grid");
  return w.cached(key("binf", alpha, "", family), [&] {
    const Weight one = Weight::unit(w.mesh_ptr());
    if (family.grids.size() == 1) {
      return std::max(1.0, grid_binf(lift(w, one, family, family.grids.front(), alpha)));
    }
    return std::max(1.0, two_grid_binf(lift(w, one, family, Grid::Zero, alpha),
                                       lift(w, one, family, Grid::Third, alpha)));
  });
}

double top_regularity_cw(const Weight& w, const ArcFamily& family) {
  return w.cached(key("cw", 0.0, "", family), [&] {
    double best = 1.0;
    const MeshPtr mesh = family_mesh(w.mesh_ptr(), family);
    const Eigen::VectorXd v = w.function().on(mesh).values();
    for (Grid g : family.grids) {
      const auto idx = BoxIndex::get(mesh, g, family.depth);
      for (std::size_t s = 0; s < idx->slot_count(); ++s) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t c : idx->top_cells(s)) {
          lo = std::min(lo, v[static_cast<Eigen::Index>(c)]);
          hi = std::max(hi, v[static_cast<Eigen::Index>(c)]);
        }
        best = std::max(best, hi / lo);
      }
    }
    return best;
  });
}

namespace {

struct Tightest {
  InequalityReport row;
  double worst = -1.0;

  void add(double lhs, double rhs, const std::string& witness) {
    const bool ok = within(lhs, rhs);
    ++row.checked;
    if (!ok) ++row.failed;
    const double ratio = lhs / rhs;
    if (ratio > worst) {
      worst = ratio;
      row.set_sides(lhs, rhs);
      row.witness = witness;
    }
    row.pass = row.failed == 0;
  }
};

}  // namespace

std::vector<InequalityReport> reverse_holder_report(const Weight& w, double alpha, const ArcFamily& family,
                                                    std::uint64_t seed) {
  require_alpha(alpha);
  std::vector<InequalityReport> out;
  std::mt19937_64 rng(seed);
  const Weight one = Weight::unit(w.mesh_ptr());
  const double k_top = box_to_top_constant(alpha);
  const double two_pow = std::pow(2.0, alpha + 3.0);
  for (Grid g : family.grids) {
    const ArcFamily single = ArcFamily::single(family.depth, g);
    const double B = binf_constant(w, single, alpha);
    const double cw = top_regularity_cw(w, single);
    const double eps = 1.0 / (two_pow * B);
    const double K = 2.0 * k_top * cw;
    const double esi_exp = 1.0 / (1.0 + two_pow * B);

    const Lifted l = lift(w, one, single, g, alpha);
    const BoxIndex& idx = *l.index;
    const Eigen::VectorXd M = idx.box_sums(l.mass);
    const Eigen::VectorXd wm = l.w.cwiseProduct(l.mass);
    const Eigen::VectorXd W = idx.box_sums(wm);
    const Eigen::VectorXd A = W.cwiseQuotient(M);
    const Eigen::VectorXd Wp = idx.box_sums(l.w.array().pow(1.0 + eps).matrix().cwiseProduct(l.mass));
    const Eigen::VectorXd R =
        rooted_maximal_integrals(idx, A, l.mass, [eps](double x) { return std::pow(x, 1.0 + eps); });

    auto make_row = [&](const std::string& theorem) {
      Tightest t;
      t.row.theorem = theorem;
      t.row.alpha = alpha;
      t.row.depth = family.depth;
      t.row.weight_id = w.id();
      t.row.grid_mode = "grid(" + to_string(g) + ")";
      t.row.checked = 0;
      t.row.provenance = "B_inf=" + format_double(B) + ";c_w=" + format_double(cw) + ";eps=" + format_double(eps);
      return t;
    };
    Tightest rh = make_row("reverse_holder");
    Tightest pre = make_row("rooted_maximal_reverse_holder");
    Tightest esi = make_row("small_set_estimate");

    for (std::size_t s = 0; s < idx.slot_count(); ++s) {
      const auto si = static_cast<Eigen::Index>(s);
      const std::string label = idx.arc(s).label();
      rh.add(std::pow(Wp[si] / M[si], 1.0 / (1.0 + eps)), K * A[si], label);
      pre.add(R[si] / M[si], 2.0 * B * std::pow(A[si], 1.0 + eps), label);

      const auto cells = idx.box_cells(s);
      auto check_subset = [&](double e_mass, double e_wmass, const std::string& tag) {
        esi.add(e_wmass / W[si], K * std::pow(e_mass / M[si], esi_exp), label + tag);
      };
      std::size_t lo = cells.front(), hi = cells.front(), heavy = cells.front();
      for (std::size_t c : cells) {
        const auto ci = static_cast<Eigen::Index>(c);
        if (l.mass[ci] < l.mass[static_cast<Eigen::Index>(lo)]) lo = c;
        if (l.mass[ci] > l.mass[static_cast<Eigen::Index>(hi)]) hi = c;
        if (l.w[ci] > l.w[static_cast<Eigen::Index>(heavy)]) heavy = c;
      }
      for (std::size_t c : {lo, hi, heavy}) {
        const auto ci = static_cast<Eigen::Index>(c);
        check_subset(l.mass[ci], wm[ci], ":cell" + std::to_string(c));
      }
      for (int draw = 0; draw < 32; ++draw) {
        const double q = uniform(rng, 0.05, 0.95);
        double em = 0.0, ewm = 0.0;
        for (std::size_t c : cells) {
          if (uniform01(rng) < q) {
            em += l.mass[static_cast<Eigen::Index>(c)];
            ewm += wm[static_cast<Eigen::Index>(c)];
          }
        }
        if (em == 0.0) {
          const std::size_t c = cells[uniform_index(rng, cells.size())];
          em = l.mass[static_cast<Eigen::Index>(c)];
          ewm = wm[static_cast<Eigen::Index>(c)];
        }
        check_subset(em, ewm, ":draw" + std::to_string(draw));
      }
    }
    out.push_back(rh.row);
    out.push_back(pre.row);
    out.push_back(esi.row);
  }
  return out;
}

}  // namespace bergman
