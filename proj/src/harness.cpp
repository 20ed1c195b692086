#include "bergman/harness.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bergman/operators.hpp"
#include "bergman/random.hpp"

namespace bergman {

using nlohmann::json;

FunctionSpec FunctionSpec::constant(double value) {
  FunctionSpec s;
  s.value = value;
  return s;
}

FunctionSpec FunctionSpec::box(Grid grid, int level, std::int64_t index) {
  FunctionSpec s;
  s.kind = Kind::Box;
  s.grid = grid;
  s.level = level;
  s.index = index;
  return s;
}

FunctionSpec FunctionSpec::top(Grid grid, int level, std::int64_t index) {
  FunctionSpec s = box(grid, level, index);
  s.kind = Kind::Top;
  return s;
}

FunctionSpec FunctionSpec::random(std::uint64_t seed) {
  FunctionSpec s;
  s.kind = Kind::Random;
  s.seed = seed;
  return s;
}

FunctionSpec FunctionSpec::from_json(const json& j) {
  const std::string where = "function spec";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw std::invalid_argument(where + ": missing field 'kind'");
  }
  const auto kind = j.at("kind").get<std::string>();
  auto check = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw std::invalid_argument(where + ": unknown field '" + key + "'");
    }
    for (const char* a : allowed) {
      if (!j.contains(a)) throw std::invalid_argument(where + ": missing field '" + std::string(a) + "'");
    }
  };
  auto grid = [&] {
    const auto g = j.at("grid").get<std::string>();
    if (g == "0") return Grid::Zero;
    if (g == "1/3") return Grid::Third;
    throw std::invalid_argument(where + ": field 'grid' must be \"0\" or \"1/3\"");
  };
  try {
    if (kind == "constant") {
      check({"kind", "value"});
      return constant(j.at("value").get<double>());
    }
    if (kind == "box" || kind == "top") {
      check({"kind", "grid", "level", "index"});
      const int level = j.at("level").get<int>();
      const auto index = j.at("index").get<std::int64_t>();
      return kind == "box" ? box(grid(), level, index) : top(grid(), level, index);
    }
    if (kind == "random") {
      check({"kind", "seed"});
      return random(j.at("seed").get<std::uint64_t>());
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(where + ": " + e.what());
  }
  throw std::invalid_argument(where + ": field 'kind' has unknown value '" + kind + "'");
}

json FunctionSpec::to_json() const {
  switch (kind) {
    case Kind::Constant:
      return {{"kind", "constant"}, {"value", value}};
    case Kind::Box:
    case Kind::Top:
      return {{"kind", kind == Kind::Box ? "box" : "top"}, {"grid", bergman::to_string(grid)}, {"level", level}, {"index", index}};
    case Kind::Random:
      return {{"kind", "random"}, {"seed", seed.value_or(0)}};
  }
  return {};
}

std::string FunctionSpec::id() const {
  switch (kind) {
    case Kind::Constant:
      return "const:" + format_double(value);
    case Kind::Box:
    case Kind::Top:
      return std::string(kind == Kind::Box ? "box:" : "top:") + bergman::to_string(grid) + ":" +
             std::to_string(level) + ":" + std::to_string(index);
    case Kind::Random:
      return "random:seed=" + std::to_string(seed.value_or(0));
  }
  return {};
}

NamedFunction make_function(const FunctionSpec& spec, int depth) {
  switch (spec.kind) {
    case FunctionSpec::Kind::Constant:
      return {spec.id(), RealFunction::constant(Mesh::dyadic(depth), spec.value)};
    case FunctionSpec::Kind::Box:
    case FunctionSpec::Kind::Top: {
      const auto arc = DyadicArc::make(spec.grid, spec.level, spec.index);
      if (arc.level > depth || (spec.kind == FunctionSpec::Kind::Top && arc.level >= depth)) {
        throw std::invalid_argument("function level is not resolved by the mesh depth");
      }
      const auto mesh = spec.grid == Grid::Zero ? Mesh::dyadic(depth) : Mesh::overlay(depth);
      return {spec.id(), indicator(mesh, spec.kind == FunctionSpec::Kind::Box ? arc.box() : arc.top())};
    }
    case FunctionSpec::Kind::Random: {
      if (!spec.seed) throw std::invalid_argument("random function requires a seed");
      const auto mesh = Mesh::dyadic(depth);
      std::mt19937_64 rng(*spec.seed);
      Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->size()));
      for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = std::exp(uniform(rng, -2.0, 2.0));
      return {spec.id(), RealFunction(mesh, std::move(v))};
    }
  }
  throw std::logic_error("unhandled function kind");
}

std::vector<WeightSpec> weight_corpus(std::uint64_t seed, std::size_t count, double alpha, int depth) {
  std::mt19937_64 rng(seed);
  auto power = [&] { return WeightSpec::power(uniform(rng, -(alpha + 1.0) + 0.1, 1.0)); };
  auto bump = [&] {
    const int level = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(depth)));
    const auto index = static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << level));
    const double a = std::exp(uniform(rng, -std::log(8.0), std::log(8.0)));
    const Grid g = uniform01(rng) < 0.5 ? Grid::Zero : Grid::Third;
    return WeightSpec::bump(level, index, a, g);
  };
  auto random = [&] { return WeightSpec::random(rng(), uniform(rng, 1.2, 4.0)); };
  std::vector<WeightSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    switch (i % 5) {
      case 0: out.push_back(power()); break;
      case 1: out.push_back(bump()); break;
      case 2: out.push_back(random()); break;
      case 3: out.push_back(WeightSpec::product({power(), bump()})); break;
      default: out.push_back(WeightSpec::product({random(), power()})); break;
    }
  }
  return out;
}

std::vector<FunctionSpec> function_corpus(std::uint64_t seed, std::size_t count, int depth) {
  std::mt19937_64 rng(seed);
  auto grid = [&] { return uniform01(rng) < 0.5 ? Grid::Zero : Grid::Third; };
  auto index = [&](int level) { return static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << level)); };
  std::vector<FunctionSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i == 0) {
      out.push_back(FunctionSpec::constant(1.0));
      continue;
    }
    switch (i % 4) {
      case 1: {
        const int level = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(depth + 1)));
        const Grid g = grid();
        out.push_back(FunctionSpec::box(g, level, index(level)));
        break;
      }
      case 2: {
        const int level = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(depth)));
        const Grid g = grid();
        out.push_back(FunctionSpec::top(g, level, index(level)));
        break;
      }
      case 3: {
        const Grid g = grid();
        out.push_back(FunctionSpec::top(g, depth - 1, index(depth - 1)));
        break;
      }
      default:
        out.push_back(FunctionSpec::random(rng()));
        break;
    }
  }
  return out;
}

namespace {

double conjugate(double p) { return p / (p - 1.0); }

void require_strong_params(double p, double r, double t) {
  if (!(p > 1.0)) throw std::invalid_argument("strong-type exponent p must exceed 1");
  if (!(r > 1.0 && r < p)) throw std::invalid_argument("parameter r must satisfy 1 < r < p");
  if (!(t > 1.0 && t < conjugate(p))) throw std::invalid_argument("parameter t must satisfy 1 < t < p'");
}

MeshPtr lift_all(const std::vector<MeshPtr>& meshes, const ArcFamily& family) {
  MeshPtr m = meshes.front();
  for (const auto& x : meshes) m = common_mesh(m, x);
  return family_mesh(m, family);
}

double two_weight_grid(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& mass,
                       const BoxIndex& idx, double p, double r, double t) {
  const double rc = conjugate(r);
  const double tc = conjugate(t);
  const Eigen::VectorXd M = idx.box_sums(mass);
  const Eigen::VectorXd U = idx.box_sums(u.array().pow(-rc / p).matrix().cwiseProduct(mass));
  const Eigen::VectorXd V = idx.box_sums(v.array().pow(tc / p).matrix().cwiseProduct(mass));
  double best = 0.0;
  for (Eigen::Index s = 0; s < M.size(); ++s) {
    best = std::max(best, std::pow(U[s] / M[s], 1.0 / rc) * std::pow(V[s] / M[s], 1.0 / tc));
  }
  return best;
}

InequalityReport base_row(const std::string& theorem, double alpha, int depth, const std::string& weight_id,
                          const std::string& f_id) {
  InequalityReport r;
  r.theorem = theorem;
  r.alpha = alpha;
  r.depth = depth;
  r.weight_id = weight_id;
  r.f_id = f_id;
  return r;
}

double value_at(const RealFunction& f, double angle, double radius) {
  return f[f.mesh().locate(angle, radius)];
}

}  // namespace

double two_weight_constant(const Weight& u, const Weight& v, double p, double r, double t, double alpha,
                           const ArcFamily& family) {
  require_strong_params(p, r, t);
  const MeshPtr mesh = lift_all({u.mesh_ptr(), v.mesh_ptr()}, family);
  const Eigen::VectorXd uv = u.function().on(mesh).values();
  const Eigen::VectorXd vv = v.function().on(mesh).values();
  const Eigen::VectorXd mass = mesh->masses(alpha);
  double best = 0.0;
  for (Grid g : family.grids) {
    best = std::max(best, two_weight_grid(uv, vv, mass, *BoxIndex::get(mesh, g, family.depth), p, r, t));
  }
  return best;
}

std::string to_string(WeakMode mode) {
  switch (mode) {
    case WeakMode::Main1: return "mixed_weak_b1_bp";
    case WeakMode::Main2: return "mixed_weak_b1_b1";
    case WeakMode::Coro: return "weighted_weak_11";
  }
  return {};
}

std::string to_string(StrongMode mode) {
  switch (mode) {
    case StrongMode::Main3: return "strong_bq";
    case StrongMode::Utov: return "two_weight_strong";
    case StrongMode::SparseExplicit: return "sparse_explicit";
    case StrongMode::Mixed1: return "mixed_strong_b1";
    case StrongMode::Mixed2: return "mixed_strong_bq";
  }
  return {};
}

InequalityReport weak_type_report(WeakMode mode, double p, const NamedFunction& f, const Weight& u,
                                  const Weight& v, double alpha, int depth, const KernelMatrix* kernel) {
  if (mode == WeakMode::Coro && !v.is_unit()) throw std::invalid_argument("weak (1,1) mode takes v = 1");
  if (mode == WeakMode::Main1 && !(p > 1.0)) throw std::invalid_argument("mixed weak-type mode needs p > 1");
  const ArcFamily family = ArcFamily::two_grid(depth);
  const Weight uv = product(u, v);
  const RealFunction fv = f.f * v.function();
  const RealFunction h = sparse_both(fv, alpha, depth) / v.function();
  const double norm = lp_norm(f.f, uv.function(), 1.0, alpha);
  if (!(norm > 0.0)) throw std::invalid_argument("test function has zero L1 norm");
  const double lhs = weak_quasinorm(h, uv.function(), alpha) / norm;

  const Weight one = Weight::unit(u.mesh_ptr());
  double rhs = 0.0;
  std::string prov;
  switch (mode) {
    case WeakMode::Main1: {
      const double c = top_regularity_cw(uv, family);
      const double b_uv = binf_constant(uv, family, alpha);
      const double u1 = bp_constant(u, one, 1.0, family, alpha);
      const double vp = bp_constant(v, u, p, family, alpha);
      rhs = (1.0 + std::log(c)) * b_uv * u1 * std::log(std::numbers::e + b_uv * vp * u1);
      prov = "c_uv=" + format_double(c) + ";Binf_uv=" + format_double(b_uv) + ";B1_u=" + format_double(u1) +
             ";Bp_v(u)=" + format_double(vp);
      break;
    }
    case WeakMode::Main2: {
      const double c = top_regularity_cw(v, family);
      const double b_v = binf_constant(v, family, alpha);
      const double v1 = bp_constant(v, one, 1.0, family, alpha);
      const double u1v = bp_constant(u, v, 1.0, family, alpha);
      const double b_uv = binf_constant(uv, family, alpha);
      rhs = (1.0 + std::log(c)) * b_v * v1 * u1v * std::log(std::numbers::e + v1 * b_uv);
      prov = "c_v=" + format_double(c) + ";Binf_v=" + format_double(b_v) + ";B1_v=" + format_double(v1) +
             ";B1_u(v)=" + format_double(u1v) + ";Binf_uv=" + format_double(b_uv);
      break;
    }
    case WeakMode::Coro: {
      const double w1 = bp_constant(u, one, 1.0, family, alpha);
      const double winf = binf_constant(u, family, alpha);
      rhs = w1 * std::log(std::numbers::e + winf);
      prov = "B1=" + format_double(w1) + ";Binf=" + format_double(winf);
      break;
    }
  }
  InequalityReport r = base_row(to_string(mode), alpha, depth, "u=" + u.id() + ";v=" + v.id(), f.id);
  if (mode == WeakMode::Main1) r.p = p;
  r.set_sides(lhs, rhs);
  r.asserted = false;
  r.grid_mode = "two_grid";
  r.provenance = prov;
  if (kernel) {
    const ProjectionSample s = kernel->apply(fv);
    const auto eval = Mesh::dyadic(kernel->spec().eval_depth);
    const Eigen::VectorXd m = eval->masses(alpha);
    Eigen::VectorXd vals(m.size()), wm(m.size()), fl(m.size());
    for (Eigen::Index c = 0; c < m.size(); ++c) {
      const double vz = value_at(v.function(), s.angle[c], s.radius[c]);
      vals[c] = std::abs(s.values[c]) / vz;
      wm[c] = value_at(uv.function(), s.angle[c], s.radius[c]) * m[c];
    }
    r.provenance += ";bergman_lhs=" + format_double(weak_quasinorm_impl(vals, wm) / norm) +
                    ";quadrature=J" + std::to_string(kernel->spec().eval_depth) + "k" +
                    std::to_string(kernel->spec().k);
  }
  return r;
}

double sparse_explicit_factor(double p, double r, double t, double alpha) {
  require_strong_params(p, r, t);
  const double pc = conjugate(p);
  return box_to_top_constant(alpha) * std::pow(2.0, 1.0 / r + 1.0 / t) * std::pow(p / (p - r), 1.0 / p) *
         std::pow(pc / (pc - t), 1.0 / pc);
}

std::vector<InequalityReport> strong_type_report(StrongMode mode, const StrongParams& prm, const NamedFunction& f,
                                                 const Weight& u, const Weight& v, double alpha, int depth,
                                                 const KernelMatrix* kernel) {
  const double p = prm.p;
  if (!(p > 1.0)) throw std::invalid_argument("strong-type exponent p must exceed 1");
  const double pc = conjugate(p);
  const ArcFamily family = ArcFamily::two_grid(depth);
  const Weight one = Weight::unit(u.mesh_ptr());
  RealFunction source = u.function();
  RealFunction target = u.function();
  double rhs = 0.0;
  std::string prov;
  switch (mode) {
    case StrongMode::Main3: {
      if (!(prm.q >= 1.0 && prm.q < p)) throw std::invalid_argument("parameter q must satisfy 1 <= q < p");
      const double c = top_regularity_cw(u, family);
      const double bq = bp_constant(u, one, prm.q, family, alpha);
      const double binf = binf_constant(u, family, alpha);
      rhs = std::pow(c, 1.0 / p) * std::pow(bq, 1.0 / p) * std::pow(binf, 1.0 / pc);
      prov = "c_w=" + format_double(c) + ";Bq=" + format_double(bq) + ";Binf=" + format_double(binf);
      break;
    }
    case StrongMode::Utov:
    case StrongMode::SparseExplicit: {
      require_strong_params(p, prm.r, prm.t);
      target = v.function();
      const double uv = two_weight_constant(u, v, p, prm.r, prm.t, alpha, family);
      rhs = std::pow(p / (p - prm.r), 1.0 / p) * std::pow(pc / (pc - prm.t), 1.0 / pc) * uv;
      prov = "[u,v]=" + format_double(uv);
      break;
    }
    case StrongMode::Mixed1:
    case StrongMode::Mixed2: {
      source = u.function() * pow(v.function(), 1.0 - p);
      target = source;
      const Weight uv = product(u, v);
      const double cv = top_regularity_cw(v, family);
      const double cuv = top_regularity_cw(uv, family);
      const double v1 = bp_constant(v, one, 1.0, family, alpha);
      const double binf_v = binf_constant(v, family, alpha);
      const double binf_uv = binf_constant(uv, family, alpha);
      if (mode == StrongMode::Mixed1) {
        const double u1v = bp_constant(u, v, 1.0, family, alpha);
        rhs = std::pow(cv, 1.0 / pc) * std::pow(cuv, 1.0 / p) * v1 * std::pow(binf_v, 1.0 / p) *
              std::pow(u1v, 1.0 / p) * std::pow(binf_uv, 1.0 / pc);
        prov = "B1_u(v)=" + format_double(u1v);
      } else {
        if (!(prm.q < p)) throw std::invalid_argument("parameter q must be smaller than p");
        const double threshold = std::pow(2.0, alpha + 3.0) * binf_v;
        if (!(prm.q >= threshold)) {
          throw std::invalid_argument("parameter q must be at least 2^(alpha+3) [v]_Binf = " + format_double(threshold));
        }
        const double uqv = bp_constant(u, v, prm.q, family, alpha);
        rhs = std::pow(cv, 1.0 - prm.q / p) * std::pow(cuv, 1.0 / p) * v1 * std::pow(uqv, 1.0 / p) *
              std::pow(binf_uv, 1.0 / pc);
        prov = "Bq_u(v)=" + format_double(uqv);
      }
      prov += ";c_v=" + format_double(cv) + ";c_uv=" + format_double(cuv) + ";B1_v=" + format_double(v1) +
              ";Binf_v=" + format_double(binf_v) + ";Binf_uv=" + format_double(binf_uv);
      break;
    }
  }
  const double denom = lp_norm(f.f, source, p, alpha);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    if (lp_norm(f.f, RealFunction::constant(f.f.mesh_ptr(), 1.0), p, alpha) > 0.0) {
      throw std::range_error("weight for p=" + format_double(p) + " leaves double range on the support of " + f.id);
    }
    throw std::invalid_argument("test function has zero norm");
  }
  const std::string wid = "u=" + u.id() + ";v=" + v.id();
  auto fill = [&](InequalityReport& r) {
    r.p = p;
    r.q = prm.q;
    r.r = prm.r;
    r.t = prm.t;
  };
  std::vector<InequalityReport> out;
  const RealFunction tf = sparse_both(f.f, alpha, depth);
  const double lhs = lp_norm(tf, target, p, alpha) / denom;

  if (mode == StrongMode::SparseExplicit) {
    const double factor = sparse_explicit_factor(p, prm.r, prm.t, alpha);
    double rhs_sum = 0.0;
    for (Grid g : kGrids) {
      const double uv = two_weight_constant(u, v, p, prm.r, prm.t, alpha, ArcFamily::single(depth, g));
      const RealFunction tg = sparse_apply(f.f, g, alpha, depth).values;
      InequalityReport r = base_row(to_string(mode), alpha, depth, wid, f.id);
      fill(r);
      r.set_sides(lp_norm(tg, target, p, alpha) / denom, factor * uv);
      r.pass = within(r.lhs, r.rhs_explicit);
      r.failed = r.pass ? 0 : 1;
      r.grid_mode = "grid(" + bergman::to_string(g) + ")";
      r.provenance = "factor=" + format_double(factor) + ";[u,v]=" + format_double(uv);
      rhs_sum += r.rhs_explicit;
      out.push_back(r);
    }
    InequalityReport r = base_row(to_string(mode), alpha, depth, wid, f.id);
    fill(r);
    r.set_sides(lhs, rhs_sum);
    r.pass = within(r.lhs, r.rhs_explicit);
    r.failed = r.pass ? 0 : 1;
    r.grid_mode = "two_grid_sum";
    r.provenance = "factor=" + format_double(factor);
    out.push_back(r);
    return out;
  }

  InequalityReport r = base_row(to_string(mode), alpha, depth, wid, f.id);
  fill(r);
  r.set_sides(lhs, rhs);
  r.asserted = false;
  r.grid_mode = "two_grid";
  r.provenance = prov;
  if (kernel) {
    const ProjectionSample s = kernel->apply(f.f);
    const Eigen::VectorXd m = Mesh::dyadic(kernel->spec().eval_depth)->masses(alpha);
    double acc = 0.0;
    for (Eigen::Index c = 0; c < m.size(); ++c) {
      acc += std::pow(std::abs(s.values[c]), p) * value_at(target, s.angle[c], s.radius[c]) * m[c];
    }
    r.provenance += ";bergman_lhs=" + format_double(std::pow(acc, 1.0 / p) / denom);
  }
  out.push_back(r);
  return out;
}

namespace {

struct Worst {
  InequalityReport row;
  double worst = -1.0;

  void add(double lhs, double rhs, const std::string& witness, double tol = kRelTol) {
    ++row.checked;
    if (!within(lhs, rhs, tol)) ++row.failed;
    if (lhs / rhs > worst) {
      worst = lhs / rhs;
      row.set_sides(lhs, rhs);
      row.witness = witness;
    }
    row.pass = row.failed == 0;
  }
};

}  // namespace

std::vector<InequalityReport> class_algebra_check(const Weight& u, const Weight& v, double p, double q,
                                                  double alpha, const ArcFamily& family,
                                                  const std::vector<NamedFunction>& functions) {
  if (!(p >= 1.0)) throw std::invalid_argument("class algebra check needs p >= 1");
  if (!(q > 0.0)) throw std::invalid_argument("class algebra check needs q > 0");
  std::vector<MeshPtr> meshes{u.mesh_ptr(), v.mesh_ptr()};
  for (const auto& f : functions) meshes.push_back(f.f.mesh_ptr());
  const MeshPtr mesh = lift_all(meshes, family);
  const Weight one = Weight::unit(u.mesh_ptr());
  const double u1 = bp_constant(u, one, 1.0, family, alpha);
  const double vpu = bp_constant(v, u, p, family, alpha);
  const Eigen::VectorXd mass = mesh->masses(alpha);
  const Eigen::VectorXd uu = u.function().on(mesh).values();
  const Eigen::VectorXd vv = v.function().on(mesh).values();
  const Eigen::VectorXd uv = uu.cwiseProduct(vv);
  const std::string wid = "u=" + u.id() + ";v=" + v.id();

  std::vector<InequalityReport> out;
  for (Grid g : family.grids) {
    const auto idx = BoxIndex::get(mesh, g, family.depth);
    const std::string mode = "grid(" + bergman::to_string(g) + ")";
    Worst prod;
    prod.row = base_row("weight_product", alpha, family.depth, wid, "");
    prod.row.p = p;
    prod.row.checked = 0;
    prod.row.grid_mode = mode;
    prod.row.provenance = "B1_u=" + format_double(u1) + ";Bp_v(u)=" + format_double(vpu);
    const double rhs = std::pow(u1, p) * vpu;
    const Eigen::VectorXd M = idx->box_sums(mass);
    const Eigen::VectorXd UV = idx->box_sums(uv.cwiseProduct(mass));
    if (p > 1.0) {
      const Eigen::VectorXd D = idx->box_sums(uv.array().pow(-1.0 / (p - 1.0)).matrix().cwiseProduct(mass));
      for (std::size_t s = 0; s < idx->slot_count(); ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        prod.add((UV[si] / M[si]) * std::pow(D[si] / M[si], p - 1.0), rhs, idx->arc(s).label());
      }
    } else {
      for (std::size_t s = 0; s < idx->slot_count(); ++s) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t c : idx->box_cells(s)) lo = std::min(lo, uv[static_cast<Eigen::Index>(c)]);
        const auto si = static_cast<Eigen::Index>(s);
        prod.add((UV[si] / M[si]) / lo, rhs, idx->arc(s).label());
      }
    }
    out.push_back(prod.row);

    Worst change;
    change.row = base_row("weight_change", alpha, family.depth, wid, "");
    change.row.p = p;
    change.row.q = q;
    change.row.checked = 0;
    change.row.grid_mode = mode;
    change.row.provenance = "Bp_v(u)=" + format_double(vpu);
    const Eigen::VectorXd U = idx->box_sums(uu.cwiseProduct(mass));
    for (const auto& f : functions) {
      const Eigen::VectorXd af = f.f.on(mesh).values().cwiseAbs();
      const Eigen::VectorXd Fq = idx->box_sums(af.array().pow(q).matrix().cwiseProduct(uu).cwiseProduct(mass));
      const Eigen::VectorXd Fpq = idx->box_sums(af.array().pow(p * q).matrix().cwiseProduct(uv).cwiseProduct(mass));
      for (std::size_t s = 0; s < idx->slot_count(); ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        change.add(Fq[si] / U[si], std::pow(vpu, 1.0 / p) * std::pow(Fpq[si] / UV[si], 1.0 / p),
                   f.id + "@" + idx->arc(s).label());
      }
    }
    if (change.row.checked > 0) out.push_back(change.row);
  }
  return out;
}

std::vector<InequalityReport> maximal_weak_report(const NamedFunction& f, const Weight& w, Grid grid,
                                                  double alpha, const std::vector<double>& lambdas) {
  const RealFunction mf = dyadic_maximal(f.f, w, grid, alpha);
  const Eigen::VectorXd wm = w.function().on(mf.mesh_ptr()).values().cwiseProduct(mf.mesh().masses(alpha));
  const double norm = lp_norm(f.f.on(mf.mesh_ptr()), w.function(), 1.0, alpha);
  Worst row;
  row.row = base_row("maximal_weak_11", alpha, mf.mesh().depth(), w.id(), f.id);
  row.row.checked = 0;
  row.row.grid_mode = "grid(" + bergman::to_string(grid) + ")";
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    double lhs = 0.0;
    for (Eigen::Index c = 0; c < wm.size(); ++c) {
      if (mf.values()[c] > lambda) lhs += wm[c];
    }
    row.add(lhs, norm / lambda, "lambda=" + format_double(lambda), 0.0);
  }
  return {row.row};
}

InequalityReport maximal_strong_report(const NamedFunction& f, Grid grid, double p, double alpha) {
  if (!(p > 1.0)) throw std::invalid_argument("maximal strong bound needs p > 1");
  const Weight one = Weight::unit(f.f.mesh_ptr());
  const RealFunction mf = dyadic_maximal(f.f, one, grid, alpha);
  InequalityReport r = base_row("maximal_strong", alpha, mf.mesh().depth(), "unit", f.id);
  r.p = p;
  r.grid_mode = "grid(" + bergman::to_string(grid) + ")";
  const RealFunction unit_w = RealFunction::constant(mf.mesh_ptr(), 1.0);
  r.set_sides(lp_norm(mf, unit_w, p, alpha) / lp_norm(f.f, unit_w, p, alpha),
              2.0 * std::pow(conjugate(p), 1.0 / p));
  r.pass = within(r.lhs, r.rhs_explicit);
  r.failed = r.pass ? 0 : 1;
  return r;
}

double sparse_domination_ratio(const RealFunction& f, const KernelMatrix& kernel, int depth) {
  const ProjectionSample s = kernel.apply(f);
  const RealFunction t = sparse_both(f, kernel.alpha(), depth);
  double best = 0.0;
  for (std::size_t i = 0; i < s.angle.size(); ++i) {
    const double tv = value_at(t, s.angle[i], s.radius[i]);
    best = std::max(best, std::abs(s.values[static_cast<Eigen::Index>(i)]) / tv);
  }
  return best;
}

}  // namespace bergman
