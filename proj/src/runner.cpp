#include "bergman/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bergman/operators.hpp"
#include "bergman/projection.hpp"
#include "bergman/random.hpp"
#include "bergman/selection.hpp"
#include "bergman/serialize.hpp"
#include "bergman/sharpness.hpp"

namespace bergman {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys{
    "experiment", "name",  "alpha",          "depth",        "k",       "eval_depth",    "seed",
    "weights",    "weight_count", "functions", "function_count", "p",   "q",             "r",
    "t",          "j",     "modes",          "scenario_count", "sweep_family", "sweep_params", "budget",
    "bergman",    "export"};

template <typename T>
T field(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
std::vector<T> list_field(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (v.is_array()) return field<std::vector<T>>(j, key, where);
  return {field<T>(j, key, where)};
}

bool uses_weights(const std::string& e) {
  return e == "constants" || e == "verify-rh" || e == "verify-selection" || e == "verify-packing" ||
         e == "verify-maximal" || e == "verify-classes" || e == "verify-weak" || e == "verify-strong";
}

bool uses_function_corpus(const ExperimentConfig& c) {
  const std::string& e = c.experiment;
  if (e == "project") return c.functions.empty() && c.function_count > 0;
  return (e == "verify-selection" || e == "verify-maximal" || e == "verify-classes" || e == "verify-weak" ||
          e == "verify-strong") &&
         c.functions.empty();
}

const std::map<std::string, std::vector<std::string>> kModes{
    {"verify-weak", {"main1", "main2", "coro"}},
    {"verify-strong", {"main3", "utov", "sparse_explicit", "mixed1", "mixed2"}}};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
  }
  if (!j.contains("experiment")) throw ConfigError(where + ": missing field 'experiment'");
  ExperimentConfig c;
  c.experiment = field<std::string>(j, "experiment", where);
  if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end()) {
    throw ConfigError(where + ": field 'experiment' has unknown value '" + c.experiment + "'");
  }
  c.name = j.contains("name") ? field<std::string>(j, "name", where) : c.experiment;
  if (c.name.empty() || c.name.find('/') != std::string::npos) {
    throw ConfigError(where + ": field 'name' must be a plain file stem");
  }
  if (j.contains("alpha")) c.alpha = list_field<double>(j, "alpha", where);
  if (c.alpha.empty()) throw ConfigError(where + ": field 'alpha' is empty");
  for (double a : c.alpha) {
    if (!(a > -1.0)) throw ConfigError(where + ": field 'alpha' needs values > -1");
  }
  if (j.contains("depth")) c.depth = field<int>(j, "depth", where);
  if (c.depth < 1 || c.depth >= Mesh::kMaxDepth) throw ConfigError(where + ": field 'depth' out of range");
  if (j.contains("k")) c.k = field<int>(j, "k", where);
  if (c.k < 1) throw ConfigError(where + ": field 'k' must be >= 1");
  if (j.contains("eval_depth")) {
    c.eval_depth = field<int>(j, "eval_depth", where);
    if (*c.eval_depth < 1 || *c.eval_depth >= Mesh::kMaxDepth) {
      throw ConfigError(where + ": field 'eval_depth' out of range");
    }
  }
  if (j.contains("seed")) c.seed = field<std::uint64_t>(j, "seed", where);
  if (j.contains("weights")) {
    const json& ws = j.at("weights");
    if (!ws.is_array()) throw ConfigError(where + ": field 'weights' must be an array");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      try {
        c.weights.push_back(WeightSpec::from_json(ws[i]));
      } catch (const std::exception& e) {
        throw ConfigError(where + ".weights[" + std::to_string(i) + "]: " + e.what());
      }
    }
  }
  if (j.contains("functions")) {
    const json& fs = j.at("functions");
    if (!fs.is_array()) throw ConfigError(where + ": field 'functions' must be an array");
    for (std::size_t i = 0; i < fs.size(); ++i) {
      try {
        c.functions.push_back(FunctionSpec::from_json(fs[i]));
      } catch (const std::exception& e) {
        throw ConfigError(where + ".functions[" + std::to_string(i) + "]: " + e.what());
      }
    }
  }
  if (j.contains("weight_count")) c.weight_count = field<std::size_t>(j, "weight_count", where);
  if (j.contains("function_count")) c.function_count = field<std::size_t>(j, "function_count", where);
  if (j.contains("scenario_count")) c.scenario_count = field<std::size_t>(j, "scenario_count", where);
  if (j.contains("p")) c.p = list_field<double>(j, "p", where);
  if (j.contains("q")) c.q = list_field<double>(j, "q", where);
  if (j.contains("r")) c.r = field<double>(j, "r", where);
  if (j.contains("t")) c.t = field<double>(j, "t", where);
  if (j.contains("j")) c.j = list_field<int>(j, "j", where);
  for (int b : c.j) {
    if (b < 0) throw ConfigError(where + ": field 'j' needs non-negative bands");
  }
  for (double p : c.p) {
    if (!(p >= 1.0)) throw ConfigError(where + ": field 'p' needs values >= 1");
  }
  if (j.contains("modes")) {
    c.modes = list_field<std::string>(j, "modes", where);
    const auto it = kModes.find(c.experiment);
    if (it == kModes.end()) throw ConfigError(where + ": field 'modes' does not apply to " + c.experiment);
    for (const auto& m : c.modes) {
      if (std::find(it->second.begin(), it->second.end(), m) == it->second.end()) {
        throw ConfigError(where + ": field 'modes' has unknown value '" + m + "'");
      }
    }
  }
  if (j.contains("sweep_family")) c.sweep_family = field<std::string>(j, "sweep_family", where);
  if (c.sweep_family != "power" && c.sweep_family != "random_spiked") {
    throw ConfigError(where + ": field 'sweep_family' must be \"power\" or \"random_spiked\"");
  }
  if (j.contains("sweep_params")) c.sweep_params = list_field<double>(j, "sweep_params", where);
  if (j.contains("budget")) c.budget = field<int>(j, "budget", where);
  if (c.budget < 1) throw ConfigError(where + ": field 'budget' must be >= 1");
  if (j.contains("bergman")) c.bergman = field<bool>(j, "bergman", where);
  if (j.contains("export")) c.export_data = field<bool>(j, "export", where);
  return c;
}

json ExperimentConfig::to_json() const {
  json j{{"experiment", experiment}, {"name", name}, {"alpha", alpha}, {"depth", depth}, {"k", k}};
  if (eval_depth) j["eval_depth"] = *eval_depth;
  if (seed) j["seed"] = *seed;
  if (!weights.empty()) {
    json ws = json::array();
    for (const auto& w : weights) ws.push_back(w.to_json());
    j["weights"] = ws;
  }
  if (!functions.empty()) {
    json fs = json::array();
    for (const auto& f : functions) fs.push_back(f.to_json());
    j["functions"] = fs;
  }
  if (weight_count) j["weight_count"] = weight_count;
  if (function_count) j["function_count"] = function_count;
  if (scenario_count) j["scenario_count"] = scenario_count;
  if (!p.empty()) j["p"] = p;
  if (!q.empty()) j["q"] = q;
  if (r) j["r"] = *r;
  if (t) j["t"] = *t;
  if (!this->j.empty()) j["j"] = this->j;
  if (!modes.empty()) j["modes"] = modes;
  if (experiment == "sweep-sharpness") {
    j["sweep_family"] = sweep_family;
    if (!sweep_params.empty()) j["sweep_params"] = sweep_params;
  }
  if (experiment == "search-sharpness") j["budget"] = budget;
  if (bergman) j["bergman"] = true;
  if (export_data) j["export"] = true;
  return j;
}

bool ExperimentConfig::randomized() const {
  if (experiment == "verify-rh" || experiment == "verify-selection" || experiment == "verify-packing" ||
      experiment == "search-sharpness") {
    return true;
  }
  if (uses_weights(experiment) && weights.empty()) return true;
  if (uses_function_corpus(*this)) return true;
  return experiment == "sweep-sharpness" && sweep_family == "random_spiked";
}

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw ConfigError(name + ": field 'seed' is required for experiment '" + experiment + "'");
  return *seed;
}

std::vector<ExperimentConfig> parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (!j.contains("suite")) return {ExperimentConfig::from_json(j)};
  const json& suite = j.at("suite");
  if (!suite.is_array() || suite.empty()) throw ConfigError("config: field 'suite' must be a non-empty array");
  json defaults = j;
  defaults.erase("suite");
  for (const auto& [key, value] : defaults.items()) {
    if (!kConfigKeys.count(key) || key == "experiment" || key == "name") {
      throw ConfigError("config: unknown suite-level field '" + key + "'");
    }
  }
  std::vector<ExperimentConfig> out;
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const std::string where = "suite[" + std::to_string(i) + "]";
    if (!suite[i].is_object()) throw ConfigError(where + ": expected a JSON object");
    json merged = defaults;
    merged.update(suite[i]);
    ExperimentConfig c = ExperimentConfig::from_json(merged, where);
    if (seen[c.name]++) c.name += "-" + std::to_string(i);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ExperimentConfig> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json ExperimentResult::summary_json() const {
  json prov{{"depth", config.depth},
            {"alpha", config.alpha},
            {"relative_tolerance", kRelTol},
            {"constants", "family-restricted lower bounds: dyadic arcs of the grids in use up to the depth, plus the root"},
            {"rows", rows.size()}};
  if (config.seed) prov["seed"] = *config.seed;
  return {{"experiment", config.experiment},
          {"name", config.name},
          {"pass_count", summary.pass_count},
          {"fail_count", summary.fail_count},
          {"max_ratio", summary.max_ratio},
          {"provenance", prov},
          {"config", config.to_json()},
          {"details", extra}};
}

namespace {

InequalityReport make_row(const std::string& theorem, double alpha, int depth) {
  InequalityReport r;
  r.theorem = theorem;
  r.alpha = alpha;
  r.depth = depth;
  return r;
}

void decide(InequalityReport& r, bool pass) {
  r.asserted = true;
  r.pass = pass;
  r.failed = pass ? 0 : 1;
}

InequalityReport ratio_row(const std::string& theorem, double alpha, int depth, double lhs, double rhs) {
  InequalityReport r = make_row(theorem, alpha, depth);
  r.set_sides(lhs, rhs);
  r.asserted = false;
  return r;
}

/// Many instances folded into one row carrying the largest lhs/rhs.
struct Fold {
  InequalityReport row;
  double worst = -std::numeric_limits<double>::infinity();

  Fold(const std::string& theorem, double alpha, int depth) : row(make_row(theorem, alpha, depth)) {
    row.checked = 0;
  }

  void add(double lhs, double rhs, bool pass, const std::string& witness) {
    ++row.checked;
    if (!pass) ++row.failed;
    const double ratio = lhs / rhs;
    if (ratio > worst || (!pass && row.failed == 1)) {
      worst = ratio;
      row.set_sides(lhs, rhs);
      row.witness = witness;
    }
    row.pass = row.failed == 0;
  }
  void add(double lhs, double rhs, const std::string& witness, double tol = kRelTol) {
    add(lhs, rhs, within(lhs, rhs, tol), witness);
  }
};

std::size_t default_weight_count(const std::string& e) {
  if (e == "verify-rh") return 200;
  if (e == "constants" || e == "verify-selection" || e == "verify-packing") return 20;
  if (e == "verify-maximal") return 10;
  if (e == "verify-classes") return 6;
  return 8;
}

std::size_t default_function_count(const std::string& e) {
  if (e == "verify-selection") return 20;
  if (e == "verify-maximal") return 10;
  if (e == "verify-classes") return 6;
  return 8;
}

std::vector<WeightSpec> weight_specs(const ExperimentConfig& c, double alpha) {
  const std::size_t default_count = default_weight_count(c.experiment);
  if (!c.weights.empty()) return c.weights;
  std::vector<WeightSpec> specs{WeightSpec::unit()};
  for (auto& s : weight_corpus(c.require_seed(), c.weight_count ? c.weight_count : default_count, alpha, c.depth)) {
    specs.push_back(s);
  }
  return specs;
}

std::vector<Weight> weight_set(const ExperimentConfig& c, double alpha, int depth) {
  std::vector<Weight> out;
  for (const auto& s : weight_specs(c, alpha)) out.push_back(make_weight(s, alpha, depth));
  return out;
}

std::vector<FunctionSpec> function_specs(const ExperimentConfig& c) {
  const std::size_t default_count = default_function_count(c.experiment);
  if (!c.functions.empty()) return c.functions;
  return function_corpus(c.require_seed() + 1, c.function_count ? c.function_count : default_count, c.depth);
}

std::vector<NamedFunction> function_set(const ExperimentConfig& c, int depth) {
  std::vector<NamedFunction> out;
  for (const auto& s : function_specs(c)) out.push_back(make_function(s, depth));
  return out;
}

std::string alpha_tag(double alpha) { return "alpha" + format_double(alpha); }

void export_corpus(ExperimentResult& res, const std::vector<Weight>& ws, const std::vector<NamedFunction>& fs,
                   double alpha) {
  if (!res.config.export_data) return;
  json out{{"weights", json::array()}, {"functions", json::array()}};
  for (const auto& w : ws) out["weights"].push_back({{"id", w.id()}, {"values", to_json(w.function(), {alpha})}});
  for (const auto& f : fs) out["functions"].push_back({{"id", f.id}, {"values", to_json(f.f, {alpha})}});
  res.attachments.emplace_back(res.config.name + "-corpus-" + alpha_tag(alpha) + ".json", out.dump(1) + "\n");
}

// ---------------------------------------------------------------------------

void geometry_selftest(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  for (double alpha : c.alpha) {
    Fold add("box_additivity", alpha, J);
    Fold bound("top_half_bound", alpha, std::max(J, 12));
    Fold part("level_partition", alpha, J);
    const double delta = std::pow(0.75, alpha + 1.0);
    for (Grid g : kGrids) {
      for (int level = 0; level <= std::max(J, 12); ++level) {
        double level_sum = 0.0;
        for (std::int64_t m = 0; m < (std::int64_t{1} << level); ++m) {
          const DyadicArc a = DyadicArc::make(g, level, m);
          const double S = region_mass(a.box(), alpha);
          const double T = region_mass(a.top(), alpha);
          bound.add((1.0 - delta) * S, T, a.label());
          if (level < J) {
            double C = 0.0;
            for (const auto& ch : a.children()) C += region_mass(ch.box(), alpha);
            add.add(std::abs(S - T - C), 1e-12 * S, a.label(), 0.0);
          }
          level_sum += S;
        }
        if (level <= J) {
          const double ring = annulus_mass(1.0 - std::ldexp(1.0, -level), 1.0, alpha);
          part.add(std::abs(level_sum - ring), 1e-12 * ring, "D" + to_string(g) + ":" + std::to_string(level), 0.0);
        }
      }
    }
    add.row.provenance = "|S_I| = |T_I| + sum over children |S_child|";
    bound.row.provenance = "(1-(3/4)^(alpha+1))|S_I| <= |T_I|";
    part.row.provenance = "sum over a level of |S_I| = annulus mass";
    res.rows.push_back(add.row);
    res.rows.push_back(bound.row);
    res.rows.push_back(part.row);

    const DyadicArc whole = DyadicArc::make(Grid::Zero, 0, 0);
    InequalityReport eq = make_row("top_half_bound_equality", alpha, 0);
    const double gap = region_mass(whole.top(), alpha) - (1.0 - delta) * region_mass(whole.box(), alpha);
    eq.set_sides(std::abs(gap), 1e-12);
    decide(eq, gap >= -1e-15 && std::abs(gap) < 1e-12);
    eq.witness = whole.label();
    eq.provenance = "gap at h=1";
    res.rows.push_back(eq);

    Fold mesh("mesh_partition", alpha, J);
    for (const MeshPtr& m : {Mesh::dyadic(J), Mesh::overlay(J)}) {
      const Eigen::VectorXd w = m->masses(alpha);
      mesh.add(std::abs(w.sum() - 1.0), 1e-12, w.minCoeff() > 0.0 && std::abs(w.sum() - 1.0) <= 1e-12,
               m->is_overlay() ? "overlay" : "dyadic");
    }
    mesh.row.provenance = "cells partition the disk; all masses positive";
    res.rows.push_back(mesh.row);
  }
  InequalityReport nav = make_row("arc_navigation", c.alpha.front(), J);
  const auto anc = ancestors(Grid::Zero, 0.1, 0.9);
  bool ok = anc.size() == 4;
  for (std::size_t i = 0; ok && i < anc.size(); ++i) ok = anc[i].level == static_cast<int>(i);
  const auto ch = DyadicArc::make(Grid::Zero, 0, 0).children();
  ok = ok && ch.size() == 2 && ch[0] == DyadicArc::make(Grid::Zero, 1, 0) && ch[1] == DyadicArc::make(Grid::Zero, 1, 1);
  ok = ok && DyadicArc::make(Grid::Zero, 1, 0).box_contains(0.25 - 1e-9, 0.6);
  nav.set_sides(static_cast<double>(anc.size()), 4.0);
  decide(nav, ok);
  nav.witness = "ancestors(0.1, 0.9)";
  nav.provenance = "levels 0..3; children of D0:0:0; box of D0:1:0 contains (0.25-, 0.6)";
  res.rows.push_back(nav);
}

void constants(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const std::vector<double> ps{1.0, 1.5, 2.0, 3.0, 4.0};
  json table = json::array();
  for (double alpha : c.alpha) {
    const ArcFamily fam = ArcFamily::two_grid(J);
    for (const Weight& w : weight_set(c, alpha, J)) {
      const Weight one = Weight::unit(w.mesh_ptr());
      std::vector<double> bp;
      for (double p : ps) bp.push_back(bp_constant(w, one, p, fam, alpha));
      Fold mono("bp_monotone_in_p", alpha, J);
      mono.row.weight_id = w.id();
      for (std::size_t i = 1; i < ps.size(); ++i) {
        mono.add(bp[i], bp[i - 1], "p=" + format_double(ps[i - 1]) + "->" + format_double(ps[i]));
      }
      mono.row.grid_mode = "two_grid";
      res.rows.push_back(mono.row);

      const double b0 = binf_constant(w, ArcFamily::single(J, Grid::Zero), alpha);
      const double b3 = binf_constant(w, ArcFamily::single(J, Grid::Third), alpha);
      const double b2 = binf_constant(w, fam, alpha);
      Fold nest("binf_grid_nesting", alpha, J);
      nest.row.weight_id = w.id();
      nest.add(b0, b2, "grid(0)");
      nest.add(b3, b2, "grid(1/3)");
      nest.row.grid_mode = "grid<=two_grid";
      res.rows.push_back(nest.row);

      const double cw = top_regularity_cw(w, fam);
      json rowj{{"alpha", alpha}, {"weight_id", w.id()}, {"binf_grid0", b0}, {"binf_grid13", b3},
                {"binf_two_grid", b2}, {"c_w", cw}};
      for (std::size_t i = 0; i < ps.size(); ++i) rowj["bp_" + format_double(ps[i])] = bp[i];
      table.push_back(rowj);
    }
  }
  res.extra["constants"] = table;
}

void project(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const int E = c.eval_depth.value_or(J);
  const std::vector<FunctionSpec> fspecs =
      (!c.functions.empty() || c.function_count > 0) ? function_specs(c) : std::vector<FunctionSpec>{};
  for (double alpha : c.alpha) {
    const QuadratureSpec spec{E, c.k, 4};
    const std::string quad = "J=" + std::to_string(E) + ";k=" + std::to_string(c.k) + ";near_factor=4";

    const ProjectionSample one = bergman_project(RealFunction::constant(Mesh::dyadic(J), 1.0), alpha, E, c.k);
    const double e1 = (one.values.array() - 1.0).abs().maxCoeff();
    InequalityReport r1 = make_row("reproducing_constants", alpha, E);
    r1.set_sides(e1, 1e-3);
    decide(r1, e1 <= 1e-3);
    r1.f_id = "const:1";
    r1.provenance = quad + ";perturbed=" + std::to_string(one.perturbed) + ";sup |P1 - 1|";
    res.rows.push_back(r1);

    const ProjectionSample conj =
        bergman_project([](std::complex<double> z) { return std::conj(z); }, alpha, E, c.k);
    const double e2 = conj.values.cwiseAbs().maxCoeff();
    InequalityReport r2 = make_row("antiholomorphic_annihilation", alpha, E);
    r2.set_sides(e2, 1e-3);
    decide(r2, e2 <= 1e-3);
    r2.f_id = "conj(z)";
    r2.provenance = quad + ";perturbed=" + std::to_string(conj.perturbed) + ";sup |P conj(z)|";
    res.rows.push_back(r2);

    const ProjectionSample rad =
        bergman_project([](std::complex<double> z) { return std::complex<double>(std::norm(z), 0.0); }, alpha, E, c.k);
    const double e3 = (rad.values.array() - 1.0 / (2.0 + alpha)).abs().maxCoeff();
    InequalityReport r3 = make_row("radial_projection", alpha, E);
    r3.set_sides(e3, 1e-3);
    decide(r3, e3 <= 1e-3);
    r3.f_id = "|z|^2";
    r3.provenance = quad + ";perturbed=" + std::to_string(rad.perturbed) + ";sup |P|z|^2 - 1/(2+alpha)|";
    res.rows.push_back(r3);

    std::ostringstream csv;
    write_projection_csv(csv, one);
    res.attachments.emplace_back(c.name + "-P1-" + alpha_tag(alpha) + ".csv", csv.str());

    if (fspecs.empty()) continue;
    const KernelMatrix kernel(Mesh::overlay(J), alpha, spec);
    for (const auto& s : fspecs) {
      const NamedFunction f = make_function(s, J);
      const double ratio = sparse_domination_ratio(abs(f.f), kernel, J);
      InequalityReport r = ratio_row("sparse_domination", alpha, J, ratio, 1.0);
      r.f_id = f.id;
      r.grid_mode = "two_grid";
      r.provenance = quad + ";max |P f| / (T^0 f + T^(1/3) f) over evaluation points";
      res.rows.push_back(r);
    }
  }
}

void verify_rh(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  for (double alpha : c.alpha) {
    for (const Weight& w : weight_set(c, alpha, c.depth)) {
      for (auto& r : reverse_holder_report(w, alpha, ArcFamily::two_grid(c.depth), c.require_seed())) {
        res.rows.push_back(r);
      }
    }
  }
}

void verify_selection(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const std::size_t target = c.scenario_count ? c.scenario_count : 120;
  std::mt19937_64 rng(c.require_seed() + 2);

  InequalityReport n0 = make_row("stopping_depth", 0.0, J);
  const int n0v = stopping_depth(0.0, 1.0, 1.0);
  n0.set_sides(n0v, 109.0);
  decide(n0, n0v == 109);
  n0.witness = "alpha=0;c_w=1;B=1";
  res.rows.push_back(n0);

  json certs = json::array();
  for (double alpha : c.alpha) {
    const std::vector<Weight> ws = weight_set(c, alpha, J);
    const std::vector<NamedFunction> fs = function_set(c, J);
    Fold identity("exceptional_set_identity", alpha, J);
    identity.row.provenance = "n0 override 2: |E_I| + removed boxes = |S_I|";
    std::size_t made = 0;
    for (std::size_t attempt = 0; made < target && attempt < 20 * target; ++attempt) {
      const Weight& w = ws[uniform_index(rng, ws.size())];
      const NamedFunction& f = fs[uniform_index(rng, fs.size())];
      const Grid grid = uniform01(rng) < 0.5 ? Grid::Zero : Grid::Third;
      const int level = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(std::max(1, J - 2))));
      const DyadicArc arc = DyadicArc::make(grid, level, static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << level)));
      const double top = f.f.values().cwiseAbs().maxCoeff();
      if (!(top > 0.0)) continue;
      const RealFunction fn = (1.0 / top) * abs(f.f);
      const double avg = weighted_average(fn, w.function(), arc.box(), alpha);
      if (!(avg > 0.0)) continue;
      const int band = c.j.empty() ? std::max(0, static_cast<int>(std::floor(-std::log2(avg))))
                                   : c.j[made % c.j.size()];
      const SelectionCertificate cert = exceptional_sets(fn, w, grid, band, alpha, J);
      if (cert.arcs.empty()) continue;
      ++made;
      const std::string fid = f.id + "/" + format_double(top);
      Fold factor("exceptional_set_factor", alpha, J);
      factor.row.weight_id = w.id();
      factor.row.f_id = fid;
      factor.row.grid_mode = "grid(" + to_string(grid) + ")";
      for (const auto& a : cert.arcs) factor.add(a.box_integral, 6.0 * a.kept_integral, a.pass, a.arc.label());
      factor.row.provenance = "j=" + std::to_string(band) + ";n0=" + std::to_string(cert.n0) +
                              ";starved=" + std::to_string(cert.starved) + ";layers=" + std::to_string(cert.layers.size());
      res.rows.push_back(factor.row);

      InequalityReport ov = make_row("exceptional_set_overlap", alpha, J);
      ov.weight_id = w.id();
      ov.f_id = fid;
      ov.grid_mode = factor.row.grid_mode;
      ov.set_sides(cert.max_overlap, cert.n0);
      decide(ov, cert.overlap_pass);
      ov.provenance = "j=" + std::to_string(band) + ";c_w=" + format_double(cert.cw) + ";B_inf=" +
                      format_double(cert.binf) + ";n0/((1+log c_w)B)=" + format_double(cert.overlap_constant_ratio);
      res.rows.push_back(ov);

      const SelectionCertificate cut = exceptional_sets(fn, w, grid, band, alpha, J, 2);
      for (const auto& a : cut.arcs) {
        identity.add(std::abs(a.kept_mass + a.removed_mass - a.box_mass), 1e-12 * a.box_mass,
                     fid + "@" + a.arc.label(), 0.0);
      }
      if (c.export_data) certs.push_back(cert.to_json());
    }
    res.rows.push_back(identity.row);
    res.extra["scenarios_" + alpha_tag(alpha)] = made;
  }
  if (c.export_data) res.attachments.emplace_back(c.name + "-certificates.json", certs.dump(1) + "\n");
}

std::vector<DyadicArc> packing_scenario(std::size_t s, Grid grid, int J, std::mt19937_64& rng) {
  auto arc = [&](int level) {
    return DyadicArc::make(grid, level, static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << level)));
  };
  auto level = [&](int lo) { return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(J - lo + 1))); };
  std::vector<DyadicArc> out;
  switch (s % 4) {
    case 0: {
      const int l = level(0);
      for (std::int64_t m = 0; m < (std::int64_t{1} << l); ++m) out.push_back(DyadicArc::make(grid, l, m));
      break;
    }
    case 1: {
      const std::size_t n = 1 + uniform_index(rng, 50);
      for (std::size_t i = 0; i < n; ++i) out.push_back(arc(level(0)));
      break;
    }
    case 2: {
      DyadicArc a = arc(level(std::min(J, 4)));
      for (int i = 0; i < 5 && a.level >= 0; ++i, a = a.parent()) out.push_back(a);
      break;
    }
    default:
      out.push_back(arc(level(0)));
      break;
  }
  return out;
}

void verify_packing(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const std::size_t target = c.scenario_count ? c.scenario_count : 200;
  std::mt19937_64 rng(c.require_seed() + 2);
  for (double alpha : c.alpha) {
    const std::vector<Weight> ws = weight_set(c, alpha, J);
    if (J >= 2) {
      std::vector<DyadicArc> level2;
      for (std::int64_t m = 0; m < 4; ++m) level2.push_back(DyadicArc::make(Grid::Zero, 2, m));
      InequalityReport r = packing_check(level2, Weight::unit(Mesh::dyadic(J)), alpha, J);
      r.witness = "all level-2 arcs";
      res.rows.push_back(r);
    }
    for (std::size_t s = 0; s < target; ++s) {
      const Weight& w = ws[s % ws.size()];
      const Grid grid = uniform01(rng) < 0.5 ? Grid::Zero : Grid::Third;
      const auto arcs = packing_scenario(s, grid, J, rng);
      InequalityReport r = packing_check(arcs, w, alpha, J);
      r.witness = std::string(s % 4 == 0 ? "level" : s % 4 == 1 ? "random" : s % 4 == 2 ? "chain" : "singleton") +
                  ":" + arcs.front().label();
      res.rows.push_back(r);
    }
  }
}

void verify_maximal(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const std::vector<double> ps = c.p.empty() ? std::vector<double>{1.5, 2.0, 3.0} : c.p;
  for (double p : ps) {
    if (!(p > 1.0)) throw ConfigError(c.name + ": field 'p' needs values > 1 for verify-maximal");
  }
  std::size_t triples = 0;
  for (double alpha : c.alpha) {
    const std::vector<Weight> ws = weight_set(c, alpha, J);
    const std::vector<NamedFunction> fs = function_set(c, J);
    for (const Weight& w : ws) {
      for (const auto& f : fs) {
        for (Grid g : kGrids) {
          const RealFunction mf = dyadic_maximal(f.f, w, g, alpha);
          std::vector<double> vals(mf.values().begin(), mf.values().end());
          std::sort(vals.begin(), vals.end());
          vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
          vals.erase(std::remove_if(vals.begin(), vals.end(), [](double v) { return !(v > 0.0); }), vals.end());
          std::vector<double> lambdas;
          const std::size_t picks = std::min<std::size_t>(vals.size(), 4);
          for (std::size_t i = 0; i < picks; ++i) {
            const double v = vals[picks == 1 ? 0 : i * (vals.size() - 1) / (picks - 1)];
            lambdas.push_back(v * (1.0 - 0x1.0p-20));
            lambdas.push_back(v);
          }
          if (lambdas.empty()) continue;
          for (auto& r : maximal_weak_report(f, w, g, alpha, lambdas)) {
            triples += r.checked;
            res.rows.push_back(r);
          }
        }
      }
    }
    for (const auto& f : fs) {
      for (Grid g : kGrids) {
        for (double p : ps) res.rows.push_back(maximal_strong_report(f, g, p, alpha));
      }
    }
  }
  res.extra["weak_triples"] = triples;
}

void verify_classes(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const std::vector<double> ps = c.p.empty() ? std::vector<double>{1.0, 2.0, 3.0} : c.p;
  const std::vector<double> qs = c.q.empty() ? std::vector<double>{0.5, 1.0, 2.0} : c.q;
  for (double q : qs) {
    if (!(q > 0.0)) throw ConfigError(c.name + ": field 'q' needs values > 0");
  }
  for (double alpha : c.alpha) {
    const std::vector<Weight> ws = weight_set(c, alpha, J);
    const std::vector<NamedFunction> fs = function_set(c, J);
    for (std::size_t i = 0; i < ws.size(); ++i) {
      for (std::size_t k = 0; k < ws.size(); ++k) {
        for (double p : ps) {
          for (double q : qs) {
            for (auto& r : class_algebra_check(ws[i], ws[k], p, q, alpha, ArcFamily::two_grid(J), fs)) {
              if (r.theorem == "weight_product" && q != qs.front()) continue;
              res.rows.push_back(r);
            }
          }
        }
      }
    }
  }
}

void verify_weak(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const std::vector<std::string> modes = c.modes.empty() ? kModes.at("verify-weak") : c.modes;
  const std::vector<double> ps = c.p.empty() ? std::vector<double>{2.0} : c.p;
  auto has = [&](const char* m) { return std::find(modes.begin(), modes.end(), m) != modes.end(); };
  std::size_t out_of_range = 0;
  for (double alpha : c.alpha) {
    const std::vector<Weight> ws = weight_set(c, alpha, J);
    const std::vector<NamedFunction> fs = function_set(c, J);
    std::optional<KernelMatrix> kernel;
    if (c.bergman) kernel.emplace(Mesh::overlay(J), alpha, QuadratureSpec{c.eval_depth.value_or(J), c.k, 4});
    const KernelMatrix* kp = kernel ? &*kernel : nullptr;
    const Weight one = Weight::unit(Mesh::dyadic(J));
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const Weight& u = ws[i];
      const Weight& v = ws[(i + 1) % ws.size()];
      for (const auto& f : fs) {
        if (has("main1")) {
          for (double p : ps) res.rows.push_back(weak_type_report(WeakMode::Main1, p, f, u, v, alpha, J, kp));
        }
        if (has("main2")) res.rows.push_back(weak_type_report(WeakMode::Main2, ps.front(), f, u, v, alpha, J, kp));
        if (has("coro")) res.rows.push_back(weak_type_report(WeakMode::Coro, ps.front(), f, u, one, alpha, J, kp));
        if (has("main1") && has("main2")) {
          const auto a = weak_type_report(WeakMode::Main1, ps.front(), f, one, v, alpha, J);
          const auto b = weak_type_report(WeakMode::Main2, ps.front(), f, one, v, alpha, J);
          InequalityReport r = make_row("weak_path_equivalence", alpha, J);
          r.weight_id = "u=unit;v=" + v.id();
          r.f_id = f.id;
          r.set_sides(std::abs(a.lhs - b.lhs), 1e-12 * std::max(a.lhs, b.lhs));
          decide(r, r.lhs <= r.rhs_explicit);
          r.grid_mode = "two_grid";
          r.provenance = "main1 lhs=" + format_double(a.lhs) + ";main2 lhs=" + format_double(b.lhs);
          res.rows.push_back(r);
        }
      }
    }
  }
}

void verify_strong(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const std::vector<std::string> modes = c.modes.empty() ? kModes.at("verify-strong") : c.modes;
  const std::vector<double> ps = c.p.empty() ? std::vector<double>{2.0} : c.p;
  for (double p : ps) {
    if (!(p > 1.0)) throw ConfigError(c.name + ": field 'p' needs values > 1 for verify-strong");
  }
  auto has = [&](const char* m) { return std::find(modes.begin(), modes.end(), m) != modes.end(); };
  std::size_t out_of_range = 0;
  for (double alpha : c.alpha) {
    const std::vector<Weight> ws = weight_set(c, alpha, J);
    const std::vector<NamedFunction> fs = function_set(c, J);
    std::optional<KernelMatrix> kernel;
    if (c.bergman) kernel.emplace(Mesh::overlay(J), alpha, QuadratureSpec{c.eval_depth.value_or(J), c.k, 4});
    const KernelMatrix* kp = kernel ? &*kernel : nullptr;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const Weight& u = ws[i];
      const Weight& v = ws[(i + 1) % ws.size()];
      for (const auto& f : fs) {
        for (double p : ps) {
          const double pc = p / (p - 1.0);
          StrongParams prm;
          prm.p = p;
          prm.r = c.r.value_or(0.5 * (1.0 + p));
          prm.t = c.t.value_or(0.5 * (1.0 + pc));
          auto append = [&](StrongMode m, const StrongParams& sp, const Weight& a, const Weight& b) {
            for (auto& r : strong_type_report(m, sp, f, a, b, alpha, J, kp)) res.rows.push_back(r);
          };
          if (has("main3")) {
            for (double q : c.q.empty() ? std::vector<double>{0.5 * (1.0 + p)} : c.q) {
              StrongParams sp = prm;
              sp.q = q;
              if (q >= 1.0 && q < p) append(StrongMode::Main3, sp, u, u);
            }
          }
          if (has("utov")) append(StrongMode::Utov, prm, u, v);
          if (has("sparse_explicit")) append(StrongMode::SparseExplicit, prm, u, v);
          if (has("mixed1")) append(StrongMode::Mixed1, prm, u, v);
        }
        if (has("mixed2")) {
          StrongParams sp;
          sp.q = std::pow(2.0, alpha + 3.0) * binf_constant(v, ArcFamily::two_grid(J), alpha);
          sp.p = 2.0 * sp.q;
          try {
            for (auto& r : strong_type_report(StrongMode::Mixed2, sp, f, u, v, alpha, J, kp)) res.rows.push_back(r);
          } catch (const std::range_error&) {
            ++out_of_range;
          }
        }
      }
    }
  }
  if (has("mixed2")) res.extra["mixed2_out_of_range"] = out_of_range;
}

void verify_sum_lemma(ExperimentResult& res) {
  const MinSum unit = min_sum_bound(1.0, 1.0, 1.0, 0.0, 64);
  InequalityReport r = make_row("min_sum_exact", 0.0, 64);
  r.set_sides(unit.lhs, 4.0);
  decide(r, std::abs(unit.lhs - 4.0) <= 1e-9);
  r.witness = "g1=1;g2=1;eta=1;delta=0";
  r.provenance = "K=64;tail=" + format_double(unit.tail);
  res.rows.push_back(r);

  const std::vector<double> gammas{1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4};
  const std::vector<double> etas{0.1, 1.0, 10.0};
  const int K = 64;
  json fits = json::array();
  for (double delta : {0.0, 1.0, 2.0, 3.0}) {
    const MinSumFit a = fit_min_sum_constant(delta, K, gammas, etas);
    const MinSumFit b = fit_min_sum_constant(delta, 2 * K, gammas, etas);
    InequalityReport s = make_row("min_sum_constant_stability", 0.0, 2 * K);
    s.set_sides(b.constant, a.constant);
    decide(s, std::abs(b.constant / a.constant - 1.0) <= 0.1);
    s.witness = "delta=" + format_double(delta) + ";g1=" + format_double(a.g1) + ";g2=" + format_double(a.g2) +
                ";eta=" + format_double(a.eta);
    s.provenance = "C_delta(K=" + std::to_string(K) + ")=" + format_double(a.constant) + ";C_delta(K=" +
                   std::to_string(2 * K) + ")=" + format_double(b.constant);
    res.rows.push_back(s);
    fits.push_back({{"delta", delta}, {"K", K}, {"constant", a.constant}, {"constant_2K", b.constant},
                    {"argmax", {{"g1", a.g1}, {"g2", a.g2}, {"eta", a.eta}}}});
  }
  res.extra["fits"] = fits;
}

void sweep_sharpness(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  const bool power = c.sweep_family == "power";
  const std::uint64_t seed = power ? c.seed.value_or(0) : c.require_seed();
  const std::vector<FunctionSpec> fs = c.functions.empty() ? sweep_functions(J) : c.functions;
  for (double alpha : c.alpha) {
    std::vector<double> params = c.sweep_params;
    if (params.empty()) {
      if (power) {
        for (double t : default_power_params(alpha)) {
          if (t + alpha + 1.0 >= std::ldexp(1.0, -J)) params.push_back(t);
        }
      } else {
        params = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
      }
    }
    const SweepTable table =
        sweep(power ? SweepFamily::Power : SweepFamily::RandomSpiked, params, fs, alpha, J, seed);
    for (const auto& p : table.points) {
      InequalityReport r = ratio_row("weighted_weak_11_sweep", alpha, J, p.lhs, p.b1 * std::log(std::numbers::e + p.binf));
      r.weight_id = p.weight_id;
      r.f_id = p.best_f;
      r.grid_mode = "two_grid";
      r.provenance = "B1=" + format_double(p.b1) + ";Binf=" + format_double(p.binf) + ";c_w=" + format_double(p.cw) +
                     ";lhs/B1^0.5=" + format_double(p.sqrt_ratio) +
                     (p.resolution_limited ? ";resolution_limited" : "");
      res.rows.push_back(r);
    }
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < table.points.size(); ++i) {
      step = std::min(step, table.points[i].b1 / table.points[i - 1].b1);
    }
    if (table.points.size() > 1) {
      InequalityReport inc = make_row("sweep_b1_increasing", alpha, J);
      inc.set_sides(1.0, step);
      decide(inc, table.b1_increasing());
      inc.provenance = "smallest consecutive B1 ratio";
      res.rows.push_back(inc);
    }
    InequalityReport bounded = make_row("sweep_normalized_bounded", alpha, J);
    bounded.set_sides(table.coro_spread(), 10.0);
    decide(bounded, table.coro_spread() < 10.0);
    bounded.provenance = "max/median of lhs/(B1 log(e+Binf))";
    res.rows.push_back(bounded);
    InequalityReport growth = ratio_row("sweep_sqrt_growth", alpha, J, table.sqrt_growth(), 1.0);
    growth.provenance = "last/first of lhs/B1^0.5";
    res.rows.push_back(growth);

    std::ostringstream csv;
    table.write_csv(csv);
    res.attachments.emplace_back(c.name + "-sweep-" + alpha_tag(alpha) + ".csv", csv.str());
    res.attachments.emplace_back(c.name + "-sweep-" + alpha_tag(alpha) + ".json", table.to_json().dump(1) + "\n");
  }
}

void search_sharpness(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const int J = c.depth;
  for (double alpha : c.alpha) {
    const SearchResult s = extremal_search(c.budget, c.require_seed(), alpha, J);
    InequalityReport r = ratio_row("extremal_search", alpha, J, s.lhs, s.b1 * std::log(std::numbers::e + s.b1));
    const Weight w = make_weight(s.best.weight(), alpha, J);
    const NamedFunction f = make_function(s.best.function(), J);
    r.weight_id = w.id();
    r.f_id = f.id;
    r.grid_mode = "two_grid";
    r.provenance = "budget=" + std::to_string(c.budget) + ";objective=lhs/(B1 log(e+B1))";
    res.rows.push_back(r);

    InequalityReport asc = make_row("search_ascent", alpha, J);
    bool ok = true;
    for (std::size_t i = 1; i < s.trajectory.size(); ++i) ok = ok && s.trajectory[i].best >= s.trajectory[i - 1].best;
    asc.set_sides(s.trajectory.front().best, s.objective);
    decide(asc, ok);
    asc.provenance = "first and final objective";
    res.rows.push_back(asc);

    const InequalityReport h = weak_type_report(WeakMode::Coro, 2.0, f, w, Weight::unit(w.mesh_ptr()), alpha, J);
    const double b1 = bp_constant(w, Weight::unit(w.mesh_ptr()), 1.0, ArcFamily::two_grid(J), alpha);
    const double again = h.lhs / (b1 * std::log(std::numbers::e + b1));
    InequalityReport rec = make_row("search_recomputation", alpha, J);
    rec.weight_id = w.id();
    rec.f_id = f.id;
    rec.set_sides(std::abs(again - s.objective), 1e-9 * s.objective);
    decide(rec, rec.lhs <= rec.rhs_explicit);
    rec.provenance = "objective=" + format_double(s.objective) + ";recomputed=" + format_double(again);
    res.rows.push_back(rec);

    res.attachments.emplace_back(c.name + "-search-" + alpha_tag(alpha) + ".json", s.to_json().dump(1) + "\n");
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult res;
  res.config = config;
  const std::string& e = config.experiment;
  if (e == "geometry-selftest") geometry_selftest(res);
  else if (e == "constants") constants(res);
  else if (e == "project") project(res);
  else if (e == "verify-rh") verify_rh(res);
  else if (e == "verify-selection") verify_selection(res);
  else if (e == "verify-packing") verify_packing(res);
  else if (e == "verify-maximal") verify_maximal(res);
  else if (e == "verify-classes") verify_classes(res);
  else if (e == "verify-weak") verify_weak(res);
  else if (e == "verify-strong") verify_strong(res);
  else if (e == "verify-sum-lemma") verify_sum_lemma(res);
  else if (e == "sweep-sharpness") sweep_sharpness(res);
  else if (e == "search-sharpness") search_sharpness(res);
  else throw ConfigError("unknown experiment '" + e + "'");
  if (config.export_data && uses_weights(e)) {
    for (double alpha : config.alpha) {
      export_corpus(res, weight_set(config, alpha, config.depth),
                    uses_function_corpus(config) || !config.functions.empty() ? function_set(config, config.depth)
                                                                              : std::vector<NamedFunction>{},
                    alpha);
    }
  }
  for (auto& r : res.rows) r.experiment = config.name;
  res.summary = summarize(res.rows);
  return res;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

}  // namespace

int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log) {
  std::vector<ExperimentConfig> configs;
  try {
    configs = load_config(config_path);
    for (auto& c : configs) {
      if (options.depth) {
        if (*options.depth < 1 || *options.depth >= Mesh::kMaxDepth) throw ConfigError("--depth out of range");
        c.depth = *options.depth;
      }
      if (options.seed) c.seed = *options.seed;
      if (c.randomized()) c.require_seed();
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }
  std::filesystem::create_directories(options.out_dir);
  bool all_pass = true;
  json suite = json::array();
  for (const auto& c : configs) {
    ExperimentResult res;
    try {
      res = run_experiment(c);
    } catch (const ConfigError& e) {
      log << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::invalid_argument& e) {
      log << "config error: " << c.name << ": " << e.what() << "\n";
      return 2;
    }
    std::ostringstream csv;
    write_csv(csv, res.rows);
    write_file(options.out_dir / (c.name + ".csv"), csv.str());
    write_file(options.out_dir / (c.name + ".json"), res.summary_json().dump(1) + "\n");
    for (const auto& [name, contents] : res.attachments) write_file(options.out_dir / name, contents);
    log << c.name << ": pass " << res.summary.pass_count << ", fail " << res.summary.fail_count << ", max ratio "
        << format_double(res.summary.max_ratio) << "\n";
    all_pass = all_pass && res.summary.fail_count == 0;
    suite.push_back({{"name", c.name},
                     {"experiment", c.experiment},
                     {"pass_count", res.summary.pass_count},
                     {"fail_count", res.summary.fail_count},
                     {"max_ratio", res.summary.max_ratio}});
  }
  if (configs.size() > 1) write_file(options.out_dir / "suite.json", suite.dump(1) + "\n");
  return all_pass ? 0 : 1;
}

}  // namespace bergman
