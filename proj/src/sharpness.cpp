#include "bergman/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "bergman/operators.hpp"
#include "bergman/random.hpp"

namespace bergman {

using nlohmann::json;

std::array<double, 3> psi_values(double x) {
  return {x, x * std::log(std::numbers::e + x), std::pow(x, 1.5)};
}

namespace {

const char* family_name(SweepFamily f) { return f == SweepFamily::Power ? "power" : "random_spiked"; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double two_grid_b1(const Weight& w, int depth, double alpha) {
  return bp_constant(w, Weight::unit(w.mesh_ptr()), 1.0, ArcFamily::two_grid(depth), alpha);
}

}  // namespace

bool SweepTable::b1_increasing() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].b1 > points[i - 1].b1)) return false;
  }
  return true;
}

double SweepTable::coro_spread() const {
  if (points.empty()) return 0.0;
  std::vector<double> v;
  for (const auto& p : points) v.push_back(p.coro_ratio);
  return *std::max_element(v.begin(), v.end()) / median(v);
}

double SweepTable::sqrt_growth() const {
  if (points.empty()) return 0.0;
  return points.back().sqrt_ratio / points.front().sqrt_ratio;
}

void SweepTable::write_csv(std::ostream& out) const {
  out << "family,alpha,depth,seed,param,weight_id,b1,binf,c_w,lhs,best_f";
  for (const char* n : kPsiNames) out << ",ratio_" << n;
  out << ",coro_ratio,sqrt_ratio,log_b1,log_lhs,b1_next_depth,resolution_limited\n";
  for (const auto& p : points) {
    out << family_name(family) << ',' << format_double(alpha) << ',' << depth << ',' << seed << ','
        << format_double(p.param) << ',' << p.weight_id << ',' << format_double(p.b1) << ','
        << format_double(p.binf) << ',' << format_double(p.cw) << ',' << format_double(p.lhs) << ',' << p.best_f;
    for (double r : p.psi_ratio) out << ',' << format_double(r);
    out << ',' << format_double(p.coro_ratio) << ',' << format_double(p.sqrt_ratio) << ','
        << format_double(std::log(p.b1)) << ',' << format_double(std::log(p.lhs)) << ','
        << format_double(p.b1_next) << ',' << (p.resolution_limited ? "true" : "false") << '\n';
  }
}

json SweepTable::to_json() const {
  json rows = json::array();
  for (const auto& p : points) {
    json ratios;
    for (std::size_t i = 0; i < kPsiNames.size(); ++i) ratios[kPsiNames[i]] = p.psi_ratio[i];
    rows.push_back({{"param", p.param},
                    {"weight_id", p.weight_id},
                    {"b1", p.b1},
                    {"binf", p.binf},
                    {"c_w", p.cw},
                    {"lhs", p.lhs},
                    {"best_f", p.best_f},
                    {"psi_ratios", ratios},
                    {"coro_ratio", p.coro_ratio},
                    {"sqrt_ratio", p.sqrt_ratio},
                    {"log_b1", std::log(p.b1)},
                    {"log_lhs", std::log(p.lhs)},
                    {"b1_next_depth", p.b1_next},
                    {"resolution_limited", p.resolution_limited}});
  }
  return {{"family", family_name(family)},
          {"alpha", alpha},
          {"depth", depth},
          {"seed", seed},
          {"f_corpus", f_ids},
          {"points", rows},
          {"b1_increasing", b1_increasing()},
          {"coro_spread", coro_spread()},
          {"sqrt_growth", sqrt_growth()}};
}

std::vector<double> default_power_params(double alpha, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(-(alpha + 1.0) + 0.05 * std::ldexp(1.0, -i));
  return out;
}

WeightSpec sweep_weight(SweepFamily family, double param, std::uint64_t seed, int depth) {
  if (family == SweepFamily::Power) return WeightSpec::power(param);
  if (depth < 2) throw std::invalid_argument("random-spiked sweep needs depth >= 2");
  return WeightSpec::product({WeightSpec::random(seed, 2.0), WeightSpec::bump(depth - 2, 0, param)});
}

std::vector<FunctionSpec> sweep_functions(int depth) {
  std::vector<FunctionSpec> out{FunctionSpec::constant(1.0)};
  for (Grid g : kGrids) {
    for (int level = 0; level < depth; ++level) out.push_back(FunctionSpec::top(g, level, 0));
    for (int level = std::max(0, depth - 1); level <= depth; ++level) out.push_back(FunctionSpec::box(g, level, 0));
  }
  return out;
}

std::pair<double, std::string> best_weak_ratio(const Weight& w, const std::vector<NamedFunction>& fs, double alpha,
                                               int depth) {
  if (fs.empty()) throw std::invalid_argument("function corpus is empty");
  double best = -1.0;
  std::string id;
  for (const auto& f : fs) {
    const double norm = lp_norm(f.f, w.function(), 1.0, alpha);
    const double r = weak_quasinorm(sparse_both(f.f, alpha, depth), w.function(), alpha) / norm;
    if (r > best) {
      best = r;
      id = f.id;
    }
  }
  return {best, id};
}

SweepTable sweep(SweepFamily family, const std::vector<double>& params, const std::vector<FunctionSpec>& f_corpus,
                 double alpha, int depth, std::uint64_t seed) {
  require_alpha(alpha);
  if (params.empty()) throw std::invalid_argument("sweep needs at least one parameter");
  if (family == SweepFamily::Power) {
    const double margin = std::ldexp(1.0, -depth);
    for (double t : params) {
      if (!(t > -(alpha + 1.0) + margin - 1e-15)) {
        throw std::invalid_argument("power sweep parameter closer than 2^-J to -(alpha+1)");
      }
    }
  }
  SweepTable table;
  table.family = family;
  table.alpha = alpha;
  table.depth = depth;
  table.seed = seed;
  std::vector<NamedFunction> fs;
  for (const auto& s : f_corpus) {
    fs.push_back(make_function(s, depth));
    table.f_ids.push_back(fs.back().id);
  }
  const ArcFamily fam = ArcFamily::two_grid(depth);
  for (double param : params) {
    const WeightSpec spec = sweep_weight(family, param, seed, depth);
    const Weight w = make_weight(spec, alpha, depth);
    SweepPoint p;
    p.param = param;
    p.weight_id = w.id();
    p.b1 = two_grid_b1(w, depth, alpha);
    p.binf = binf_constant(w, fam, alpha);
    p.cw = top_regularity_cw(w, fam);
    std::tie(p.lhs, p.best_f) = best_weak_ratio(w, fs, alpha, depth);
    const auto psi = psi_values(p.b1);
    for (std::size_t i = 0; i < psi.size(); ++i) p.psi_ratio[i] = p.lhs / psi[i];
    p.coro_ratio = p.lhs / (p.b1 * std::log(std::numbers::e + p.binf));
    p.sqrt_ratio = p.lhs / std::sqrt(p.b1);
    p.b1_next = two_grid_b1(make_weight(spec, alpha, depth + 1), depth + 1, alpha);
    p.resolution_limited = p.b1_next > p.b1 * (1.0 + 1e-6);
    table.points.push_back(p);
  }
  return table;
}

WeightSpec SearchConfig::weight() const {
  return WeightSpec::product({WeightSpec::power(t), WeightSpec::bump(bump_level, bump_index, bump_a)});
}

FunctionSpec SearchConfig::function() const {
  return f_top ? FunctionSpec::top(f_grid, f_level, f_index) : FunctionSpec::box(f_grid, f_level, f_index);
}

json SearchConfig::to_json() const {
  return {{"t", t},
          {"bump_level", bump_level},
          {"bump_index", bump_index},
          {"bump_a", bump_a},
          {"f_grid", bergman::to_string(f_grid)},
          {"f_level", f_level},
          {"f_index", f_index},
          {"f_top", f_top}};
}

SearchConfig SearchConfig::from_json(const json& j) {
  static const std::vector<std::string> keys{"t",       "bump_level", "bump_index", "bump_a",
                                             "f_grid",  "f_level",    "f_index",    "f_top"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw std::invalid_argument("search config: unknown field '" + k + "'");
    }
  }
  for (const auto& k : keys) {
    if (!j.contains(k)) throw std::invalid_argument("search config: missing field '" + k + "'");
  }
  SearchConfig c;
  c.t = j.at("t").get<double>();
  c.bump_level = j.at("bump_level").get<int>();
  c.bump_index = j.at("bump_index").get<std::int64_t>();
  c.bump_a = j.at("bump_a").get<double>();
  const auto g = j.at("f_grid").get<std::string>();
  if (g != "0" && g != "1/3") throw std::invalid_argument("search config: field 'f_grid' must be \"0\" or \"1/3\"");
  c.f_grid = g == "0" ? Grid::Zero : Grid::Third;
  c.f_level = j.at("f_level").get<int>();
  c.f_index = j.at("f_index").get<std::int64_t>();
  c.f_top = j.at("f_top").get<bool>();
  return c;
}

json SearchResult::to_json() const {
  json traj = json::array();
  for (const auto& s : trajectory) {
    traj.push_back({{"evaluation", s.evaluation},
                    {"coordinate", s.coordinate},
                    {"config", s.config.to_json()},
                    {"objective", s.objective},
                    {"accepted", s.accepted},
                    {"best", s.best}});
  }
  return {{"best", best.to_json()}, {"objective", objective}, {"lhs", lhs}, {"b1", b1}, {"trajectory", traj}};
}

double search_objective(const SearchConfig& c, double alpha, int depth, double* lhs, double* b1) {
  const Weight w = make_weight(c.weight(), alpha, depth);
  const NamedFunction f = make_function(c.function(), depth);
  const double l = best_weak_ratio(w, {f}, alpha, depth).first;
  const double b = two_grid_b1(w, depth, alpha);
  if (lhs) *lhs = l;
  if (b1) *b1 = b;
  return l / (b * std::log(std::numbers::e + b));
}

namespace {

constexpr int kCoordinates = 5;

double t_low(double alpha, int depth) { return -(alpha + 1.0) + std::ldexp(1.0, -depth) + 0.01; }

SearchConfig propose(const SearchConfig& c, int coordinate, std::mt19937_64& rng, double alpha, int depth) {
  SearchConfig n = c;
  switch (coordinate) {
    case 0:
      n.t = uniform(rng, t_low(alpha, depth), 1.0);
      break;
    case 1:
      n.bump_a = std::exp(uniform(rng, -std::log(8.0), std::log(8.0)));
      break;
    case 2:
      n.bump_level = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(depth)));
      n.bump_index = static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << n.bump_level));
      break;
    case 3:
      n.f_level = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(depth)));
      n.f_index = static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << n.f_level));
      break;
    default:
      n.f_grid = uniform01(rng) < 0.5 ? Grid::Zero : Grid::Third;
      n.f_top = uniform01(rng) < 0.75;
      break;
  }
  return n;
}

}  // namespace

SearchConfig initial_config(std::uint64_t seed, double alpha, int depth) {
  require_alpha(alpha);
  if (depth < 1) throw std::invalid_argument("search depth must be >= 1");
  std::mt19937_64 rng(seed);
  SearchConfig c;
  for (int k = 0; k < kCoordinates; ++k) c = propose(c, k, rng, alpha, depth);
  return c;
}

SearchResult extremal_search(int budget, std::uint64_t seed, double alpha, int depth) {
  return extremal_search(budget, seed, alpha, depth, initial_config(seed, alpha, depth));
}

SearchResult extremal_search(int budget, std::uint64_t seed, double alpha, int depth, const SearchConfig& start) {
  if (budget < 1) throw std::invalid_argument("search budget must be >= 1");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  SearchResult out;
  out.best = start;
  out.objective = search_objective(start, alpha, depth, &out.lhs, &out.b1);
  out.trajectory.push_back({0, -1, start, out.objective, true, out.objective});
  for (int e = 1; e < budget; ++e) {
    const int coordinate = (e - 1) % kCoordinates;
    const SearchConfig cand = propose(out.best, coordinate, rng, alpha, depth);
    double lhs = 0.0;
    double b1 = 1.0;
    const double obj = search_objective(cand, alpha, depth, &lhs, &b1);
    const bool accept = obj >= out.objective;
    if (accept) {
      out.best = cand;
      out.objective = obj;
      out.lhs = lhs;
      out.b1 = b1;
    }
    out.trajectory.push_back({e, coordinate, cand, obj, accept, out.objective});
  }
  return out;
}

}  // namespace bergman
