// One line per acceptance criterion; exit status 1 if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "bergman/harness.hpp"
#include "bergman/projection.hpp"
#include "bergman/random.hpp"
#include "bergman/runner.hpp"
#include "bergman/selection.hpp"
#include "bergman/sharpness.hpp"
#include "oracles.hpp"

using namespace bergman;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240611;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

ExperimentResult run_config(json j) {
  if (!j.contains("seed")) j["seed"] = kSeed;
  return run_experiment(parse_config(j).front());
}

struct Tally {
  std::size_t rows = 0, checked = 0, failed = 0;
  double max_ratio = 0.0;
};

Tally tally(const ExperimentResult& r, const std::string& theorem) {
  Tally t;
  for (const auto& row : r.rows) {
    if (row.theorem != theorem) continue;
    ++t.rows;
    t.checked += row.checked;
    t.failed += row.asserted && !row.pass ? std::max<std::size_t>(row.failed, 1) : 0;
    t.max_ratio = std::max(t.max_ratio, row.ratio);
  }
  return t;
}

std::string count_line(const Tally& t) {
  return std::to_string(t.rows) + " rows, " + std::to_string(t.checked) + " instances, " + std::to_string(t.failed) +
         " failed";
}

void geometry() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(kSeed);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Grid g = kGrids[uniform_index(rng, 2)];
    const int level = static_cast<int>(uniform_index(rng, 13));
    const auto arc = DyadicArc::make(g, level, static_cast<std::int64_t>(uniform_index(rng, std::uint64_t{1} << level)));
    const double alpha = uniform(rng, -0.9, 3.0);
    const Region region = uniform01(rng) < 0.5 ? arc.box() : arc.top();
    const double exact = region_mass(region, alpha);
    worst = std::max(worst, std::abs(exact - oracle::region_mass(region, alpha)) / exact);
  }
  std::size_t bound_fail = 0, arcs = 0;
  double gap = 0.0;
  for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
    const double c = top_fraction_bound(alpha);
    const auto whole = DyadicArc::make(Grid::Zero, 0, 0);
    gap = std::max(gap, std::abs(region_mass(whole.top(), alpha) / region_mass(whole.box(), alpha) - c));
    for (Grid g : kGrids) {
      for (int j = 0; j <= 12; ++j) {
        for (std::int64_t m = 0; m < (std::int64_t{1} << j); ++m) {
          const auto a = DyadicArc::make(g, j, m);
          ++arcs;
          if (!(region_mass(a.top(), alpha) >= c * region_mass(a.box(), alpha) * (1.0 - 1e-12))) ++bound_fail;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, "geometry exactness", worst <= 1e-6 && bound_fail == 0 && gap < 1e-12 && secs < 5.0,
         "oracle rel err " + fmt("%.2e", worst) + " over 100 pairs; top-half bound " + std::to_string(arcs - bound_fail) +
             "/" + std::to_string(arcs) + "; gap at h=1 " + fmt("%.1e", gap) + "; " + fmt("%.2f", secs) + " s");
}

void reverse_holder() {
  const auto t0 = Clock::now();
  const auto r = run_config({{"experiment", "verify-rh"}, {"alpha", {0, 1}}, {"depth", 8}, {"weight_count", 200}});
  std::set<std::string> ids;
  std::set<std::string> families;
  for (const auto& row : r.rows) {
    ids.insert(row.weight_id);
    families.insert(row.weight_id.substr(0, row.weight_id.find_first_of(":(")));
  }
  const Tally rh = tally(r, "reverse_holder");
  const Tally pre = tally(r, "rooted_maximal_reverse_holder");
  const Tally esi = tally(r, "small_set_estimate");
  const double secs = seconds_since(t0);
  const bool ok = ids.size() >= 200 && rh.failed + pre.failed + esi.failed == 0 && rh.checked > 0 && secs < 120.0;
  std::string fam;
  for (const auto& f : families) fam += (fam.empty() ? "" : ",") + f;
  report(2, "reverse Hoelder", ok,
         std::to_string(ids.size()) + " weights {" + fam + "}; RH " + count_line(rh) + "; preRH " + count_line(pre) +
             "; esi " + count_line(esi) + "; " + fmt("%.1f", secs) + " s");
}

void selection() {
  const auto r = run_config({{"experiment", "verify-selection"}, {"alpha", {0, 1}}, {"depth", 8}, {"scenario_count", 60}});
  const Tally factor = tally(r, "exceptional_set_factor");
  const Tally overlap = tally(r, "exceptional_set_overlap");
  const Tally n0 = tally(r, "stopping_depth");
  const int n0_value = stopping_depth(0.0, 1.0, 1.0);
  const bool ok = factor.rows >= 100 && factor.failed == 0 && overlap.failed == 0 && n0.failed == 0 && n0_value == 109;
  report(3, "selection", ok,
         std::to_string(factor.rows) + " nonempty scenarios; 6-factor " + count_line(factor) + "; overlap " +
             count_line(overlap) + "; n0(0,1,1) = " + std::to_string(n0_value));
}

void packing() {
  const auto r = run_config({{"experiment", "verify-packing"}, {"alpha", {0, 1}}, {"depth", 8}, {"scenario_count", 110}});
  const Tally t = tally(r, "carleson_packing");
  report(4, "packing", t.rows >= 200 && t.failed == 0, count_line(t) + "; max lhs/rhs " + fmt("%.4f", t.max_ratio));
}

void maximal() {
  const auto r = run_config({{"experiment", "verify-maximal"}, {"alpha", {0, 1}}, {"depth", 8}, {"p", {1.5, 2, 3}}});
  const Tally weak = tally(r, "maximal_weak_11");
  const Tally strong = tally(r, "maximal_strong");
  std::set<double> ps;
  for (const auto& row : r.rows) {
    if (row.theorem == "maximal_strong") ps.insert(row.p);
  }
  const bool ok = weak.checked >= 500 && weak.failed == 0 && strong.failed == 0 && ps == std::set<double>{1.5, 2.0, 3.0};
  report(5, "maximal bounds", ok,
         "weak " + count_line(weak) + " (zero tolerance), max ratio " + fmt("%.6f", weak.max_ratio) + "; strong " +
             count_line(strong) + ", max ratio " + fmt("%.4f", strong.max_ratio));
}

void classes() {
  const auto r = run_config({{"experiment", "verify-classes"}, {"alpha", {0, 1}}, {"depth", 7}});
  const Tally prod = tally(r, "weight_product");
  const Tally change = tally(r, "weight_change");
  report(6, "class algebra", prod.rows > 0 && change.rows > 0 && prod.failed + change.failed == 0,
         "product " + count_line(prod) + "; weight change " + count_line(change));
}

void strong_chain() {
  const auto r = run_config({{"experiment", "verify-strong"},
                             {"alpha", {0, 1}},
                             {"depth", 8},
                             {"p", {1.5, 2, 3}},
                             {"modes", {"sparse_explicit"}}});
  const Tally t = tally(r, "sparse_explicit");

  const int depth = 8;
  const auto one = make_weight(WeightSpec::unit(), 0.0, depth);
  const auto f = make_function(FunctionSpec::constant(1.0), depth);
  const auto rows = strong_type_report(StrongMode::SparseExplicit, {2.0, NAN, 1.5, 1.5}, f, one, one, 0.0, depth);
  const double closed = box_to_top_constant(0.0) * std::pow(2.0, 4.0 / 3.0) * std::sqrt(2.0 / 0.5) * std::sqrt(2.0 / 0.5);
  bool unit_ok = rows.size() == 3;
  for (const auto& row : rows) unit_ok = unit_ok && row.pass;
  const double grid_rhs = rows.front().rhs_explicit;
  const double sum_lhs = rows.back().lhs;
  unit_ok = unit_ok && std::abs(grid_rhs - closed) <= 1e-12 * closed && sum_lhs < 20.16;
  report(7, "explicit strong-type chain", t.rows > 0 && t.failed == 0 && unit_ok,
         "corpus " + count_line(t) + ", max ratio " + fmt("%.4f", t.max_ratio) + "; unit case rhs per grid " +
             fmt("%.4f", grid_rhs) + " (4*2^(4/3)*(4)^(1/2)*(4)^(1/2)), lhs T0+T1/3 " + fmt("%.4f", sum_lhs) +
             " < 20.16");
}

double max_abs_error(const ProjectionSample& s, std::complex<double> target) {
  return (s.values.array() - target).abs().maxCoeff();
}

void quadrature() {
  const auto t0 = Clock::now();
  const auto p1 = [](int J, int k) {
    return max_abs_error(bergman_project(RealFunction::constant(Mesh::dyadic(J), 1.0), 0.0, J, k), 1.0);
  };
  const double e8 = p1(8, 4);
  const double e9 = p1(9, 8);
  double conj = 0.0, radial = 0.0;
  for (double alpha : {0.0, 1.0}) {
    conj = std::max(conj, bergman_project([](std::complex<double> z) { return std::conj(z); }, alpha, 9, 8)
                              .values.cwiseAbs()
                              .maxCoeff());
    radial = std::max(radial, max_abs_error(bergman_project([](std::complex<double> z) { return std::complex<double>(std::norm(z)); },
                                                            alpha, 9, 8),
                                            1.0 / (2.0 + alpha)));
  }
  const double secs = seconds_since(t0);
  report(8, "Bergman quadrature", e8 <= 1e-3 && e9 <= e8 / 2.0 && conj <= 1e-3 && radial <= 1e-3 && secs < 180.0,
         "|P1-1| " + fmt("%.2e", e8) + " at (8,4), " + fmt("%.2e", e9) + " at (9,8); |P conj| " + fmt("%.2e", conj) +
             "; |P|z|^2 - 1/(2+a)| " + fmt("%.2e", radial) + " (a in {0,1}, (9,8)); " + fmt("%.1f", secs) + " s");
}

std::vector<FunctionSpec> fixed_functions() {
  return {FunctionSpec::constant(1.0),         FunctionSpec::box(Grid::Zero, 1, 0), FunctionSpec::box(Grid::Third, 3, 2),
          FunctionSpec::top(Grid::Zero, 2, 1), FunctionSpec::top(Grid::Third, 5, 7), FunctionSpec::top(Grid::Zero, 6, 40),
          FunctionSpec::random(kSeed)};
}

void sparse_domination() {
  std::map<int, double> best;
  for (int J : {7, 8}) {
    double m = 0.0;
    for (double alpha : {0.0, 1.0}) {
      const KernelMatrix kernel(Mesh::overlay(J), alpha, {J, 4, 4});
      for (const auto& spec : fixed_functions()) m = std::max(m, sparse_domination_ratio(make_function(spec, J).f, kernel, J));
    }
    best[J] = m;
  }
  const double change = best[8] / best[7];
  report(9, "sparse domination", std::isfinite(best[7]) && std::isfinite(best[8]) && change < 2.0 && change > 0.5,
         "corpus max |Pf|/(T0f+T1/3f) " + fmt("%.4f", best[7]) + " at J=7, " + fmt("%.4f", best[8]) + " at J=8 (x" +
             fmt("%.3f", change) + ")");
}

std::map<std::string, double> theorem_ratios(int J, double alpha, const std::vector<WeightSpec>& wspecs) {
  std::map<std::string, double> out;
  std::vector<Weight> ws;
  for (const auto& s : wspecs) ws.push_back(make_weight(s, alpha, J));
  const Weight one = Weight::unit(Mesh::dyadic(J));
  auto note = [&](const InequalityReport& r, const std::string& tag) {
    double& m = out[tag];
    m = std::isfinite(r.ratio) ? std::max(m, r.ratio) : INFINITY;
  };
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const Weight& u = ws[i];
    const Weight& v = ws[(i + 1) % ws.size()];
    const double binf_v = binf_constant(v, ArcFamily::two_grid(J), alpha);
    const double q2 = std::pow(2.0, alpha + 3.0) * binf_v;
    for (const auto& spec : fixed_functions()) {
      const auto f = make_function(spec, J);
      note(weak_type_report(WeakMode::Coro, 2.0, f, u, one, alpha, J), "coro");
      note(weak_type_report(WeakMode::Main1, 2.0, f, u, v, alpha, J), "main1");
      note(weak_type_report(WeakMode::Main2, 2.0, f, u, v, alpha, J), "main2");
      note(strong_type_report(StrongMode::Main3, {2.0, 1.5, NAN, NAN}, f, u, v, alpha, J).front(), "main3");
      note(strong_type_report(StrongMode::Utov, {2.0, NAN, 1.5, 1.5}, f, u, v, alpha, J).front(), "utov");
      note(strong_type_report(StrongMode::Mixed1, {2.0, NAN, NAN, NAN}, f, u, v, alpha, J).front(), "mixed1");
      note(strong_type_report(StrongMode::Mixed2, {2.0 * q2, q2, NAN, NAN}, f, u, v, alpha, J).front(), "mixed2");
    }
  }
  return out;
}

void theorem_ratio_properties() {
  bool ok = true;
  double worst_change = 1.0;
  std::string worst_tag;
  for (double alpha : {0.0, 1.0}) {
    auto wspecs = weight_corpus(kSeed, 6, alpha, 8);
    wspecs.insert(wspecs.begin(), WeightSpec::unit());
    const auto a = theorem_ratios(8, alpha, wspecs);
    const auto b = theorem_ratios(9, alpha, wspecs);
    for (const auto& [tag, m8] : a) {
      const double m9 = b.at(tag);
      const double change = std::max(m9 / m8, m8 / m9);
      ok = ok && std::isfinite(m8) && std::isfinite(m9) && change < 2.0;
      if (!(change <= worst_change)) {
        worst_change = change;
        worst_tag = tag + "@alpha=" + fmt("%g", alpha);
      }
    }
  }
  std::string sweep_detail;
  for (double alpha : {0.0, 1.0}) {
    const int J = 10;
    std::vector<double> params;
    for (double t : default_power_params(alpha)) {
      if (t + alpha + 1.0 >= std::ldexp(1.0, -J)) params.push_back(t);
    }
    const auto table = sweep(SweepFamily::Power, params, sweep_functions(J), alpha, J, kSeed);
    const double spread = table.coro_spread();
    const double growth = table.sqrt_growth();
    ok = ok && table.b1_increasing() && spread < 10.0 && growth >= 3.0;
    sweep_detail += "; sweep a=" + fmt("%g", alpha) + ": " + std::to_string(table.points.size()) + " pts, B1 " +
                    fmt("%.1f", table.points.front().b1) + "->" + fmt("%.1f", table.points.back().b1) +
                    ", normalized max/median " + fmt("%.2f", spread) + ", sqrt-normalized growth x" + fmt("%.2f", growth);
  }
  report(10, "weak/strong theorem ratios", ok,
         "7 modes finite at J=8,9; worst corpus-max change x" + fmt("%.3f", worst_change) + " (" + worst_tag + ")" +
             sweep_detail);
}

void sum_lemma() {
  const auto r = run_config({{"experiment", "verify-sum-lemma"}});
  const Tally exact = tally(r, "min_sum_exact");
  const Tally stable = tally(r, "min_sum_constant_stability");
  double lhs = NAN;
  for (const auto& row : r.rows) {
    if (row.theorem == "min_sum_exact") lhs = row.lhs;
  }
  const auto s = min_sum_bound(1.0, 1.0, 1.0, 0.0, 64);
  report(11, "sum lemma", exact.rows == 1 && exact.failed == 0 && stable.rows >= 4 && stable.failed == 0 &&
                              std::abs(lhs - 4.0) <= 1e-9,
         "LHS(1,1,1,0) = " + fmt("%.12f", lhs) + " (tail bound " + fmt("%.1e", s.tail) + "); stability " +
             count_line(stable) + ", max C(2K)/C(K) " + fmt("%.6f", stable.max_ratio));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(const fs::path& config) {
  const fs::path root = fs::temp_directory_path() / "bergman_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream log;
  const int a = run(config, {root / "a", {}, {}}, log);
  const int b = run(config, {root / "b", {}, {}}, log);
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    if (fs::exists(root / "b" / e.path().filename()) && slurp(e.path()) == slurp(root / "b" / e.path().filename())) ++same;
  }
  fs::remove_all(root);
  report(12, "determinism", a == 0 && b == 0 && files >= 13 && same == files,
         std::to_string(same) + "/" + std::to_string(files) + " CSV files byte-identical across two runs of " +
             config.filename().string() + " (exit " + std::to_string(a) + "," + std::to_string(b) + ")");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path config = argc > 1 ? fs::path(argv[1]) : fs::path(BERGMAN_SOURCE_DIR) / "configs" / "full.json";
  const std::vector<std::function<void()>> steps{geometry, reverse_holder,    selection,
                                                 packing,  maximal,           classes,
                                                 strong_chain, quadrature,    sparse_domination,
                                                 theorem_ratio_properties, sum_lemma, [&] { determinism(config); }};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      steps[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i) + 1, "error", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, steps.size());
  return failures == 0 ? 0 : 1;
}
