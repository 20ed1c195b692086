#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bergman/runner.hpp"

using namespace bergman;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bergman_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("config validation names the offending field") {
  CHECK(error_of(json{{"experiment", "constants"}, {"colour", 3}}).find("'colour'") != std::string::npos);
  CHECK(error_of(json{{"experiment", "teleport"}}).find("'experiment'") != std::string::npos);
  CHECK(error_of(json{{"experiment", "constants"}, {"depth", 40}}).find("'depth'") != std::string::npos);
  CHECK(error_of(json{{"experiment", "constants"}, {"alpha", json::array({-1.0})}}).find("'alpha'") !=
        std::string::npos);

  const json random_weight{{"experiment", "constants"},
                           {"seed", 1},
                           {"weights", json::array({json{{"family", "random"}, {"ratio_cap", 2.0}}})}};
  CHECK(error_of(random_weight).find("'seed'") != std::string::npos);

  const auto cfgs = parse_config(json{{"experiment", "verify-rh"}});
  REQUIRE(cfgs.size() == 1);
  CHECK(cfgs[0].randomized());
  try {
    cfgs[0].require_seed();
    FAIL("missing seed accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'seed'") != std::string::npos);
  }
  CHECK_FALSE(parse_config(json{{"experiment", "geometry-selftest"}})[0].randomized());
}

TEST_CASE("suite entries inherit defaults and get unique names") {
  const json j{{"depth", 5},
               {"seed", 3},
               {"suite", json::array({json{{"experiment", "constants"}}, json{{"experiment", "constants"}, {"depth", 6}},
                                      json{{"experiment", "verify-sum-lemma"}}})}};
  const auto cfgs = parse_config(j);
  REQUIRE(cfgs.size() == 3);
  CHECK(cfgs[0].depth == 5);
  CHECK(cfgs[1].depth == 6);
  CHECK(*cfgs[2].seed == 3);
  CHECK(cfgs[0].name != cfgs[1].name);
  CHECK(error_of(json{{"suite", json::array()}}).find("'suite'") != std::string::npos);
}

TEST_CASE("config round trip through json") {
  const auto c = parse_config(json{{"experiment", "verify-strong"}, {"seed", 4}, {"p", json::array({2.0, 3.0})},
                                   {"modes", json::array({"sparse_explicit"})}})[0];
  const auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
}

TEST_CASE("geometry self test and the sum lemma pass") {
  auto geo = parse_config(json{{"experiment", "geometry-selftest"}, {"depth", 8}, {"alpha", {-0.5, 0.0, 1.0}}})[0];
  const auto g = run_experiment(geo);
  CHECK(g.summary.fail_count == 0);
  CHECK(g.summary.pass_count > 0);

  const auto s = run_experiment(parse_config(json{{"experiment", "verify-sum-lemma"}})[0]);
  CHECK(s.summary.fail_count == 0);
  bool found = false;
  for (const auto& r : s.rows) {
    if (r.theorem == "min_sum_exact") {
      found = true;
      CHECK(std::abs(r.lhs - 4.0) <= 1e-9);
    }
  }
  CHECK(found);
}

TEST_CASE("run writes reports, honours exit codes and is deterministic") {
  const fs::path dir = scratch("run");
  write(dir / "ok.json", R"({"seed": 5, "depth": 5, "suite": [
      {"experiment": "constants", "weight_count": 4},
      {"experiment": "verify-packing", "scenario_count": 10},
      {"experiment": "verify-weak", "weight_count": 3, "function_count": 3}]})");
  std::ostringstream log;
  CHECK(run(dir / "ok.json", {dir / "a", {}, {}}, log) == 0);
  CHECK(run(dir / "ok.json", {dir / "b", {}, {}}, log) == 0);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(dir / "b" / name));
  }
  const auto summary = json::parse(slurp(dir / "a" / "constants.json"));
  CHECK(summary.contains("pass_count"));
  CHECK(summary.contains("provenance"));
  const std::string csv = slurp(dir / "a" / "constants.csv");
  CHECK(csv.rfind("experiment,theorem,alpha,depth,p,q,r,t,weight_id,f_id,lhs,rhs_explicit,ratio,pass", 0) == 0);

  CHECK(run(dir / "ok.json", {dir / "c", {}, std::uint64_t{6}}, log) == 0);
  CHECK(slurp(dir / "c" / "constants.csv") != csv);

  write(dir / "noseed.json", R"({"experiment": "verify-rh"})");
  std::ostringstream err;
  CHECK(run(dir / "noseed.json", {dir / "d", {}, {}}, err) == 2);
  CHECK(err.str().find("'seed'") != std::string::npos);
  CHECK(run(dir / "noseed.json", {dir / "d", 4, std::uint64_t{1}}, log) == 0);

  write(dir / "broken.json", "{\n  \"experiment\": \"constants\",\n  \"depth\": ,\n}");
  std::ostringstream parse_err;
  CHECK(run(dir / "broken.json", {dir / "e", {}, {}}, parse_err) == 2);
  CHECK(parse_err.str().find("line 3") != std::string::npos);
  fs::remove_all(dir);
}
