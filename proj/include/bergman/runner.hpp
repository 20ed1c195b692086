#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bergman/harness.hpp"
#include "bergman/report.hpp"
#include "bergman/weights.hpp"

namespace bergman {

/// Raised for malformed configurations; the message names the offending field.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::array<const char*, 13> kExperiments{
    "geometry-selftest", "constants",      "project",          "verify-rh",       "verify-selection",
    "verify-packing",    "verify-maximal", "verify-classes",   "verify-weak",     "verify-strong",
    "verify-sum-lemma",  "sweep-sharpness", "search-sharpness"};

struct ExperimentConfig {
  std::string experiment;
  std::string name;
  std::vector<double> alpha{0.0};
  int depth = 8;
  int k = 4;
  std::optional<int> eval_depth;
  std::optional<std::uint64_t> seed;
  std::vector<WeightSpec> weights;
  std::size_t weight_count = 0;
  std::vector<FunctionSpec> functions;
  std::size_t function_count = 0;
  std::vector<double> p;
  std::vector<double> q;
  std::optional<double> r;
  std::optional<double> t;
  std::vector<int> j;
  std::vector<std::string> modes;
  std::size_t scenario_count = 0;
  std::string sweep_family = "power";
  std::vector<double> sweep_params;
  int budget = 40;
  bool bergman = false;
  bool export_data = false;

  /// Unknown keys, wrong types and out-of-range values raise ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::string& where = "config");
  nlohmann::json to_json() const;

  /// True when the experiment draws anything from a random stream.
  bool randomized() const;
  std::uint64_t require_seed() const;
};

/// A single experiment object, or {"suite": [...], ...defaults}; defaults are
/// merged under every suite entry.
std::vector<ExperimentConfig> parse_config(const nlohmann::json& j);
std::vector<ExperimentConfig> load_config(const std::filesystem::path& path);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<InequalityReport> rows;
  ReportSummary summary;
  nlohmann::json extra = nlohmann::json::object();
  /// Additional files (name relative to the output directory, contents).
  std::vector<std::pair<std::string, std::string>> attachments;

  nlohmann::json summary_json() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
};

/// Runs every configured experiment in order and writes <stem>.csv,
/// <stem>.json and attachments. Returns 0 iff every asserted row passed,
/// 1 on failed assertions, 2 on configuration errors.
int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log);

}  // namespace bergman
