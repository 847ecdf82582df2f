#pragma once

// Experiment configuration: a versioned JSON document, validated strictly.
// Every field has a scenario-aware default, so {"schema_version": 1,
// "scenario": "..."} is a complete config.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "htif/mrv_input.hpp"

namespace htif {

inline constexpr int kSchemaVersion = 1;

enum class Scenario {
  forward_recurrence_rv,
  tau_independence,
  output_rv,
  output_independence,
  joint_mrv,
  full_dependence,
  hypothesis_audit,
  walk_unit,
};

std::string_view to_string(Scenario scenario);
// Throws ConfigError naming "scenario" for unknown ids.
Scenario parse_scenario(std::string_view text);

struct TopologyConfig {
  std::size_t n = 0;
  std::vector<std::size_t> inhibitory;  // 0-based
  std::vector<std::size_t> pool_a;      // 0-based, sorted
  std::vector<std::size_t> pool_b;
};

struct WalkConfig {
  double p = 0.7;
  int b = 10;
  std::uint64_t max_steps = 1'000'000;
};

struct AnalysisConfig {
  std::vector<double> quantiles;
  double decision_level = 0.999;
  std::vector<std::size_t> lags;
  std::optional<std::size_t> hill_k;  // nullopt: ceil(N^0.6)
  std::vector<double> radial_t;
  double radial_level = 0.995;
  std::size_t spectral_bins = 10;
  std::size_t pair_a = 1;  // 1-based ISI indices of the superimposed pair per replication
  std::size_t pair_b = 1;
  std::int64_t homogeneity_factor = 3;
  std::uint64_t max_events = 0;  // per engine run; 0 picks a budget-proportional cap
};

struct ThresholdConfig {
  double hill_tolerance = 0.1;
  double equivalence_lo = 0.5;
  double equivalence_hi = 2.0;
  double independence_max = 0.05;
  double dependence_min = 0.05;
  double radial_max_deviation = 0.05;
  double walk_mean_rel_tolerance = 0.02;
  double walk_finite_fraction_tolerance = 0.003;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::hypothesis_audit;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;  // after budget_scale
  double budget_scale = 1.0;
  std::filesystem::path output_dir = "out";
  InputGeneratorSpec generator;
  TopologyConfig topology;
  std::optional<std::vector<double>> offsets;  // nullopt: "zero"
  int threshold_a = 5;
  int threshold_b = 5;
  WalkConfig walk;
  AnalysisConfig analysis;
  ThresholdConfig thresholds;
  bool dump_events = false;
};

// Command-line overrides applied before defaults are resolved and validated.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<double> budget_scale;
  bool dump_events = false;
};

/// Parses and validates. Malformed JSON, unknown keys and invalid values throw
/// ConfigError naming the offending key (e.g. "generator.alpha").
ExperimentConfig parse_config(const nlohmann::json& document, const ConfigOverrides& overrides = {});
ExperimentConfig parse_config_file(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// Fully resolved config, in the input schema (pools and inhibitory ids 1-based).
// output_dir and dump_events are left out: they do not affect results.
nlohmann::ordered_json resolved_json(const ExperimentConfig& config);

// FNV-1a of resolved_json(config).dump().
std::string config_hash(const ExperimentConfig& config);

}  // namespace htif
