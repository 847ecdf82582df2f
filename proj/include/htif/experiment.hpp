#pragma once

// End-to-end scenarios: generator -> engine -> receiver(s) -> estimators,
// with a JSON report and plot-ready CSV tables.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htif/config.hpp"

namespace htif {

enum class RunStatus { pass, fail, insufficient_data };

std::string_view to_string(RunStatus status);

// One pass/fail decision: value compared against [min, max] (either side optional).
struct Check {
  std::string name;
  double value = 0.0;
  std::optional<double> min;
  std::optional<double> max;
  bool pass = false;
};

struct RunReport {
  ExperimentConfig config;
  std::string config_hash;
  RunStatus status = RunStatus::fail;
  std::string message;  // reason for insufficient_data
  std::vector<Check> checks;
  nlohmann::ordered_json statistics = nlohmann::ordered_json::object();
  std::uint64_t samples = 0;
  double wall_seconds = 0.0;

  // Table contents; an empty string means the table does not apply to the scenario.
  std::string hill_sweep_csv;
  std::string dependence_ratios_csv;
  std::string spectral_histogram_csv;
  std::string walk_json;

  bool passed() const { return status == RunStatus::pass; }
  // 0 pass, 1 fail, 2 insufficient data.
  int exit_code() const;
  nlohmann::ordered_json to_json() const;
};

/// Runs the scenario and writes report.json, the applicable CSV tables,
/// timing.json (wall-clock, kept out of report.json so reports stay
/// byte-identical across reruns) and, when requested, events.csv into
/// config.output_dir. Shortfalls in data produce status insufficient_data,
/// never a silent pass.
RunReport run_experiment(const ExperimentConfig& config);

// Computes without touching the filesystem (events are not dumped).
RunReport evaluate_experiment(const ExperimentConfig& config);

void write_report_files(const RunReport& report, const std::filesystem::path& dir);

}  // namespace htif
