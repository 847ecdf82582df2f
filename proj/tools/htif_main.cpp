// htif: run tail-property scenarios, audit input hypotheses, or
// exercise the abstract first-passage walk.
//
// Exit codes: 0 pass, 1 fail, 2 insufficient data, 3 configuration error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "htif/config.hpp"
#include "htif/errors.hpp"
#include "htif/experiment.hpp"

namespace {

constexpr int kExitConfigError = 3;

void print_summary(const htif::RunReport& report) {
  std::cout << "scenario " << htif::to_string(report.config.scenario) << "  config " << report.config_hash
            << "  status " << htif::to_string(report.status) << '\n';
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "  PASS  " : "  FAIL  ") << c.name << " = " << c.value;
    if (c.min && c.max) {
      std::cout << "  (expected in [" << *c.min << ", " << *c.max << "])";
    } else if (c.min) {
      std::cout << "  (expected >= " << *c.min << ")";
    } else if (c.max) {
      std::cout << "  (expected <= " << *c.max << ")";
    }
    std::cout << '\n';
  }
  if (!report.message.empty()) std::cout << "  " << report.message << '\n';
  std::cout << "outputs in " << report.config.output_dir.string() << '\n';
  std::cerr << "wall clock " << report.wall_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed integrate-and-fire network simulator and tail-statistics checker"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> budget_scale;
  bool dump_events = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out-dir", out_dir, "Directory for report.json and CSV tables");
    sub->add_option("--budget-scale", budget_scale, "Multiply the sample budget (quick smoke runs)")
        ->check(CLI::PositiveNumber);
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the scenario named in a JSON config");
  run->add_option("config", config_path, "Path to the JSON config")->required()->check(CLI::ExistingFile);
  run->add_flag("--dump-events", dump_events, "Also write the pooled input stream to events.csv");
  add_common(run);

  auto* audit = app.add_subcommand("audit", "Check hypotheses H1-H4 on the generator described by a config");
  audit->add_option("config", config_path, "Path to the JSON config")->required()->check(CLI::ExistingFile);
  add_common(audit);

  double p = 0.7;
  int b = 10;
  std::uint64_t max_steps = 1'000'000;
  std::uint64_t replications = 100'000;
  auto* walk = app.add_subcommand("walk", "First passage of the +-1 walk through level b");
  walk->add_option("--p", p, "Probability of a positive jump (1/2 is excluded)");
  walk->add_option("--b", b, "Threshold");
  walk->add_option("--max-steps", max_steps, "Truncation for walks drifting away from b");
  walk->add_option("--replications", replications, "Number of independent walks");
  add_common(walk);

  CLI11_PARSE(app, argc, argv);

  try {
    htif::ConfigOverrides overrides;
    overrides.seed = seed;
    if (out_dir) overrides.output_dir = *out_dir;
    overrides.budget_scale = budget_scale;
    overrides.dump_events = dump_events;

    htif::ExperimentConfig config;
    if (*walk) {
      nlohmann::json doc = {{"schema_version", htif::kSchemaVersion},
                            {"scenario", "walk_unit"},
                            {"budget", replications},
                            {"walk", {{"p", p}, {"b", b}, {"max_steps", max_steps}}}};
      config = htif::parse_config(doc, overrides);
    } else {
      config = htif::parse_config_file(config_path, overrides);
      if (*audit && config.scenario != htif::Scenario::hypothesis_audit) {
        throw htif::ConfigError("scenario", "audit expects a hypothesis_audit config");
      }
    }
    const auto report = htif::run_experiment(config);
    print_summary(report);
    return report.exit_code();
  } catch (const htif::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const htif::ModelExclusionError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
