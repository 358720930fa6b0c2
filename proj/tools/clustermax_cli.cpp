#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "clustermax/errors.hpp"
#include "clustermax/harness/experiment.hpp"
#include "clustermax/version.hpp"

namespace {

// Exit codes: 0 all checks pass, 1 a check failed, 2 invalid config, 3 iteration cap hit.
constexpr int kInvalidConfig = 2;

void print_checks(const nlohmann::json& summary) {
  if (!summary.contains("checks")) return;
  for (const auto& c : summary["checks"]) {
    std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["label"].get<std::string>() << "  "
              << c["test"].get<std::string>() << " statistic=" << c["statistic"].dump()
              << " critical=" << c["critical"].dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation harness for maxima of marked cluster processes"};
  app.set_version_flag("--version", std::string(clustermax::kVersion));
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "Run an experiment and write results.csv, summary.json and manifest.json");
  run->add_option("config", run_config, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory (overrides $CLUSTERMAX_OUT and the config)");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Parse and validate a config without simulating");
  validate->add_option("config", validate_config, "Experiment config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalidConfig;
  }

  namespace h = clustermax::harness;
  const std::string& path = run->parsed() ? run_config : validate_config;
  std::optional<h::ExperimentConfig> config;
  try {
    config = h::load_experiment(path);
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kInvalidConfig;
  }

  if (validate->parsed()) {
    std::cout << path << ": ok (" << h::to_string(config->kind) << ", " << config->replications << " replications x "
              << config->horizons.size() << " horizons)\n";
    return 0;
  }

  h::RunOptions options;
  options.seed = seed;
  options.workers = workers;
  if (out) options.out = *out;
  try {
    const h::RunOutcome outcome = h::run_experiment(*config, options);
    print_checks(outcome.summary);
    std::cout << outcome.message << "; output in " << outcome.out_dir.string() << "\n";
    if (outcome.exit_code == 3) std::cerr << outcome.message << "\n";
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
