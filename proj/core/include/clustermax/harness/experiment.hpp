#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustermax/cluster_process.hpp"
#include "clustermax/harness/config_file.hpp"
#include "clustermax/hawkes.hpp"
#include "clustermax/laws.hpp"
#include "clustermax/random_maxima.hpp"

namespace clustermax::harness {

enum class ExperimentKind {
  TailRatio,
  ClusterSizeLaw,
  HittingTimeEquivalence,
  ProcessMaxima,
  HawkesCrossCheck,
  LeftoverTrend,
};

std::string to_string(ExperimentKind kind);

enum class TailExpectation { Converge, Diverge };

// A validated experiment definition. Every model parameter has passed its
// module-level checks by the time this exists.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::TailRatio;
  std::uint64_t replications = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> horizons;
  std::string output = "results";
  std::optional<unsigned> workers;

  std::optional<MarkModel> marks;
  std::optional<ClusterSizePolicy> policy;
  std::optional<ParentProcess> parent;
  std::shared_ptr<const ClusterMechanism> mechanism;
  std::optional<FertilityModel> fertility;

  // tail-ratio
  std::vector<double> x_values;
  double mean_draws = 1.0;  // expected draws per cluster; multiplies the sequence index
  TailExpectation expect = TailExpectation::Converge;

  // process-maxima
  double mean_cluster_size = 1.0;  // E[K] + 1
  std::optional<double> ks_threshold;
  bool compare_unadjusted = true;

  // cluster-size-law, hitting-time-equivalence
  std::int64_t support_max = 20;
  double tv_threshold = 0.01;
  double mean_tolerance = 0.01;

  std::string canonical_text;
};

// Throws ConfigError with a "line N:" prefix.
ExperimentConfig build_experiment(const ConfigNode& root);
ExperimentConfig load_experiment(const std::string& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides master_seed
  std::optional<unsigned> workers;
  std::optional<std::filesystem::path> out;
  bool write_files = true;
};

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 a check failed, 3 iteration cap hit
  std::string message;
  nlohmann::json summary;
  std::filesystem::path out_dir;
};

inline constexpr const char* kOutputEnvVar = "CLUSTERMAX_OUT";

// Output directory precedence: --out, then $CLUSTERMAX_OUT, then the config.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const RunOptions& options);

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

nlohmann::json to_json(const stats::GofReport& report);

std::string sha256_hex(const std::string& text);

}  // namespace clustermax::harness
