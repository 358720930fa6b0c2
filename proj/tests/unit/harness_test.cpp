#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "clustermax/errors.hpp"
#include "clustermax/harness/experiment.hpp"

namespace clustermax::harness {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("clustermax_harness_test_" + name);
  fs::remove_all(dir);
  return dir;
}

// Message of the ConfigError thrown by building `text`.
std::string build_error(const std::string& text) {
  try {
    build_experiment(parse_config(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kBorel = R"(experiment = cluster-size-law
replications = 2000
master_seed = 17
mean_tolerance = 0.2
tv_threshold = 0.1
marks {
  family = exponential
  rate = 1
}
fertility {
  kernel = exponential
  kappa = 0.5
  theta = 1
}
)";

TEST(ConfigParser, NestedBlocksAndComments) {
  const auto root = parse_config("a = 1  # trailing\n# full line\nouter {\n  b = x, y\n  inner {\n    c = 2\n  }\n}\n");
  EXPECT_EQ(root.entries.at("a").value, "1");
  EXPECT_EQ(root.blocks.at("outer")->entries.at("b").value, "x, y");
  EXPECT_EQ(root.blocks.at("outer")->blocks.at("inner")->entries.at("c").line, 6);
}

TEST(ConfigParser, SyntaxErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(message("a = 1\n}\n").rfind("line 2:", 0), 0u);
  EXPECT_EQ(message("a = 1\nb\n").rfind("line 2:", 0), 0u);
  EXPECT_EQ(message("a = 1\na = 2\n").rfind("line 2:", 0), 0u);
  EXPECT_EQ(message("x {\na = 1\n").rfind("line 1:", 0), 0u);
  EXPECT_EQ(message("a =\n").rfind("line 1:", 0), 0u);
  EXPECT_EQ(message("b@d = 1\n").rfind("line 1:", 0), 0u);
}

TEST(ConfigParser, CanonicalFormIgnoresLayout) {
  const auto a = parse_config("b = 2\na = 1\nblk {\n x = 3\n}\n");
  const auto b = parse_config("# comment\nblk {\n   x = 3   \n}\na = 1\n\nb = 2\n");
  EXPECT_EQ(canonicalize(a), canonicalize(b));
  EXPECT_EQ(canonicalize(a), "a=1\nb=2\nblk.x=3\n");
}

TEST(BuildExperiment, AcceptsValidConfig) {
  const auto c = build_experiment(parse_config(kBorel));
  EXPECT_EQ(c.kind, ExperimentKind::ClusterSizeLaw);
  EXPECT_EQ(c.replications, 2000u);
  EXPECT_EQ(c.master_seed, 17u);
  EXPECT_EQ(c.fertility->kappa(), 0.5);
}

TEST(BuildExperiment, UnknownKeyIsAnErrorAtItsLine) {
  std::string text = kBorel;
  text.insert(text.find("  theta"), "  thetta = 2\n");
  const std::string err = build_error(text);
  EXPECT_NE(err.find("line 13"), std::string::npos) << err;
  EXPECT_NE(err.find("thetta"), std::string::npos) << err;
}

TEST(BuildExperiment, SupercriticalKappaRejected) {
  std::string text = kBorel;
  text.replace(text.find("kappa = 0.5"), 11, "kappa = 1.0");
  const std::string err = build_error(text);
  EXPECT_EQ(err.rfind("line 10:", 0), 0u) << err;
  EXPECT_NE(err.find("kappa"), std::string::npos);
}

TEST(BuildExperiment, Rejections) {
  EXPECT_NE(build_error("experiment = nope\nreplications = 1\nmaster_seed = 1\n").find("unknown experiment"),
            std::string::npos);
  EXPECT_NE(build_error("experiment = tail-ratio\nreplications = 1\n").find("master_seed"), std::string::npos);
  // x outside the Frechet support.
  const std::string tail = "experiment = tail-ratio\nreplications = 10\nmaster_seed = 1\nhorizons = 10\nx = -1\n"
                           "marks {\n family = pareto\n alpha = 2\n}\npolicy {\n kind = deterministic\n k = 1\n}\n";
  EXPECT_EQ(build_error(tail).rfind("line 5:", 0), 0u) << build_error(tail);
  // geometric stopping that can never stop
  const std::string shift = "experiment = tail-ratio\nreplications = 10\nmaster_seed = 1\nhorizons = 10\n"
                            "marks {\n family = pareto\n alpha = 2\n}\npolicy {\n kind = geometric-stopping\n"
                            " coupling = shift\n shift = 1\n threshold {\n  family = pareto\n  alpha = 2\n }\n}\n";
  EXPECT_EQ(build_error(shift).rfind("line 9:", 0), 0u) << build_error(shift);
  // parent with infinite mean inter-arrival time is caught through nu
  const std::string parent = "experiment = leftover-trend\nreplications = 10\nmaster_seed = 1\nhorizons = 1, 2, 3\n"
                             "marks {\n family = pareto\n alpha = 2\n}\nparent {\n nu = 0\n}\n";
  EXPECT_EQ(build_error(parent).rfind("line 10:", 0), 0u) << build_error(parent);
}

TEST(Runner, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, OutputDirectoryPrecedence) {
  ExperimentConfig c;
  c.output = "from-config";
  RunOptions o;
  unsetenv(kOutputEnvVar);
  EXPECT_EQ(resolve_output_dir(c, o), fs::path("from-config"));
  setenv(kOutputEnvVar, "from-env", 1);
  EXPECT_EQ(resolve_output_dir(c, o), fs::path("from-env"));
  o.out = "from-flag";
  EXPECT_EQ(resolve_output_dir(c, o), fs::path("from-flag"));
  unsetenv(kOutputEnvVar);
}

TEST(Runner, WorkerCountDoesNotChangeResults) {
  const auto c = build_experiment(parse_config(kBorel));
  std::vector<std::string> csv;
  for (unsigned w : {1u, 3u, 8u}) {
    RunOptions o;
    o.workers = w;
    o.out = scratch("workers" + std::to_string(w));
    const auto outcome = run_experiment(c, o);
    EXPECT_EQ(outcome.exit_code, 0) << outcome.message;
    csv.push_back(read_file(*o.out / "results.csv"));
    EXPECT_TRUE(fs::exists(*o.out / "summary.json"));
    EXPECT_TRUE(fs::exists(*o.out / "manifest.json"));
    EXPECT_TRUE(fs::exists(*o.out / "plots" / "borel_pmf.dat"));
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(csv[0], csv[2]);
}

TEST(Runner, CsvLayout) {
  const std::string text = "experiment = leftover-trend\nreplications = 7\nmaster_seed = 99\nhorizons = 5, 10, 20\n"
                           "marks {\n family = exponential\n rate = 1\n}\nparent {\n nu = 1\n}\n"
                           "mechanism {\n kind = mixed-binomial\n size {\n  law = poisson\n  mean = 1\n }\n"
                           " offset {\n  law = exponential\n  rate = 1\n }\n}\n";
  const auto c = build_experiment(parse_config(text));
  RunOptions o;
  o.out = scratch("layout");
  run_experiment(c, o);
  std::istringstream in(read_file(*o.out / "results.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "experiment,horizon,replication,seedHigh,seedLow,jT,jTOverT,tauT");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 21u);
  EXPECT_EQ(rows[0].rfind("leftover-trend,5,0,99,0,", 0), 0u);
  // replication 3 at horizon index 2: seedLow = (3 << 32) | 2
  EXPECT_EQ(rows[2 * 7 + 3].rfind("leftover-trend,20,3,99,12884901890,", 0), 0u);
}

TEST(Runner, SeedOverrideChangesResultsAndManifest) {
  const auto c = build_experiment(parse_config(kBorel));
  RunOptions a, b;
  a.out = scratch("seed_a");
  b.out = scratch("seed_b");
  b.seed = 18;
  run_experiment(c, a);
  run_experiment(c, b);
  EXPECT_NE(read_file(*a.out / "results.csv"), read_file(*b.out / "results.csv"));
  const auto manifest = nlohmann::json::parse(read_file(*b.out / "manifest.json"));
  EXPECT_EQ(manifest["masterSeed"], 18);
  EXPECT_EQ(manifest["configHash"], "sha256:" + sha256_hex(c.canonical_text));
}

TEST(Runner, FailedCheckExitsOne) {
  std::string text = kBorel;
  text.replace(text.find("mean_tolerance = 0.2"), 19, "mean_tolerance = 1e-12");
  const auto c = build_experiment(parse_config(text));
  RunOptions o;
  o.write_files = false;
  const auto outcome = run_experiment(c, o);
  EXPECT_EQ(outcome.exit_code, 1);
  EXPECT_FALSE(outcome.summary["pass"].get<bool>());
}

TEST(Runner, IterationCapExitsThreeNamingReplicationAndSeed) {
  const std::string text = "experiment = process-maxima\nreplications = 3\nmaster_seed = 5\nhorizons = 2\n"
                           "marks {\n family = pareto\n alpha = 2\n}\nparent {\n nu = 1\n}\n"
                           "mechanism {\n kind = mixed-binomial\n size {\n  law = fixed\n  k = 10000001\n }\n"
                           " offset {\n  law = exponential\n  rate = 1\n }\n}\n";
  const auto c = build_experiment(parse_config(text));
  RunOptions o;
  o.workers = 2;
  o.write_files = false;
  const auto outcome = run_experiment(c, o);
  EXPECT_EQ(outcome.exit_code, 3);
  EXPECT_NE(outcome.message.find("replication 0"), std::string::npos) << outcome.message;
  EXPECT_NE(outcome.message.find("seed 5"), std::string::npos) << outcome.message;
}

// Pass flags in summary.json recomputed from results.csv.
TEST(Runner, SummaryIsRecomputableFromCsv) {
  const std::string text = "experiment = tail-ratio\nreplications = 20000\nmaster_seed = 3\nhorizons = 100\n"
                           "x = 1, 2\nmarks {\n family = pareto\n alpha = 1\n}\npolicy {\n kind = deterministic\n k = 1\n}\n";
  const auto c = build_experiment(parse_config(text));
  RunOptions o;
  o.out = scratch("recompute");
  const auto outcome = run_experiment(c, o);
  std::istringstream in(read_file(*o.out / "results.csv"));
  std::string line;
  std::getline(in, line);
  std::uint64_t above1 = 0, above2 = 0, rows = 0;
  while (std::getline(in, line)) {
    const double z = std::stod(line.substr(line.rfind(',') + 1));
    above1 += z > 1.0;
    above2 += z > 2.0;
    ++rows;
  }
  ASSERT_EQ(rows, 20000u);
  const auto& tr = outcome.summary["details"]["tailRatio"];
  EXPECT_EQ(tr[0]["exceedances"].get<std::uint64_t>(), above1);
  EXPECT_EQ(tr[1]["exceedances"].get<std::uint64_t>(), above2);
  for (const auto& check : outcome.summary["checks"]) {
    EXPECT_EQ(check["pass"].get<bool>(), check["statistic"].get<double>() <= check["critical"].get<double>());
  }
  // Deterministic(1): the finite-n ratio is exactly the tail measure.
  EXPECT_DOUBLE_EQ(tr[0]["exactFiniteN"].get<double>(), 1.0);
}

}  // namespace
}  // namespace clustermax::harness
