#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dofw/algorithms.hpp"
#include "dofw/feasible_set.hpp"
#include "dofw/metrics.hpp"
#include "dofw/network.hpp"

namespace dofw {

struct ConfigIssue {
  std::string path;  // JSON pointer-like, e.g. "network.n"
  std::string message;
};

struct ValidationReport {
  std::vector<ConfigIssue> issues;
  bool ok() const { return issues.empty(); }
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct RunSpec {
  std::string label;
  Algorithm algorithm = Algorithm::dofw;
  StepSchedule step;
  bool measured_budget = false;  // budget step tuned with the stream's own H_T
  DogdVariant dogd_variant = DogdVariant::gradient_at_mixed;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;

  Topology topology = Topology::cycle_split;
  int agents = 20;
  int period = 20;
  std::uint64_t network_seed = 0;

  bool static_loss = false;
  std::vector<int> dims{8};
  double lambda1 = 5e-6;
  std::uint64_t loss_seed = 0;
  bool static_features = false;

  std::string set_kind = "simplex";
  double radius = 1.0;
  double lo = 0.0, hi = 1.0;

  std::vector<RunSpec> runs;
  std::vector<int> horizons{2000};
  std::filesystem::path output_dir;  // empty: nothing written

  RegretPoint regret_point = RegretPoint::played;
  bool full_diagnostics = false;
  bool write_schedule = false;
  bool theory_checks = true;  // regret bound and lemma checks for DOFW cells
  double comparator_tolerance = 1e-8;

  FeasibleSet make_set(int dim) const;
};

/// Parses and structurally validates; throws ConfigError listing every issue.
ExperimentConfig parse_config(const nlohmann::json& document);

/// Structural validation plus certification of every schedule the config
/// would generate. Never throws for bad input.
ValidationReport validate(const nlohmann::json& document);

struct CheckResult {
  std::string name;
  bool ok = true;
  double value = 0.0;      // worst observed quantity
  double tolerance = 0.0;  // allowed maximum (or the bound it is compared to)
};

struct CellResult {
  std::string label;
  Algorithm algorithm = Algorithm::dofw;
  int dim = 0;
  int horizon = 0;
  double alpha = 0.0;
  RegretReport regret;
  double mean_round_ns = 0.0;
  std::vector<CheckResult> checks;
  std::vector<LemmaCheck> lemmas;
  std::optional<BoundTerms> bound;  // at the full horizon
  std::string stem;                 // output file prefix

  bool ok() const;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  bool ok() const;
};

/// Runs every (run, d, T) cell in order and writes CSVs plus summary.json to
/// config.output_dir when it is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace dofw
