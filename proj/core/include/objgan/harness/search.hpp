#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "objgan/harness/config.hpp"

namespace objgan::harness {

struct RunRecord {
  std::string run_id;
  std::string status = "ok";  // "ok" or "crashed"
  std::string error;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::map<std::string, double> hyperparameters;
  std::map<std::string, double> metrics;
  std::vector<std::string> checkpoints;
};

std::string to_json_line(const RunRecord& record);
RunRecord parse_run_record(const std::string& line);

/// Append-only JSON Lines store. Appending an existing run id is an error.
class RunRegistry {
 public:
  explicit RunRegistry(std::filesystem::path path);

  void append(const RunRecord& record);
  std::vector<RunRecord> load() const;
  bool contains(const std::string& run_id) const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Ranges searched when a config leaves a hyperparameter fixed.
ExperimentConfig default_search_space(UseCase use_case);

/// Draws a point: log-uniform within each range (a degenerate range stays
/// constant). AML trials pin alpha = 1; recsys trials set beta = 1 - alpha.
ExperimentConfig sample_trial(const ExperimentConfig& space, std::mt19937_64& rng);

/// Trial result: named final metrics and optional checkpoint paths.
struct TrialOutcome {
  std::map<std::string, double> metrics;
  std::vector<std::string> checkpoints;
};
using TrialFn = std::function<TrialOutcome(const ExperimentConfig& resolved, const std::string& run_id)>;

/// Runs n_trials (>= 1) sampled trials. A throwing trial is recorded with
/// status "crashed" and the search continues. Records are appended to
/// `registry` when given.
std::vector<RunRecord> random_search(const ExperimentConfig& space, int n_trials, const TrialFn& trial,
                                     RunRegistry* registry = nullptr);

}  // namespace objgan::harness
