#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "objgan/harness/config.hpp"
#include "objgan/harness/search.hpp"

namespace objgan::cli {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

/// Desk-scale defaults for the use case, overridden by the keys present in
/// the config file, then by --seed / --out.
harness::ExperimentConfig resolve_config(harness::UseCase use_case, const GlobalOptions& global);

/// Each command writes under config.output_dir and returns named summary
/// metrics, which are also printed.
harness::TrialOutcome train_aml_command(const harness::ExperimentConfig& config);
harness::TrialOutcome train_recsys_command(const harness::ExperimentConfig& config);

struct TheoryOptions {
  std::optional<double> alpha;
  std::optional<double> mu_d;
  std::optional<double> k;
  std::optional<double> eta;
  std::optional<long> steps;
  double mu_g0 = 0.0;
  double tolerance = 1e-3;
};
harness::TrialOutcome theory_sim_command(harness::ExperimentConfig config, const TheoryOptions& options);

void attack_eval_command(const std::vector<std::string>& runs, const std::vector<std::int64_t>& sizes,
                         const std::filesystem::path& out);
void detect_eval_command(const std::vector<std::string>& runs, std::uint64_t seed, const std::filesystem::path& out);
void hpsearch_command(const harness::ExperimentConfig& space, int trials);
void report_command(const std::string& kind, const std::vector<std::string>& inputs,
                    const harness::ExperimentConfig& config);

}  // namespace objgan::cli
