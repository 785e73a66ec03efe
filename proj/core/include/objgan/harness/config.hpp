#pragma once

// Flat experiment configuration. Files are JSON objects whose keys are the
// field names below; unknown keys are errors. Ranged hyperparameters accept a
// number or a two-element [low, high] array.

#include <cstdint>
#include <filesystem>
#include <string>

namespace objgan::harness {

enum class UseCase { Aml, Recsys, Theory };

std::string to_string(UseCase u);
UseCase parse_use_case(const std::string& s);

struct Range {
  double low = 0.0;
  double high = 0.0;

  bool ranged() const { return low != high; }
  static Range fixed(double v) { return {v, v}; }
};

struct ExperimentConfig {
  UseCase use_case = UseCase::Aml;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // loss weights / search ranges
  Range alpha = Range::fixed(1.0);
  Range beta = Range::fixed(1e3);
  Range gamma = Range::fixed(2e3);
  Range learning_rate = Range::fixed(1e-3);

  // training
  int epochs = 10;
  int batch_size = 64;
  int critic_steps = 5;
  int generator_steps_per_epoch = 0;
  double gradient_penalty = 10.0;

  // aml
  std::string flows_path;  // binary flow dataset; synthetic data when empty
  std::int64_t accounts = 5000;
  std::string rules_path;  // rule thresholds; defaults when empty

  // recsys
  std::string ratings_path;  // "UserID::MovieID::Rating::Timestamp"; synthetic when empty
  std::int64_t target_item = -1;  // -1 picks a mid-popularity item by seed
  std::int64_t neighbors = 400;
  std::int64_t top_n = 10;
  std::int64_t group_size = 300;
  std::int64_t objective_users = 512;

  // theory
  double mu_d = 0.0;
  double k = 4.0;
  double eta = 0.05;
  long steps = 5000;

  /// Throws std::invalid_argument on ill-ordered ranges or out-of-domain values.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, fixed-range fields as numbers).
std::string to_json(const ExperimentConfig& config);
/// Hex BLAKE2b-256 of the canonical JSON.
std::string config_digest(const ExperimentConfig& config);

}  // namespace objgan::harness
