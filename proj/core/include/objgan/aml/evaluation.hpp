#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <torch/torch.h>

#include "objgan/aml/networks.hpp"
#include "objgan/aml/rules.hpp"

namespace objgan::aml {

/// A trained generator seen as a sample source: n -> (n, 2, M, E, T) amounts.
struct SyntheticSource {
  std::string run_id;
  std::function<torch::Tensor(std::int64_t)> sample;
};

struct LabeledFlows {
  torch::Tensor amounts;                // float32 (N, 2, M, E, T)
  std::vector<int> labels;              // 1 = synthetic (suspicious), 0 = real
  std::vector<std::string> provenance;  // "real" or "generated:<run id>"

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  LabeledFlows subset(const std::vector<std::int64_t>& indices) const;
};

/// Real samples labeled 0 followed by `synthetic_count` generated samples
/// labeled 1, split as evenly as possible across the sources (earlier sources
/// take the remainder).
LabeledFlows build_mixed_dataset(const std::vector<SyntheticSource>& generators, const torch::Tensor& real,
                                 std::int64_t synthetic_count);
/// Ratio form: synthetic_count = round(ratio * real count).
LabeledFlows build_mixed_dataset_ratio(const std::vector<SyntheticSource>& generators, const torch::Tensor& real,
                                       double ratio);

/// Deterministic split into train / test index sets, stratified by provenance.
std::pair<LabeledFlows, LabeledFlows> split_dataset(const LabeledFlows& data, double test_fraction,
                                                    std::uint64_t seed);

struct DetectionRow {
  std::string name;
  double alert_rate = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  long alerts = 0;
  long true_positives = 0;
};

struct DetectionReport {
  DetectionRow rules;
  DetectionRow model;
  DetectionRow combined;  // alert if either triggers
  long overlap_alerts = 0;
  long overlap_true_positives = 0;
  double model_threshold = 0.0;
  double requested_alert_rate = 0.0;
};

struct MatchRulesAlertRate {};
struct FixedThreshold {
  double threshold = 0.0;
};
using ThresholdPolicy = std::variant<MatchRulesAlertRate, FixedThreshold>;

/// Scores: higher means more suspicious.
using FlowScorer = std::function<torch::Tensor(const torch::Tensor& amounts)>;

/// Rules, model and their union on a labeled set. Under MatchRulesAlertRate
/// the model threshold is the one whose alert rate is nearest to the rules'.
DetectionReport evaluate_detection(const RuleConfig& rules, const FlowScorer& model, const LabeledFlows& test,
                                   const ThresholdPolicy& policy = MatchRulesAlertRate{});

/// Same report from precomputed alert vectors.
DetectionReport detection_report(const std::vector<int>& rule_alerts, const std::vector<int>& model_alerts,
                                 const std::vector<int>& labels);

struct DetectorTrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

/// Supervised training of a fresh critic-architecture classifier on a mixed
/// set (binary cross-entropy on logits, synthetic = positive).
AmlDiscriminator train_detector(const DiscriminatorConfig& config, const LabeledFlows& train,
                                const DetectorTrainConfig& options);

/// Detector logits per sample; higher = more likely synthetic.
torch::Tensor detector_scores(AmlDiscriminator& model, const torch::Tensor& amounts);

}  // namespace objgan::aml
