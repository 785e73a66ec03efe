#include "objgan/aml/evaluation.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "objgan/detection_metrics.hpp"

namespace objgan::aml {

LabeledFlows LabeledFlows::subset(const std::vector<std::int64_t>& indices) const {
  LabeledFlows out;
  auto idx = torch::tensor(indices, torch::kLong);
  out.amounts = amounts.index_select(0, idx);
  for (auto i : indices) {
    out.labels.push_back(labels[static_cast<std::size_t>(i)]);
    out.provenance.push_back(provenance[static_cast<std::size_t>(i)]);
  }
  return out;
}

LabeledFlows build_mixed_dataset(const std::vector<SyntheticSource>& generators, const torch::Tensor& real,
                                 std::int64_t synthetic_count) {
  if (generators.empty()) throw std::invalid_argument("build_mixed_dataset: at least one generator is required");
  if (synthetic_count < 0) throw std::invalid_argument("build_mixed_dataset: negative synthetic count");
  LabeledFlows out;
  std::vector<torch::Tensor> parts;
  if (real.defined() && real.size(0) > 0) {
    parts.push_back(real.to(torch::kFloat32));
    out.labels.assign(static_cast<std::size_t>(real.size(0)), 0);
    out.provenance.assign(static_cast<std::size_t>(real.size(0)), "real");
  }
  const auto g = static_cast<std::int64_t>(generators.size());
  for (std::int64_t i = 0; i < g; ++i) {
    const auto n = synthetic_count / g + (i < synthetic_count % g ? 1 : 0);
    if (n == 0) continue;
    torch::NoGradGuard no_grad;
    auto samples = generators[static_cast<std::size_t>(i)].sample(n).to(torch::kFloat32);
    if (samples.size(0) != n) throw std::runtime_error("build_mixed_dataset: generator returned wrong sample count");
    parts.push_back(samples);
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(n), 1);
    out.provenance.insert(out.provenance.end(), static_cast<std::size_t>(n),
                          "generated:" + generators[static_cast<std::size_t>(i)].run_id);
  }
  if (parts.empty()) throw std::invalid_argument("build_mixed_dataset: empty dataset");
  out.amounts = torch::cat(parts, 0);
  return out;
}

LabeledFlows build_mixed_dataset_ratio(const std::vector<SyntheticSource>& generators, const torch::Tensor& real,
                                       double ratio) {
  if (!(ratio >= 0.0)) throw std::invalid_argument("build_mixed_dataset: ratio must be >= 0");
  const auto n_real = real.defined() ? real.size(0) : 0;
  return build_mixed_dataset(generators, real, static_cast<std::int64_t>(std::llround(ratio * n_real)));
}

std::pair<LabeledFlows, LabeledFlows> split_dataset(const LabeledFlows& data, double test_fraction,
                                                    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("split: fraction must be in (0, 1)");
  std::map<std::string, std::vector<std::int64_t>> groups;
  for (std::int64_t i = 0; i < data.size(); ++i) groups[data.provenance[static_cast<std::size_t>(i)]].push_back(i);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  std::vector<std::int64_t> train, test;
  for (auto& [name, idx] : groups) {
    auto perm = torch::randperm(static_cast<std::int64_t>(idx.size()), gen, torch::kLong);
    const auto n_test = static_cast<std::int64_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    for (std::int64_t k = 0; k < perm.size(0); ++k) {
      const auto i = idx[static_cast<std::size_t>(perm[k].item<std::int64_t>())];
      (k < n_test ? test : train).push_back(i);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

namespace {

DetectionRow row(std::string name, const std::vector<int>& alerts, const std::vector<int>& labels) {
  DetectionRow r;
  r.name = std::move(name);
  long positives = 0;
  for (std::size_t i = 0; i < alerts.size(); ++i) {
    r.alerts += alerts[i] != 0;
    r.true_positives += alerts[i] != 0 && labels[i] != 0;
    positives += labels[i] != 0;
  }
  const double n = static_cast<double>(alerts.size());
  r.alert_rate = n > 0 ? r.alerts / n : 0.0;
  r.recall = positives > 0 ? static_cast<double>(r.true_positives) / positives : 0.0;
  r.precision = r.alerts > 0 ? static_cast<double>(r.true_positives) / r.alerts : 0.0;
  return r;
}

}  // namespace

DetectionReport detection_report(const std::vector<int>& rule_alerts, const std::vector<int>& model_alerts,
                                 const std::vector<int>& labels) {
  if (rule_alerts.size() != labels.size() || model_alerts.size() != labels.size()) {
    throw std::invalid_argument("detection_report: size mismatch");
  }
  std::vector<int> either(labels.size());
  DetectionReport report;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    either[i] = rule_alerts[i] || model_alerts[i];
    const bool both = rule_alerts[i] && model_alerts[i];
    report.overlap_alerts += both;
    report.overlap_true_positives += both && labels[i];
  }
  report.rules = row("Rules", rule_alerts, labels);
  report.model = row("Model", model_alerts, labels);
  report.combined = row("Rules + Model", either, labels);
  return report;
}

DetectionReport evaluate_detection(const RuleConfig& rules, const FlowScorer& model, const LabeledFlows& test,
                                   const ThresholdPolicy& policy) {
  if (test.size() == 0) throw std::invalid_argument("evaluate_detection: empty test set");
  torch::NoGradGuard no_grad;
  auto rule_hits = sample_alerted(test.amounts, rules).to(torch::kInt32).contiguous();
  std::vector<int> rule_alerts(rule_hits.data_ptr<int>(), rule_hits.data_ptr<int>() + rule_hits.numel());

  auto s = model(test.amounts).to(torch::kFloat64).contiguous().view({-1});
  std::vector<double> scores(s.data_ptr<double>(), s.data_ptr<double>() + s.numel());

  const double rules_rate =
      static_cast<double>(std::accumulate(rule_alerts.begin(), rule_alerts.end(), 0L)) / static_cast<double>(test.size());
  double threshold = 0.0;
  double requested = rules_rate;
  if (std::holds_alternative<FixedThreshold>(policy)) {
    threshold = std::get<FixedThreshold>(policy).threshold;
    requested = std::numeric_limits<double>::quiet_NaN();
  } else {
    threshold = threshold_for_alert_rate(scores, rules_rate);
  }
  std::vector<int> model_alerts(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) model_alerts[i] = scores[i] > threshold;

  auto report = detection_report(rule_alerts, model_alerts, test.labels);
  report.model_threshold = threshold;
  report.requested_alert_rate = requested;
  return report;
}

AmlDiscriminator train_detector(const DiscriminatorConfig& config, const LabeledFlows& train,
                                const DetectorTrainConfig& options) {
  if (train.size() == 0) throw std::invalid_argument("train_detector: empty training set");
  torch::manual_seed(options.seed);
  AmlDiscriminator model(config);
  torch::optim::Adam opt(model->parameters(), torch::optim::AdamOptions(options.learning_rate));
  auto gen = at::make_generator<at::CPUGeneratorImpl>(options.seed);
  auto labels = torch::tensor(train.labels, torch::kFloat32);
  const auto n = train.size();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    auto perm = torch::randperm(n, gen, torch::kLong);
    for (std::int64_t start = 0; start < n; start += options.batch_size) {
      auto idx = perm.slice(0, start, std::min(n, start + options.batch_size));
      auto x = train.amounts.index_select(0, idx);
      auto logits = detector_scores(model, x);
      auto loss = torch::binary_cross_entropy_with_logits(logits, labels.index_select(0, idx));
      opt.zero_grad();
      loss.backward();
      opt.step();
    }
  }
  model->eval();
  return model;
}

torch::Tensor detector_scores(AmlDiscriminator& model, const torch::Tensor& amounts) {
  auto a = amounts.to(torch::kFloat32);
  return model->forward(a, (a > 0).to(torch::kFloat32));
}

}  // namespace objgan::aml
