#pragma once

// Five-scenario alert engine and its differentiable surrogate.
//
// Per internal account m, with inflow_t / outflow_t the per-window sums over
// external slots and count_t the number of nonzero entries in window t:
//   R1 large inflow:     some span of W1 windows has sum(inflow) > theta1
//   R2 large outflow:    some span of W2 windows has sum(outflow) > theta2
//   R3 rapid movement:   some span of W3 windows has min(in, out) > theta3 and out >= rho * in
//   R4 sudden change:    some window has flow_t > kappa * mean(flow over the previous W4
//                        windows, zero padded) and flow_t > theta4, where flow = in + out
//   R5 high activity:    some span of W5 windows has sum(count) > theta5
// Spans only cover full windows inside the horizon (a span longer than the
// horizon is clamped to it).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <torch/torch.h>

namespace objgan::aml {

inline constexpr int kRuleCount = 5;

struct RuleConfig {
  int w1 = 7;
  double theta1 = 2500.0;
  int w2 = 7;
  double theta2 = 2500.0;
  int w3 = 3;
  double theta3 = 400.0;
  double rho = 0.8;
  int w4 = 14;
  double kappa = 8.0;
  double theta4 = 1400.0;
  int w5 = 14;
  double theta5 = 10.0;
  double temperature = 10.0;

  void validate() const;
};

/// Flat JSON object with one key per field above. Unknown keys are rejected.
RuleConfig read_rule_config(std::istream& in);
RuleConfig load_rule_config(const std::filesystem::path& path);
void write_rule_config(std::ostream& out, const RuleConfig& cfg);

/// Boolean alerts, shape (batch, M, 5). Accepts a single sample (2, M, E, T) or
/// a batch (B, 2, M, E, T); the single-sample form returns (M, 5).
torch::Tensor rules_engine(const torch::Tensor& amounts, const RuleConfig& cfg);

/// Any alert on any account, per sample: (B,) bool.
torch::Tensor sample_alerted(const torch::Tensor& amounts, const RuleConfig& cfg);

/// Soft alerts in [0, 1], shape (B, M, 5). Comparisons x > theta become
/// sigmoid(temperature * (x - theta) / theta), conjunctions become products and
/// "any window" becomes a softmax-weighted maximum with sharpness `temperature`.
/// `counts` defaults to indicator(amounts > 0); pass a straight-through mask to
/// route gradients into R5.
torch::Tensor rules_soft_alerts(const torch::Tensor& amounts, const RuleConfig& cfg,
                                const std::optional<torch::Tensor>& counts = std::nullopt,
                                std::optional<double> temperature = std::nullopt);

/// Mean soft-alert activation: differentiable alert penalty.
torch::Tensor rules_proxy(const torch::Tensor& amounts, const RuleConfig& cfg,
                          const std::optional<torch::Tensor>& counts = std::nullopt,
                          std::optional<double> temperature = std::nullopt);

}  // namespace objgan::aml
