#pragma once

// Synthetic legitimate transaction activity, standing in for a confidential
// bank dataset.
//
// Each internal account draws a transaction count from a truncated Pareto law,
// floor(x_min * U^(-1 / shape)) capped at max_transactions (accounts with zero
// draws stay idle). Each transaction picks a direction with probability
// inflow_probability, a counterparty uniformly from the E external slots of
// the account's group, an amount from LogNormal(log(median_amount), sigma)
// rounded to cents (at least 1.00), and a timestamp uniform over the horizon.
// Accounts are grouped M at a time into one flow tensor sample.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "objgan/aml/flow_tensor.hpp"

namespace objgan::aml {

struct SyntheticConfig {
  std::int64_t accounts = 5000;
  FlowShape shape;
  double horizon_days = 300.0;
  std::int64_t origin = 1672531200;  // 2023-01-01T00:00:00Z
  double count_x_min = 1.5;
  double count_shape = 1.8;
  std::int64_t max_transactions = 40;
  double median_amount = 120.0;
  double amount_sigma = 0.9;
  double inflow_probability = 0.5;

  double window_seconds() const { return horizon_days * 86400.0 / static_cast<double>(shape.windows); }
};

enum class Label { Legitimate, Suspicious };

struct AmlSample {
  FlowTensor tensor;
  std::string provenance = "real";  // "real" or "generated:<run id>"
  std::optional<Label> label;
  std::int64_t active_accounts = 0;
};

struct SyntheticStats {
  std::int64_t transactions = 0;
  double max_account_total_flow = 0.0;   // max over accounts of in + out
  double mean_account_total_flow = 0.0;
  double mean_account_throughput = 0.0;  // mean over accounts of sqrt(in * out)
};

struct SyntheticAmlData {
  std::vector<AmlSample> samples;
  std::vector<TransactionRecord> records;
  SyntheticStats stats;

  /// Stacked float32 amounts (N, 2, M, E, T).
  torch::Tensor stacked_amounts() const;
};

SyntheticAmlData synth_legit_data(const SyntheticConfig& config, std::uint64_t seed);

/// Per-account statistics over a stacked (N, 2, M, E, T) amounts tensor.
/// `transactions` counts nonzero entries.
SyntheticStats flow_stats(const torch::Tensor& amounts);

}  // namespace objgan::aml
