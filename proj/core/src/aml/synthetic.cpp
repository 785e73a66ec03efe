#include "objgan/aml/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "objgan/aml/objective.hpp"

namespace objgan::aml {

namespace {

std::string account_id(char prefix, std::int64_t n) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%c%07lld", prefix, static_cast<long long>(n));
  return buf;
}

}  // namespace

torch::Tensor SyntheticAmlData::stacked_amounts() const {
  if (samples.empty()) return {};
  std::vector<torch::Tensor> parts;
  parts.reserve(samples.size());
  for (const auto& s : samples) parts.push_back(s.tensor.amounts.to(torch::kFloat32));
  return torch::stack(parts);
}

SyntheticStats flow_stats(const torch::Tensor& amounts) {
  SyntheticStats stats;
  if (!amounts.defined() || amounts.numel() == 0) return stats;
  auto x = amounts.to(torch::kFloat64);
  auto in = x.select(1, 0).sum({-1, -2});
  auto out = x.select(1, 1).sum({-1, -2});
  auto total = (in + out).flatten();
  stats.max_account_total_flow = total.max().item<double>();
  stats.mean_account_total_flow = total.mean().item<double>();
  stats.mean_account_throughput = account_throughput(x).mean().item<double>();
  stats.transactions = (x > 0).sum().item<std::int64_t>();
  return stats;
}

SyntheticAmlData synth_legit_data(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.accounts < 0) throw std::invalid_argument("synthetic data: account count must be >= 0");
  SyntheticAmlData data;
  if (config.accounts == 0) return data;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::lognormal_distribution<double> amount(std::log(config.median_amount), config.amount_sigma);
  std::bernoulli_distribution inflow(config.inflow_probability);
  const auto& shape = config.shape;
  std::uniform_int_distribution<std::int64_t> slot(0, shape.external_accounts - 1);
  const double horizon_seconds = config.horizon_days * 86400.0;
  const double window = config.window_seconds();

  const std::int64_t groups = (config.accounts + shape.internal_accounts - 1) / shape.internal_accounts;
  double flow_sum = 0.0;
  double throughput_sum = 0.0;
  for (std::int64_t g = 0; g < groups; ++g) {
    const std::int64_t first = g * shape.internal_accounts;
    const std::int64_t active = std::min(shape.internal_accounts, config.accounts - first);
    std::vector<std::string> internal;
    for (std::int64_t m = 0; m < active; ++m) internal.push_back(account_id('A', first + m));

    std::vector<TransactionRecord> group_records;
    for (std::int64_t m = 0; m < active; ++m) {
      const double u = std::max(unit(rng), 1e-12);
      const auto count = std::min<std::int64_t>(
          config.max_transactions, static_cast<std::int64_t>(std::floor(config.count_x_min * std::pow(u, -1.0 / config.count_shape))));
      for (std::int64_t i = 0; i < count; ++i) {
        const bool in = inflow(rng);
        const auto counterparty = account_id('X', g * shape.external_accounts + slot(rng));
        const double value = std::max(1.0, std::round(amount(rng) * 100.0) / 100.0);
        // Keep timestamps on whole seconds strictly inside the horizon.
        const auto offset = static_cast<std::int64_t>(std::floor(unit(rng) * horizon_seconds));
        TransactionRecord r;
        r.source_id = in ? counterparty : internal[static_cast<std::size_t>(m)];
        r.dest_id = in ? internal[static_cast<std::size_t>(m)] : counterparty;
        r.amount = value;
        r.timestamp = config.origin + std::min(offset, static_cast<std::int64_t>(window * shape.windows) - 1);
        group_records.push_back(std::move(r));
      }
    }

    AmlSample sample;
    sample.tensor = tensorize(group_records, internal, window, config.origin, shape);
    sample.label = Label::Legitimate;
    sample.active_accounts = active;
    auto a = sample.tensor.amounts;
    auto in = a.select(0, 0).sum({-1, -2}).narrow(0, 0, active);
    auto out = a.select(0, 1).sum({-1, -2}).narrow(0, 0, active);
    auto total = in + out;
    data.stats.max_account_total_flow = std::max(data.stats.max_account_total_flow, total.max().item<double>());
    flow_sum += total.sum().item<double>();
    throughput_sum += torch::sqrt(in * out).sum().item<double>();
    data.stats.transactions += static_cast<std::int64_t>(group_records.size());
    data.records.insert(data.records.end(), group_records.begin(), group_records.end());
    data.samples.push_back(std::move(sample));
  }
  data.stats.mean_account_total_flow = flow_sum / static_cast<double>(config.accounts);
  data.stats.mean_account_throughput = throughput_sum / static_cast<double>(config.accounts);
  return data;
}

}  // namespace objgan::aml
