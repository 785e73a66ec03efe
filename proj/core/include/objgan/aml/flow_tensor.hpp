#pragma once

// Tripartite transaction tensors. A sample covers M internal accounts and E
// external counterparty slots over T time windows; entry (d, m, e, t) holds the
// cumulative amount moved in direction d (0 = inflow external -> internal,
// 1 = outflow internal -> external) during window t.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace objgan::aml {

inline constexpr int kInflow = 0;
inline constexpr int kOutflow = 1;

struct FlowShape {
  std::int64_t internal_accounts = 5;   // M
  std::int64_t external_accounts = 10;  // E
  std::int64_t windows = 64;            // T

  std::vector<std::int64_t> sample_sizes() const { return {2, internal_accounts, external_accounts, windows}; }
  std::vector<std::int64_t> batch_sizes(std::int64_t batch) const {
    return {batch, 2, internal_accounts, external_accounts, windows};
  }
  std::int64_t numel() const { return 2 * internal_accounts * external_accounts * windows; }
  bool operator==(const FlowShape&) const = default;
};

struct TransactionRecord {
  std::string source_id;
  std::string dest_id;
  double amount = 0.0;        // currency units, > 0
  std::int64_t timestamp = 0;  // seconds since the Unix epoch (UTC)
};

struct FlowTensor {
  torch::Tensor amounts;  // float64, (2, M, E, T), nonnegative
  double window_seconds = 86400.0;
  std::vector<std::string> internal_ids;  // index m -> account id
  std::vector<std::string> external_ids;  // index e -> counterparty id (first appearance order)

  FlowShape shape() const;
  /// indicator(amounts > 0)
  torch::Tensor counts() const;
  /// Sum of all entries in integer cents; exact.
  std::int64_t total_cents() const;
};

/// Sums records into windows of `window_seconds` starting at `origin`.
/// Amounts are accumulated as integer cents so the tensor total matches the
/// record total exactly. Throws std::invalid_argument when a record touches
/// zero or two internal accounts, falls outside the horizon, or when more than
/// E distinct external counterparties appear.
FlowTensor tensorize(const std::vector<TransactionRecord>& records, const std::vector<std::string>& internal_ids,
                     double window_seconds, std::int64_t origin, const FlowShape& shape);

std::int64_t to_cents(double amount);

/// Comma-separated transactions with header source_id,dest_id,amount,timestamp.
/// Timestamps are ISO-8601 UTC ("2023-01-31T12:00:00Z"; the trailing Z is optional).
std::vector<TransactionRecord> read_transactions_csv(std::istream& in);
void write_transactions_csv(std::ostream& out, const std::vector<TransactionRecord>& records);
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t seconds);

/// Binary dataset container (little-endian):
///   "FLOWTNSR" | u32 version=1 | u32 directions=2 | u32 M | u32 E | u32 T |
///   f64 window_seconds | u64 count | count * (2*M*E*T) float32 amounts, row-major.
struct FlowDataset {
  FlowShape shape;
  double window_seconds = 86400.0;
  torch::Tensor amounts;  // float32, (count, 2, M, E, T)
};

void write_flow_dataset(const std::filesystem::path& path, const FlowDataset& dataset);
FlowDataset read_flow_dataset(const std::filesystem::path& path);

}  // namespace objgan::aml
