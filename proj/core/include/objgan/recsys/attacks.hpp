#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <torch/torch.h>

#include "objgan/recsys/networks.hpp"
#include "objgan/recsys/ratings.hpp"
#include "objgan/recsys/recommender.hpp"

namespace objgan::recsys {

inline constexpr std::int64_t kFillerCount = 90;
inline constexpr std::int64_t kMinRatingsForMean = 20;

enum class BaselineKind { TargetOnly = 1, Random = 2, HighestRated = 3, MostRated = 4 };

/// Items with at least kMinRatingsForMean ratings, top tenth by mean rating
/// (ties by lower index).
std::vector<std::int64_t> highest_rated_decile(const ItemStats& stats);
/// Top tenth of all items by rating count (ties by lower index).
std::vector<std::int64_t> most_rated_decile(const ItemStats& stats);

/// Every profile rates the target 5; kinds 2-4 add kFillerCount uniform
/// {1..5} ratings on distinct items from the kind's pool (target excluded).
AttackProfileBatch baseline_attack(BaselineKind kind, std::int64_t n_profiles, std::int64_t target_item,
                                   const ItemStats& stats, std::uint64_t seed);

/// Counts real users whose top-n list contains the target after injecting
/// profiles. Real-to-real similarities and each user's best real neighbors are
/// computed once.
class AttackEvaluator {
 public:
  AttackEvaluator(const RatingsMatrix& ratings, RecommenderConfig config);

  std::int64_t affected_users(const AttackProfileBatch& attack, std::int64_t inject_count) const;
  /// Count without any injection (cached).
  std::int64_t baseline_count() const;
  /// Per-user flag (1 = target in top-n) for the given injection.
  torch::Tensor affected_mask(const torch::Tensor& injected_ratings) const;

  const RecommenderConfig& config() const { return config_; }

 private:
  torch::Tensor ratings_;
  torch::Tensor normalized_;
  torch::Tensor neighbor_values_;   // (Nu, k) sorted descending
  torch::Tensor neighbor_indices_;  // (Nu, k)
  torch::Tensor eligible_;          // users who have not rated the target
  RecommenderConfig config_;
  mutable std::optional<std::int64_t> baseline_;
};

std::int64_t evaluate_attack(const RatingsMatrix& ratings, const AttackProfileBatch& attack,
                             const RecommenderConfig& config, std::int64_t inject_count);

}  // namespace objgan::recsys
