#pragma once

#include <cstdint>

#include <torch/torch.h>

namespace objgan::recsys {

/// neighbor_count 0 means ALL users.
struct RecommenderConfig {
  std::int64_t neighbor_count = 400;
  std::int64_t target_item = 0;
  std::int64_t top_n = 10;
  // Literal D * R product without the rated-only denominator.
  bool unnormalized = false;

  void validate(std::int64_t items) const;
};

inline constexpr double kPredictionEpsilon = 1e-8;

/// Rows scaled to unit L2 norm; all-zero rows stay zero.
torch::Tensor normalize_rows(const torch::Tensor& ratings);

/// Cosine similarity between rating rows with a zero diagonal.
torch::Tensor user_similarity(const torch::Tensor& ratings);
/// Cosine similarity between two row sets (no diagonal handling).
torch::Tensor cross_similarity(const torch::Tensor& a, const torch::Tensor& b);

enum class PredictionMode { Training, Inference };

/// Weighted average of neighbor ratings over the rated-only similarity mass.
/// Training mode uses every user; inference keeps the neighbor_count most
/// similar (ties broken by lower user index).
torch::Tensor predict_ratings(const torch::Tensor& ratings, const RecommenderConfig& cfg,
                              PredictionMode mode = PredictionMode::Inference);
/// Same, from a precomputed similarity matrix (rows = predicted users,
/// columns = rows of `ratings`).
torch::Tensor predict_from_similarity(const torch::Tensor& similarity, const torch::Tensor& ratings,
                                      const RecommenderConfig& cfg, PredictionMode mode);

/// sum_u sum_j max(P(u,j) - P(u,t), 0). A 3-D input (B, U, I) is averaged
/// over the leading noise-batch dimension.
torch::Tensor injection_objective(const torch::Tensor& predicted, std::int64_t target_item);

/// Top-n item indices per row among items where `candidates` is nonzero,
/// ordered by score descending then index ascending.
torch::Tensor top_n_items(const torch::Tensor& scores, const torch::Tensor& candidates, std::int64_t n);

}  // namespace objgan::recsys
