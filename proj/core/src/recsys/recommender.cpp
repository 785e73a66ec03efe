#include "objgan/recsys/recommender.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace objgan::recsys {

void RecommenderConfig::validate(std::int64_t items) const {
  if (neighbor_count < 0) throw std::invalid_argument("neighbor_count must be positive or 0 for ALL");
  if (top_n < 1) throw std::invalid_argument("top_n must be positive");
  if (target_item < 0 || target_item >= items) {
    throw std::invalid_argument("target item " + std::to_string(target_item) + " out of range");
  }
}

torch::Tensor normalize_rows(const torch::Tensor& ratings) {
  auto norm = ratings.norm(2, {1}, true);
  return torch::where(norm > 0, ratings / norm.clamp_min(1e-30), torch::zeros_like(ratings));
}

torch::Tensor cross_similarity(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.dim() != 2 || b.dim() != 2 || a.size(1) != b.size(1)) {
    throw std::invalid_argument("cross_similarity: row sets must share the item dimension");
  }
  return torch::matmul(normalize_rows(a), normalize_rows(b).t());
}

torch::Tensor user_similarity(const torch::Tensor& ratings) {
  auto s = cross_similarity(ratings, ratings);
  s.fill_diagonal_(0);
  return s;
}

namespace {

/// Keeps the k largest entries per row (stable: lower column wins ties).
torch::Tensor keep_top_k(const torch::Tensor& s, std::int64_t k) {
  if (k == 0 || k >= s.size(1)) return s;
  auto sorted = std::get<1>(torch::sort(s, /*stable=*/true, /*dim=*/1, /*descending=*/true));
  auto idx = sorted.narrow(1, 0, k);
  auto kept = torch::zeros_like(s);
  kept.scatter_(1, idx, s.gather(1, idx));
  return kept;
}

}  // namespace

torch::Tensor predict_from_similarity(const torch::Tensor& similarity, const torch::Tensor& ratings,
                                      const RecommenderConfig& cfg, PredictionMode mode) {
  auto s = mode == PredictionMode::Inference ? keep_top_k(similarity, cfg.neighbor_count) : similarity;
  auto numerator = torch::matmul(s, ratings);
  if (cfg.unnormalized) return numerator;
  auto rated = (ratings > 0).to(ratings.scalar_type());
  auto denominator = torch::matmul(s.abs(), rated);
  return numerator / (denominator + kPredictionEpsilon);
}

torch::Tensor predict_ratings(const torch::Tensor& ratings, const RecommenderConfig& cfg, PredictionMode mode) {
  cfg.validate(ratings.size(1));
  return predict_from_similarity(user_similarity(ratings), ratings, cfg, mode);
}

torch::Tensor injection_objective(const torch::Tensor& predicted, std::int64_t target_item) {
  if (predicted.dim() != 2 && predicted.dim() != 3) throw std::invalid_argument("injection_objective: expected 2-D or 3-D");
  const auto items = predicted.size(-1);
  if (target_item < 0 || target_item >= items) throw std::invalid_argument("injection_objective: target out of range");
  auto target = predicted.select(-1, target_item).unsqueeze(-1);
  auto hinge = torch::relu(predicted - target);
  if (predicted.dim() == 2) return hinge.sum();
  return hinge.sum({1, 2}).mean();
}

torch::Tensor top_n_items(const torch::Tensor& scores, const torch::Tensor& candidates, std::int64_t n) {
  auto masked = torch::where(candidates > 0, scores, torch::full_like(scores, -std::numeric_limits<float>::infinity()));
  auto order = std::get<1>(torch::sort(masked, /*stable=*/true, /*dim=*/1, /*descending=*/true));
  return order.narrow(1, 0, std::min(n, scores.size(1)));
}

}  // namespace objgan::recsys
