#include "objgan/recsys/attacks.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace objgan::recsys {

namespace {

std::vector<std::int64_t> top_tenth(std::vector<std::int64_t> items, std::size_t total,
                                    const std::vector<double>& key) {
  std::stable_sort(items.begin(), items.end(),
                   [&](auto a, auto b) { return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)]; });
  items.resize(std::min(items.size(), (total + 9) / 10));
  std::sort(items.begin(), items.end());
  return items;
}

}  // namespace

std::vector<std::int64_t> highest_rated_decile(const ItemStats& stats) {
  std::vector<std::int64_t> eligible;
  for (std::size_t j = 0; j < stats.counts.size(); ++j) {
    if (stats.counts[j] >= kMinRatingsForMean) eligible.push_back(static_cast<std::int64_t>(j));
  }
  const auto total = eligible.size();
  return top_tenth(std::move(eligible), total, stats.means);
}

std::vector<std::int64_t> most_rated_decile(const ItemStats& stats) {
  std::vector<std::int64_t> all(stats.counts.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> key(stats.counts.begin(), stats.counts.end());
  return top_tenth(std::move(all), stats.counts.size(), key);
}

AttackProfileBatch baseline_attack(BaselineKind kind, std::int64_t n_profiles, std::int64_t target_item,
                                   const ItemStats& stats, std::uint64_t seed) {
  const auto items = static_cast<std::int64_t>(stats.counts.size());
  if (target_item < 0 || target_item >= items) throw std::invalid_argument("baseline_attack: target out of range");
  if (n_profiles < 0) throw std::invalid_argument("baseline_attack: negative profile count");
  std::vector<std::int64_t> pool;
  switch (kind) {
    case BaselineKind::TargetOnly:
      break;
    case BaselineKind::Random:
      pool.resize(static_cast<std::size_t>(items));
      std::iota(pool.begin(), pool.end(), 0);
      break;
    case BaselineKind::HighestRated:
      pool = highest_rated_decile(stats);
      break;
    case BaselineKind::MostRated:
      pool = most_rated_decile(stats);
      break;
    default:
      throw std::invalid_argument("baseline_attack: kind must be 1..4");
  }
  std::erase(pool, target_item);
  if (kind != BaselineKind::TargetOnly && static_cast<std::int64_t>(pool.size()) < kFillerCount) {
    throw std::invalid_argument("baseline_attack: filler pool has only " + std::to_string(pool.size()) + " items");
  }

  AttackProfileBatch out;
  out.ratings = torch::zeros({n_profiles, items}, torch::kFloat32);
  auto acc = out.ratings.accessor<float, 2>();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> value(1, 5);
  for (std::int64_t a = 0; a < n_profiles; ++a) {
    acc[a][target_item] = 5.0f;
    if (kind == BaselineKind::TargetOnly) continue;
    // Partial Fisher-Yates: the first kFillerCount entries are a uniform sample.
    for (std::int64_t f = 0; f < kFillerCount; ++f) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(f), pool.size() - 1);
      std::swap(pool[static_cast<std::size_t>(f)], pool[pick(rng)]);
      acc[a][pool[static_cast<std::size_t>(f)]] = static_cast<float>(value(rng));
    }
  }
  out.mask = (out.ratings > 0).to(torch::kFloat32);
  out.group_size = n_profiles;
  return out;
}

AttackEvaluator::AttackEvaluator(const RatingsMatrix& ratings, RecommenderConfig config)
    : ratings_(ratings.values.to(torch::kFloat32).contiguous()), config_(config) {
  config_.validate(ratings_.size(1));
  torch::NoGradGuard no_grad;
  normalized_ = normalize_rows(ratings_);
  auto s = torch::matmul(normalized_, normalized_.t());
  s.fill_diagonal_(0);
  const auto nu = s.size(0);
  const auto k = config_.neighbor_count == 0 ? nu : std::min(config_.neighbor_count, nu);
  auto [values, indices] = torch::sort(s, /*stable=*/true, /*dim=*/1, /*descending=*/true);
  neighbor_values_ = values.narrow(1, 0, k).contiguous();
  neighbor_indices_ = indices.narrow(1, 0, k).contiguous();
  eligible_ = ratings_.select(1, config_.target_item) == 0;
}

torch::Tensor AttackEvaluator::affected_mask(const torch::Tensor& injected_ratings) const {
  torch::NoGradGuard no_grad;
  const auto nu = ratings_.size(0);
  const auto ni = ratings_.size(1);
  auto injected = injected_ratings.to(torch::kFloat32).reshape({-1, ni});
  const auto na = injected.size(0);

  // Merge each user's cached real neighbors with the injected candidates; a
  // stable sort keeps real users (lower index) ahead on ties.
  auto values = neighbor_values_;
  auto indices = neighbor_indices_;
  if (na > 0) {
    auto cross = torch::matmul(normalized_, normalize_rows(injected).t());
    auto inj_idx = (torch::arange(na, torch::kLong) + nu).unsqueeze(0).expand({nu, na});
    values = torch::cat({values, cross}, 1);
    indices = torch::cat({indices, inj_idx}, 1);
    const auto k = config_.neighbor_count == 0 ? values.size(1) : std::min(config_.neighbor_count, values.size(1));
    auto order = std::get<1>(torch::sort(values, /*stable=*/true, /*dim=*/1, /*descending=*/true)).narrow(1, 0, k);
    values = values.gather(1, order);
    indices = indices.gather(1, order);
  }

  auto weights = torch::zeros({nu, nu + na}, torch::kFloat32);
  weights.scatter_(1, indices, values);
  auto all = na > 0 ? torch::cat({ratings_, injected}, 0) : ratings_;
  auto numerator = torch::matmul(weights, all);
  torch::Tensor predicted;
  if (config_.unnormalized) {
    predicted = numerator;
  } else {
    auto denominator = torch::matmul(weights.abs(), (all > 0).to(torch::kFloat32));
    predicted = numerator / (denominator + kPredictionEpsilon);
  }

  // Rank of the target among unrated items under (score desc, index asc).
  const auto t = config_.target_item;
  auto unrated = ratings_ == 0;
  auto pt = predicted.select(1, t).unsqueeze(1);
  auto lower_index = (torch::arange(ni, torch::kLong) < t).unsqueeze(0);
  auto ahead = unrated & ((predicted > pt) | ((predicted == pt) & lower_index));
  auto rank = ahead.sum(1);
  return eligible_ & (rank < config_.top_n);
}

std::int64_t AttackEvaluator::affected_users(const AttackProfileBatch& attack, std::int64_t inject_count) const {
  if (inject_count < 0 || inject_count > attack.ratings.size(0)) {
    throw std::invalid_argument("evaluate_attack: inject_count exceeds the attack group size");
  }
  if (inject_count == 0) return baseline_count();
  auto profiles = attack.integerized().head(inject_count);
  return affected_mask(profiles.ratings).sum().item<std::int64_t>();
}

std::int64_t AttackEvaluator::baseline_count() const {
  if (!baseline_) baseline_ = affected_mask(torch::zeros({0, ratings_.size(1)})).sum().item<std::int64_t>();
  return *baseline_;
}

std::int64_t evaluate_attack(const RatingsMatrix& ratings, const AttackProfileBatch& attack,
                             const RecommenderConfig& config, std::int64_t inject_count) {
  return AttackEvaluator(ratings, config).affected_users(attack, inject_count);
}

}  // namespace objgan::recsys
