#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <torch/torch.h>

namespace objgan::recsys {

/// Dense user x item ratings in {0 (unrated), 1, ..., 5}.
struct RatingsMatrix {
  torch::Tensor values;                // float32 (Nu, Ni)
  std::vector<std::int64_t> user_ids;  // row -> original user id
  std::vector<std::int64_t> item_ids;  // column -> original movie id

  std::int64_t users() const { return values.size(0); }
  std::int64_t items() const { return values.size(1); }
  /// Throws unless entries are in {0..5} and every row has a rating.
  void validate() const;
  torch::Tensor rated() const { return (values > 0).to(torch::kFloat32); }
};

/// Parses "UserID::MovieID::Rating::Timestamp" lines. Users and movies are
/// remapped to dense indices in ascending id order.
RatingsMatrix read_movielens(std::istream& in);
RatingsMatrix load_movielens(const std::filesystem::path& path);

/// Writes rated entries in the same line format, row-major, with `timestamp`
/// on every line. Row u is written with user id `first_user_id + u` when
/// first_user_id > 0, else with the stored user ids.
void write_movielens(std::ostream& out, const torch::Tensor& ratings, const std::vector<std::int64_t>& item_ids,
                     const std::vector<std::int64_t>& user_ids, std::int64_t timestamp = 0);

/// "column,movie_id" per line with a header.
void write_item_mapping(std::ostream& out, const RatingsMatrix& r);
std::vector<std::int64_t> read_item_mapping(std::istream& in);

/// MovieLens-1M-shaped synthetic ratings used when the real file is absent.
/// Item popularity follows a Zipf law, users rate min_ratings + LogNormal
/// extra items chosen by popularity and a low-rank taste model, and rating
/// values come from item quality + user bias + taste + noise, rounded and
/// clamped to 1..5. Every item receives at least one rating.
struct SyntheticRatingsConfig {
  std::int64_t users = 6040;
  std::int64_t items = 3706;
  std::int64_t factors = 8;
  std::int64_t min_ratings = 20;
  double extra_ratings_median = 90.0;
  double extra_ratings_sigma = 1.0;
  std::int64_t max_ratings = 2000;
  double zipf_exponent = 1.2;
  double zipf_offset = 10.0;
  double taste_weight = 1.0;
  double quality_mean = 3.55;
  double quality_sd = 0.6;
  double user_bias_sd = 0.35;
  double taste_rating_weight = 0.35;
  double noise_sd = 0.95;
};

RatingsMatrix synth_ratings(const SyntheticRatingsConfig& config, std::uint64_t seed);

/// Per-item rating counts and means (mean 0 for unrated items).
struct ItemStats {
  std::vector<std::int64_t> counts;
  std::vector<double> means;
};
ItemStats item_stats(const RatingsMatrix& r);

/// Mid-popularity target: an item whose rating count lies within +/-5% of
/// the median rank, chosen by seed.
std::int64_t choose_target_item(const RatingsMatrix& r, std::uint64_t seed);

}  // namespace objgan::recsys
