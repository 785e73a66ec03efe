#pragma once

// Profile generator and single-profile critic.
//
// Generator: one noise vector is broadcast against A learned slot embeddings,
// so a single draw yields a coordinated group of A profiles. A residual trunk
// splits into a ratings branch (mapped into [1, 5]) and an inclusion
// probability branch; a straight-through Bernoulli mask selects rated items.
//
// Critic: ratings and mask pass through separate dense branches, are
// concatenated and scored by a residual trunk. Rows never interact.

#include <cstdint>

#include <torch/torch.h>

namespace objgan::recsys {

class ResBlockImpl : public torch::nn::Module {
 public:
  ResBlockImpl(std::int64_t in, std::int64_t out);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Linear first_{nullptr};
  torch::nn::Linear second_{nullptr};
  torch::nn::Linear skip_{nullptr};
};
TORCH_MODULE(ResBlock);

struct AttackProfileBatch {
  torch::Tensor ratings;       // (A, Ni), zero exactly where mask is zero
  torch::Tensor mask;          // (A, Ni) in {0, 1}
  std::int64_t group_size = 0;
  torch::Tensor source_noise;  // (noise_dim) or undefined for baselines

  /// Throws unless ratings are nonzero exactly where mask is 1.
  void validate() const;
  /// Rounded to integers in [1, 5] on the mask.
  AttackProfileBatch integerized() const;
  AttackProfileBatch head(std::int64_t n) const;
};

struct ProfileGeneratorConfig {
  std::int64_t items = 3706;
  std::int64_t noise_dim = 128;
  std::int64_t group_size = 300;
  std::int64_t hidden = 128;
  double initial_probability = 0.045;
  std::uint64_t seed = 0;
};

struct ProfileBranches {
  torch::Tensor ratings;        // (n*A, Ni) in [1, 5]
  torch::Tensor probabilities;  // (n*A, Ni) in [0, 1]
};

class ProfileGeneratorImpl : public torch::nn::Module {
 public:
  explicit ProfileGeneratorImpl(ProfileGeneratorConfig config);

  ProfileBranches forward_branches(const torch::Tensor& noise);
  /// Packed (n*A, 2, Ni): index 0 on dim 1 holds ratings, index 1 the mask.
  torch::Tensor forward(const torch::Tensor& noise);

  const ProfileGeneratorConfig& config() const { return config_; }
  torch::Generator& rng() { return rng_; }

 private:
  ProfileGeneratorConfig config_;
  torch::Tensor slots_;
  torch::nn::Sequential trunk_{nullptr};
  torch::nn::Sequential ratings_head_{nullptr};
  torch::nn::Sequential probability_head_{nullptr};
  torch::Generator rng_;
};
TORCH_MODULE(ProfileGenerator);

/// Bernoulli draw whose forward value is exactly 0/1 and whose gradient is
/// the identity onto p.
torch::Tensor sample_mask(const torch::Tensor& probabilities, torch::Generator& gen);
/// Straight-through Bernoulli masking of the ratings branch.
torch::Tensor sample_profiles(const ProfileBranches& branches, torch::Generator& gen);

/// One group of A profiles from a single noise vector; the mask draw is seeded
/// by `seed`, so the group is a deterministic function of (noise, seed).
AttackProfileBatch generate_profiles(ProfileGenerator& generator, const torch::Tensor& noise, std::uint64_t seed);

torch::Tensor pack_profiles(const torch::Tensor& ratings, const torch::Tensor& mask);
torch::Tensor pack_profiles(const torch::Tensor& ratings);  // mask = ratings > 0
torch::Tensor packed_ratings(const torch::Tensor& packed);
torch::Tensor packed_mask(const torch::Tensor& packed);

struct ProfileDiscriminatorConfig {
  std::int64_t items = 3706;
  std::int64_t branch_width = 64;
  std::int64_t hidden = 128;
};

class ProfileDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit ProfileDiscriminatorImpl(ProfileDiscriminatorConfig config);

  torch::Tensor forward(const torch::Tensor& ratings, const torch::Tensor& mask);
  torch::Tensor forward_packed(const torch::Tensor& packed);
  const ProfileDiscriminatorConfig& config() const { return config_; }

 private:
  ProfileDiscriminatorConfig config_;
  torch::nn::Sequential ratings_branch_{nullptr};
  torch::nn::Sequential mask_branch_{nullptr};
  torch::nn::Sequential trunk_{nullptr};
};
TORCH_MODULE(ProfileDiscriminator);

/// Scores one profile; rejects a mask that disagrees with the ratings.
double discriminate_profile(ProfileDiscriminator& model, const torch::Tensor& ratings, const torch::Tensor& mask);

}  // namespace objgan::recsys
