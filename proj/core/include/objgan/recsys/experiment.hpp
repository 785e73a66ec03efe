#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "objgan/core_gan.hpp"
#include "objgan/recsys/networks.hpp"
#include "objgan/recsys/ratings.hpp"
#include "objgan/recsys/recommender.hpp"

namespace objgan::recsys {

struct RecsysExperimentConfig {
  ProfileGeneratorConfig generator;
  ProfileDiscriminatorConfig discriminator;
  RecommenderConfig recommender;
  double alpha = 0.5;  // beta = 1 - alpha, gamma = 0
  TrainConfig train;
  // Real users sampled per objective evaluation; 0 uses every user.
  std::int64_t objective_users = 512;
  double holdout_fraction = 0.1;

  LossWeights weights() const { return {alpha, 1.0 - alpha, 0.0}; }
  /// Copies the item count into the network configs and sets the critic batch
  /// to the group size.
  void sync(std::int64_t items);
  /// Schedule that trains in minutes on one CPU core.
  static RecsysExperimentConfig desk_scale();
};

/// Differentiable training-mode injection objective for packed profiles.
/// Real-to-real numerator and denominator terms are computed once; each call
/// subsamples real users and rescales to the full population. Profiles are
/// split into groups of group_size and the loss is averaged over groups.
class InjectionObjective {
 public:
  InjectionObjective(const torch::Tensor& ratings, std::int64_t target_item, std::int64_t group_size,
                     std::int64_t users_per_call, std::uint64_t seed, bool unnormalized = false);

  torch::Tensor operator()(const torch::Tensor& packed);
  /// Full-population value for one group of profiles, no subsampling.
  torch::Tensor exact(const torch::Tensor& ratings, const torch::Tensor& mask) const;

 private:
  torch::Tensor group_loss(const torch::Tensor& users, const torch::Tensor& ratings, const torch::Tensor& mask) const;

  torch::Tensor normalized_;
  torch::Tensor real_numerator_;
  torch::Tensor real_denominator_;
  std::int64_t target_;
  std::int64_t group_size_;
  std::int64_t users_per_call_;
  bool unnormalized_;
  torch::Generator rng_;
};

struct RecsysRun {
  ProfileGenerator generator{nullptr};
  ProfileDiscriminator discriminator{nullptr};
  std::vector<MetricRecord> log;
  std::int64_t target_item = 0;
  double alpha = 0.0;
};

RecsysRun train_recsys(const RecsysExperimentConfig& config, const RatingsMatrix& ratings,
                       const std::function<void(const MetricRecord&)>& on_epoch = {});

/// One integerized group from noise drawn with `seed`.
AttackProfileBatch attack_group(ProfileGenerator& generator, std::uint64_t seed);
/// `count` integerized profiles from consecutive groups seeded seed, seed+1, ...
torch::Tensor generated_profiles(ProfileGenerator& generator, std::int64_t count, std::uint64_t seed);

struct SplitPolicy {
  double test_fraction = 0.2;
  double synthetic_per_real = 1.0;
  std::uint64_t seed = 0;
  int detector_epochs = 10;
  double detector_learning_rate = 1e-3;
  std::int64_t detector_batch = 128;
};

struct AucReport {
  std::vector<double> per_generator_auc;  // GAN-phase critic on the mixed test set
  std::vector<double> self_auc;           // GAN-phase critic on its own generator's output only
  double mixed_retrained_auc = 0.0;
};

/// Raised when a synthetic test profile also appears in the training split.
class SplitOverlap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rows of `test` that also occur in `train` (exact match).
std::int64_t count_overlap(const torch::Tensor& train, const torch::Tensor& test);

AucReport retrain_and_auc(std::vector<RecsysRun>& generators, const RatingsMatrix& ratings, const SplitPolicy& policy);

}  // namespace objgan::recsys
