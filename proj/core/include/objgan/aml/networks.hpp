#pragma once

// Generator and critic for flow tensors.
//
// Generator: dense trunk -> per-(direction, m, e) transposed 1-D convolutions
// over time, split into an amounts branch (softplus, scaled) and a probability
// branch (sigmoid). A Bernoulli mask drawn from the probabilities sparsifies the
// amounts; gradients cross the draw with a straight-through estimator.
//
// Critic: per-sequence strided 1-D convolutions over time on scaled amounts
// and on counts, pooled over the internal and external account axes, then a
// dense head. The pooling sorts before averaging, so the score is bitwise
// invariant to permutations of either account axis.

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "objgan/aml/flow_tensor.hpp"

namespace objgan::aml {

enum class MaskSampling { StraightThrough, Relaxed };

struct GeneratorConfig {
  FlowShape shape;
  std::int64_t noise_dim = 100;
  std::vector<std::int64_t> hidden{400, 1600};
  std::int64_t channels = 10;
  std::int64_t base_length = 4;  // windows = base_length * 2^k, k >= 1
  double amount_scale = 100.0;
  double initial_probability = 0.02;
  MaskSampling sampling = MaskSampling::StraightThrough;
  double relaxed_temperature = 0.5;
  std::uint64_t seed = 0;
};

struct GeneratedFlows {
  torch::Tensor amounts;  // (B, 2, M, E, T), zero where the mask is zero
  torch::Tensor counts;   // (B, 2, M, E, T), the sampled mask
};

struct FlowBranches {
  torch::Tensor amounts;        // dense, nonnegative
  torch::Tensor probabilities;  // in [0, 1]
};

class AmlGeneratorImpl : public torch::nn::Module {
 public:
  explicit AmlGeneratorImpl(GeneratorConfig config);

  FlowBranches forward_branches(const torch::Tensor& noise);
  GeneratedFlows sample(const torch::Tensor& noise);
  /// Packed (B, 2, 2, M, E, T): index 0 on dim 1 holds amounts, index 1 counts.
  torch::Tensor forward(const torch::Tensor& noise);

  const GeneratorConfig& config() const { return config_; }
  torch::Generator& rng() { return rng_; }

 private:
  GeneratorConfig config_;
  torch::nn::Sequential dense_{nullptr};
  torch::nn::Sequential shared_{nullptr};
  torch::nn::Sequential amounts_head_{nullptr};
  torch::nn::Sequential probability_head_{nullptr};
  torch::Generator rng_;
};
TORCH_MODULE(AmlGenerator);

/// Straight-through Bernoulli mask (or relaxed mask) applied to the amounts.
GeneratedFlows apply_mask(const FlowBranches& branches, torch::Generator& gen,
                          MaskSampling sampling = MaskSampling::StraightThrough, double relaxed_temperature = 0.5);

torch::Tensor pack_flows(const torch::Tensor& amounts, const torch::Tensor& counts);
torch::Tensor pack_flows(const torch::Tensor& amounts);  // counts = indicator(amounts > 0)
torch::Tensor packed_amounts(const torch::Tensor& packed);
torch::Tensor packed_counts(const torch::Tensor& packed);

struct DiscriminatorConfig {
  FlowShape shape;
  std::int64_t channels = 10;
  std::int64_t out_channels = 5;
  std::int64_t kernel = 6;
  std::int64_t stride = 4;
  std::int64_t padding = 1;
  std::vector<std::int64_t> hidden{128, 32};
  double amount_scale = 100.0;
  // Amounts enter as log1p(a / scale) when set, else as a / scale.
  bool log_amounts = false;
};

class AmlDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit AmlDiscriminatorImpl(DiscriminatorConfig config);

  /// Scores without validating counts (used on interpolates during training).
  torch::Tensor forward(const torch::Tensor& amounts, const torch::Tensor& counts);
  torch::Tensor forward_packed(const torch::Tensor& packed);

  const DiscriminatorConfig& config() const { return config_; }

 private:
  torch::Tensor branch(torch::nn::Sequential& convs, const torch::Tensor& x);

  DiscriminatorConfig config_;
  torch::nn::Sequential amount_convs_{nullptr};
  torch::nn::Sequential count_convs_{nullptr};
  torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(AmlDiscriminator);

/// Scores per sample after checking counts == indicator(amounts > 0).
torch::Tensor discriminate(AmlDiscriminator& model, const torch::Tensor& amounts, const torch::Tensor& counts);

}  // namespace objgan::aml
