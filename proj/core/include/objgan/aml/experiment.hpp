#pragma once

#include <functional>
#include <vector>

#include "objgan/aml/networks.hpp"
#include "objgan/aml/rules.hpp"
#include "objgan/aml/synthetic.hpp"
#include "objgan/core_gan.hpp"

namespace objgan::aml {

struct AmlExperimentConfig {
  SyntheticConfig data;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  RuleConfig rules;
  LossWeights weights{1.0, 1e3, 2e3};
  TrainConfig train;
  double holdout_fraction = 0.1;

  /// Propagates data.shape into the network configs.
  void sync_shapes();
  /// Reduced networks and schedule that train in minutes on one CPU core.
  static AmlExperimentConfig desk_scale();
};

struct AmlRun {
  AmlGenerator generator{nullptr};
  AmlDiscriminator discriminator{nullptr};
  std::vector<MetricRecord> log;
};

/// Wires a generator/critic pair, the mule objective and the soft rules into a
/// component bundle. The alert penalty is the expected number of soft alerts
/// per sample (summed over accounts and rules).
ComponentBundle make_aml_bundle(AmlGenerator generator, AmlDiscriminator discriminator, const RuleConfig& rules);

/// Trains on stacked legitimate amounts (N, 2, M, E, T). Parameter
/// initialization and all sampling derive from config.train.seed.
AmlRun train_aml(const AmlExperimentConfig& config, const torch::Tensor& legit_amounts,
                 const std::function<void(const MetricRecord&)>& on_epoch = {});

/// n generated samples with counts re-derived from the amounts, no gradient.
torch::Tensor sample_flows(AmlGenerator& generator, std::int64_t n, std::uint64_t seed);

}  // namespace objgan::aml
