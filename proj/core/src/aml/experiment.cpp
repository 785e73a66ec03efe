#include "objgan/aml/experiment.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "objgan/aml/objective.hpp"

namespace objgan::aml {

void AmlExperimentConfig::sync_shapes() {
  generator.shape = data.shape;
  discriminator.shape = data.shape;
  discriminator.amount_scale = generator.amount_scale;
}

AmlExperimentConfig AmlExperimentConfig::desk_scale() {
  AmlExperimentConfig c;
  c.generator.base_length = 8;
  c.generator.channels = 8;
  c.generator.initial_probability = 0.01;
  c.train.batch_size = 32;
  c.weights = {1.0, 1e2, 1e3};
  c.train.learning_rate = 2e-4;
  c.train.epochs = 9;
  c.train.generator_steps_per_epoch = 15;
  return c;
}

ComponentBundle make_aml_bundle(AmlGenerator generator, AmlDiscriminator discriminator, const RuleConfig& rules) {
  ComponentBundle bundle;
  bundle.generator = [generator](const torch::Tensor& z) mutable { return generator->forward(z); };
  bundle.discriminator = [discriminator](const torch::Tensor& x) mutable { return discriminator->forward_packed(x); };
  bundle.malicious_objective = [](const torch::Tensor& x) { return mule_objective(packed_amounts(x)); };
  // Expected number of soft alerts per sample.
  bundle.alert_system = [rules](const torch::Tensor& x) {
    return rules_soft_alerts(packed_amounts(x), rules, packed_counts(x)).sum({1, 2}).mean();
  };
  bundle.generator_parameters = generator->parameters();
  bundle.discriminator_parameters = discriminator->parameters();
  bundle.noise_dim = generator->config().noise_dim;
  return bundle;
}

AmlRun train_aml(const AmlExperimentConfig& input, const torch::Tensor& legit_amounts,
                 const std::function<void(const MetricRecord&)>& on_epoch) {
  auto config = input;
  config.sync_shapes();
  config.generator.seed = config.train.seed ^ 0xA5A5A5A5ULL;
  torch::manual_seed(config.train.seed);

  AmlRun run;
  run.generator = AmlGenerator(config.generator);
  run.discriminator = AmlDiscriminator(config.discriminator);

  auto packed = pack_flows(legit_amounts.to(torch::kFloat32));
  const auto n = packed.size(0);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(config.train.seed + 1);
  auto perm = torch::randperm(n, gen, torch::kLong);
  const auto n_holdout = static_cast<std::int64_t>(std::llround(config.holdout_fraction * static_cast<double>(n)));
  RealData data;
  data.holdout = packed.index_select(0, perm.slice(0, 0, n_holdout));
  data.train = packed.index_select(0, perm.slice(0, n_holdout, n));

  Trainer trainer(make_aml_bundle(run.generator, run.discriminator, config.rules), data, config.weights, config.train);
  run.log = trainer.run(on_epoch);
  return run;
}

torch::Tensor sample_flows(AmlGenerator& generator, std::int64_t n, std::uint64_t seed) {
  torch::NoGradGuard no_grad;
  auto noise = NoiseBatch::from_seed(n, generator->config().noise_dim, seed);
  auto rng = at::make_generator<at::CPUGeneratorImpl>(seed ^ 0x5DEECE66DULL);
  auto branches = generator->forward_branches(noise.values);
  auto flows = apply_mask(branches, rng, MaskSampling::StraightThrough);
  return flows.amounts;
}

}  // namespace objgan::aml
