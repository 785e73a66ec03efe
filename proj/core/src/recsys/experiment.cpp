#include "objgan/recsys/experiment.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "objgan/detection_metrics.hpp"

namespace objgan::recsys {

void RecsysExperimentConfig::sync(std::int64_t items) {
  generator.items = items;
  discriminator.items = items;
  train.batch_size = static_cast<int>(generator.group_size);
}

RecsysExperimentConfig RecsysExperimentConfig::desk_scale() {
  RecsysExperimentConfig c;
  c.train.learning_rate = 1e-4;
  c.train.epochs = 10;
  c.train.generator_steps_per_epoch = 20;
  return c;
}

InjectionObjective::InjectionObjective(const torch::Tensor& ratings, std::int64_t target_item, std::int64_t group_size,
                                       std::int64_t users_per_call, std::uint64_t seed, bool unnormalized)
    : target_(target_item),
      group_size_(group_size),
      users_per_call_(users_per_call),
      unnormalized_(unnormalized),
      rng_(at::make_generator<at::CPUGeneratorImpl>(seed)) {
  if (target_item < 0 || target_item >= ratings.size(1)) throw std::invalid_argument("injection objective: bad target");
  if (group_size < 1) throw std::invalid_argument("injection objective: group size must be positive");
  torch::NoGradGuard no_grad;
  auto r = ratings.to(torch::kFloat32);
  normalized_ = normalize_rows(r);
  auto s = torch::matmul(normalized_, normalized_.t());
  s.fill_diagonal_(0);
  real_numerator_ = torch::matmul(s, r);
  real_denominator_ = torch::matmul(s.abs(), (r > 0).to(torch::kFloat32));
}

torch::Tensor InjectionObjective::group_loss(const torch::Tensor& users, const torch::Tensor& ratings,
                                             const torch::Tensor& mask) const {
  auto rn = users.defined() ? normalized_.index_select(0, users) : normalized_;
  auto num = users.defined() ? real_numerator_.index_select(0, users) : real_numerator_;
  auto den = users.defined() ? real_denominator_.index_select(0, users) : real_denominator_;
  // Smooth norm keeps gradients finite for empty profiles.
  auto g = ratings / torch::sqrt(ratings.pow(2).sum(1, true) + 1e-12);
  auto s = torch::matmul(rn, g.t());
  torch::Tensor predicted = num + torch::matmul(s, ratings);
  if (!unnormalized_) predicted = predicted / (den + torch::matmul(s.abs(), mask) + kPredictionEpsilon);
  auto loss = injection_objective(predicted, target_);
  const double scale = static_cast<double>(normalized_.size(0)) / static_cast<double>(rn.size(0));
  return loss * scale;
}

torch::Tensor InjectionObjective::operator()(const torch::Tensor& packed) {
  auto ratings = packed_ratings(packed);
  auto mask = packed_mask(packed);
  const auto nu = normalized_.size(0);
  torch::Tensor users;
  if (users_per_call_ > 0 && users_per_call_ < nu) {
    users = torch::randperm(nu, rng_, torch::kLong).narrow(0, 0, users_per_call_);
  }
  std::vector<torch::Tensor> losses;
  for (std::int64_t start = 0; start < ratings.size(0); start += group_size_) {
    const auto len = std::min(group_size_, ratings.size(0) - start);
    losses.push_back(group_loss(users, ratings.narrow(0, start, len), mask.narrow(0, start, len)));
  }
  return torch::stack(losses).mean();
}

torch::Tensor InjectionObjective::exact(const torch::Tensor& ratings, const torch::Tensor& mask) const {
  return group_loss(torch::Tensor(), ratings, mask);
}

RecsysRun train_recsys(const RecsysExperimentConfig& input, const RatingsMatrix& ratings,
                       const std::function<void(const MetricRecord&)>& on_epoch) {
  auto config = input;
  config.sync(ratings.items());
  config.recommender.validate(ratings.items());
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw std::invalid_argument("recsys alpha must lie in [0, 1]");
  config.generator.seed = config.train.seed ^ 0x5A5A5A5AULL;
  torch::manual_seed(config.train.seed);

  RecsysRun run;
  run.generator = ProfileGenerator(config.generator);
  run.discriminator = ProfileDiscriminator(config.discriminator);
  run.target_item = config.recommender.target_item;
  run.alpha = config.alpha;

  auto values = ratings.values.to(torch::kFloat32);
  auto packed = pack_profiles(values);
  const auto n = packed.size(0);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(config.train.seed + 1);
  auto perm = torch::randperm(n, gen, torch::kLong);
  const auto n_holdout = static_cast<std::int64_t>(std::llround(config.holdout_fraction * static_cast<double>(n)));
  RealData data;
  data.holdout = packed.index_select(0, perm.slice(0, 0, n_holdout));
  data.train = packed.index_select(0, perm.slice(0, n_holdout, n));

  auto objective = std::make_shared<InjectionObjective>(values, config.recommender.target_item,
                                                        config.generator.group_size, config.objective_users,
                                                        config.train.seed + 2, config.recommender.unnormalized);
  ComponentBundle bundle;
  auto g = run.generator;
  auto d = run.discriminator;
  bundle.generator = [g](const torch::Tensor& z) mutable { return g->forward(z); };
  bundle.discriminator = [d](const torch::Tensor& x) mutable { return d->forward_packed(x); };
  bundle.malicious_objective = [objective](const torch::Tensor& x) { return (*objective)(x); };
  bundle.generator_parameters = g->parameters();
  bundle.discriminator_parameters = d->parameters();
  bundle.noise_dim = config.generator.noise_dim;
  bundle.samples_per_noise = config.generator.group_size;
  bundle.generator_batch = config.generator.group_size;

  Trainer trainer(std::move(bundle), std::move(data), config.weights(), config.train);
  run.log = trainer.run(on_epoch);
  return run;
}

AttackProfileBatch attack_group(ProfileGenerator& generator, std::uint64_t seed) {
  auto noise = NoiseBatch::from_seed(1, generator->config().noise_dim, seed);
  return generate_profiles(generator, noise.values, seed ^ 0xC0FFEEULL).integerized();
}

torch::Tensor generated_profiles(ProfileGenerator& generator, std::int64_t count, std::uint64_t seed) {
  std::vector<torch::Tensor> parts;
  std::int64_t have = 0;
  for (std::uint64_t s = seed; have < count; ++s) {
    auto group = attack_group(generator, s);
    const auto take = std::min(count - have, group.ratings.size(0));
    parts.push_back(group.ratings.narrow(0, 0, take));
    have += take;
  }
  if (parts.empty()) return torch::zeros({0, generator->config().items});
  return torch::cat(parts, 0);
}

std::int64_t count_overlap(const torch::Tensor& train, const torch::Tensor& test) {
  if (train.size(0) == 0 || test.size(0) == 0) return 0;
  std::int64_t overlap = 0;
  auto a = train.to(torch::kFloat32);
  auto b = test.to(torch::kFloat32);
  // Squared distance via norms; exact zero only for identical integer rows.
  auto d = a.pow(2).sum(1).unsqueeze(0) + b.pow(2).sum(1).unsqueeze(1) - 2 * torch::matmul(b, a.t());
  auto candidates = (d.abs() < 0.5).any(1).nonzero().view({-1});
  for (std::int64_t i = 0; i < candidates.size(0); ++i) {
    auto row = b[candidates[i].item<std::int64_t>()];
    overlap += (a == row).all(1).any().item<bool>();
  }
  return overlap;
}

namespace {

double auc_of(const torch::Tensor& detection_scores, const std::vector<int>& labels) {
  auto s = detection_scores.to(torch::kFloat64).contiguous();
  std::vector<double> v(s.data_ptr<double>(), s.data_ptr<double>() + s.numel());
  return roc_auc(v, labels).value_or(0.5);
}

torch::Tensor critic_detection_scores(ProfileDiscriminator& d, const torch::Tensor& profiles) {
  torch::NoGradGuard no_grad;
  std::vector<torch::Tensor> out;
  for (std::int64_t start = 0; start < profiles.size(0); start += 1024) {
    auto x = profiles.narrow(0, start, std::min<std::int64_t>(1024, profiles.size(0) - start));
    out.push_back(-d->forward(x, (x > 0).to(torch::kFloat32)));
  }
  return torch::cat(out, 0);
}

struct Mixed {
  torch::Tensor profiles;
  std::vector<int> labels;
};

Mixed mix(const torch::Tensor& real, const std::vector<torch::Tensor>& synthetic) {
  Mixed m;
  std::vector<torch::Tensor> parts{real};
  m.labels.assign(static_cast<std::size_t>(real.size(0)), 0);
  for (const auto& s : synthetic) {
    parts.push_back(s);
    m.labels.insert(m.labels.end(), static_cast<std::size_t>(s.size(0)), 1);
  }
  m.profiles = torch::cat(parts, 0);
  return m;
}

}  // namespace

AucReport retrain_and_auc(std::vector<RecsysRun>& generators, const RatingsMatrix& ratings, const SplitPolicy& policy) {
  if (generators.size() < 2) throw std::invalid_argument("retrain_and_auc: at least two generators are required");
  if (!(policy.test_fraction > 0.0 && policy.test_fraction < 1.0)) {
    throw std::invalid_argument("retrain_and_auc: test fraction must lie in (0, 1)");
  }
  auto values = ratings.values.to(torch::kFloat32);
  const auto nu = values.size(0);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(policy.seed);
  auto perm = torch::randperm(nu, gen, torch::kLong);
  const auto n_test = static_cast<std::int64_t>(std::llround(policy.test_fraction * static_cast<double>(nu)));
  auto real_test = values.index_select(0, perm.slice(0, 0, n_test));
  auto real_train = values.index_select(0, perm.slice(0, n_test, nu));

  const auto g = static_cast<std::int64_t>(generators.size());
  auto per_gen = [&](std::int64_t n_real, std::int64_t i) {
    const auto total = static_cast<std::int64_t>(std::llround(policy.synthetic_per_real * static_cast<double>(n_real)));
    return total / g + (i < total % g ? 1 : 0);
  };
  // Disjoint noise seed ranges for the two splits.
  std::vector<torch::Tensor> syn_train, syn_test;
  for (std::int64_t i = 0; i < g; ++i) {
    auto& gi = generators[static_cast<std::size_t>(i)].generator;
    const std::uint64_t base = policy.seed * 1000003ULL + static_cast<std::uint64_t>(i) * 100000ULL;
    syn_test.push_back(generated_profiles(gi, per_gen(n_test, i), base));
    syn_train.push_back(generated_profiles(gi, per_gen(nu - n_test, i), base + 50000ULL));
  }
  if (count_overlap(torch::cat(syn_train, 0), torch::cat(syn_test, 0)) > 0) {
    throw SplitOverlap("retrain_and_auc: synthetic test profiles also appear in the training split");
  }

  auto test = mix(real_test, syn_test);
  AucReport report;
  for (std::int64_t i = 0; i < g; ++i) {
    auto& d = generators[static_cast<std::size_t>(i)].discriminator;
    report.per_generator_auc.push_back(auc_of(critic_detection_scores(d, test.profiles), test.labels));
    auto own = mix(real_test, {syn_test[static_cast<std::size_t>(i)]});
    report.self_auc.push_back(auc_of(critic_detection_scores(d, own.profiles), own.labels));
  }

  auto train = mix(real_train, syn_train);
  torch::manual_seed(policy.seed);
  ProfileDiscriminatorConfig dc;
  dc.items = values.size(1);
  ProfileDiscriminator detector(dc);
  torch::optim::Adam opt(detector->parameters(), torch::optim::AdamOptions(policy.detector_learning_rate));
  auto labels = torch::tensor(train.labels, torch::kFloat32);
  const auto n = train.profiles.size(0);
  for (int epoch = 0; epoch < policy.detector_epochs; ++epoch) {
    auto order = torch::randperm(n, gen, torch::kLong);
    for (std::int64_t start = 0; start < n; start += policy.detector_batch) {
      auto idx = order.slice(0, start, std::min(n, start + policy.detector_batch));
      auto x = train.profiles.index_select(0, idx);
      auto logits = detector->forward(x, (x > 0).to(torch::kFloat32));
      // Critic convention: higher = real, so the synthetic label is the negative class.
      auto loss = torch::binary_cross_entropy_with_logits(-logits, labels.index_select(0, idx));
      opt.zero_grad();
      loss.backward();
      opt.step();
    }
  }
  report.mixed_retrained_auc = auc_of(critic_detection_scores(detector, test.profiles), test.labels);
  return report;
}

}  // namespace objgan::recsys
