#include "objgan/core_gan.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "objgan/detection_metrics.hpp"

namespace objgan {

namespace {

void require_finite(const char* term, double value) {
  if (!std::isfinite(value)) throw NonFiniteLoss(term, value);
}

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::vector<double> to_vector(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kFloat64).contiguous().view({-1});
  return {c.data_ptr<double>(), c.data_ptr<double>() + c.numel()};
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {alpha, beta, gamma}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("loss weights must be finite and nonnegative");
    }
  }
  if (alpha == 0.0 && beta == 0.0 && gamma == 0.0) {
    throw std::invalid_argument("at least one loss weight must be positive");
  }
}

NonFiniteLoss::NonFiniteLoss(std::string term, double value)
    : std::domain_error("non-finite " + term + " term: " + std::to_string(value)),
      term_(std::move(term)) {}

double combined_generator_loss(double obj, double gan, double alert, const LossWeights& w) {
  require_finite("objective", obj);
  require_finite("gan", gan);
  require_finite("alert", alert);
  return w.alpha * obj + w.beta * gan + w.gamma * alert;
}

torch::Tensor combined_generator_loss(const torch::Tensor& obj, const torch::Tensor& gan,
                                      const torch::Tensor& alert, const LossWeights& w) {
  torch::Tensor total;
  auto add = [&total](const char* name, const torch::Tensor& term, double weight) {
    if (weight == 0.0) return;
    if (!term.defined()) {
      throw std::invalid_argument(std::string("missing ") + name + " term for nonzero weight");
    }
    require_finite(name, term.item<double>());
    auto weighted = term * weight;
    total = total.defined() ? total + weighted : weighted;
  };
  add("objective", obj, w.alpha);
  add("gan", gan, w.beta);
  add("alert", alert, w.gamma);
  if (!total.defined()) throw std::invalid_argument("all loss weights are zero");
  return total;
}

double critic_loss(std::span<const double> real_scores, std::span<const double> fake_scores,
                   double penalty, double coeff) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw std::invalid_argument("critic_loss: score vectors must be non-empty");
  }
  return mean_of(fake_scores) - mean_of(real_scores) + coeff * penalty;
}

torch::Tensor critic_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                          const torch::Tensor& penalty, double coeff) {
  if (real_scores.numel() == 0 || fake_scores.numel() == 0) {
    throw std::invalid_argument("critic_loss: score vectors must be non-empty");
  }
  auto loss = fake_scores.mean() - real_scores.mean();
  if (coeff != 0.0 && penalty.defined()) loss = loss + coeff * penalty;
  return loss;
}

torch::Tensor generator_gan_loss(const torch::Tensor& fake_scores) { return -fake_scores.mean(); }

torch::Tensor gradient_penalty(const torch::Tensor& real_batch, const torch::Tensor& fake_batch,
                               const SampleFn& discriminator, torch::Generator& gen) {
  if (real_batch.sizes() != fake_batch.sizes()) {
    throw std::invalid_argument("gradient_penalty: real and fake batches differ in shape");
  }
  const auto n = real_batch.size(0);
  std::vector<std::int64_t> eps_shape(static_cast<std::size_t>(real_batch.dim()), 1);
  eps_shape[0] = n;
  auto eps = torch::rand(eps_shape, gen, real_batch.options().requires_grad(false));
  auto mixed = (eps * real_batch.detach() + (1 - eps) * fake_batch.detach()).requires_grad_(true);
  auto scores = discriminator(mixed);
  if (!scores.requires_grad()) return torch::ones({}, real_batch.options());  // constant critic: zero gradient
  auto grads = torch::autograd::grad({scores.sum()}, {mixed}, /*grad_outputs=*/{},
                                     /*retain_graph=*/true, /*create_graph=*/true,
                                     /*allow_unused=*/true);
  auto grad = grads[0].defined() ? grads[0] : torch::zeros_like(mixed);
  auto norms = grad.reshape({n, -1}).norm(2, 1);
  return (norms - 1).pow(2).mean();
}

NoiseBatch NoiseBatch::from_seed(std::int64_t batch_size, std::int64_t dim, std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  auto batch = draw(batch_size, dim, gen);
  batch.seed = seed;
  return batch;
}

NoiseBatch NoiseBatch::draw(std::int64_t batch_size, std::int64_t dim, torch::Generator& gen) {
  if (batch_size <= 0 || dim <= 0) throw std::invalid_argument("noise batch dimensions must be positive");
  NoiseBatch batch;
  batch.values = torch::randn({batch_size, dim}, gen, torch::kFloat32);
  batch.seed = gen.current_seed();
  return batch;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (critic_steps_per_generator_step < 1) throw std::invalid_argument("critic_steps_per_generator_step must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (gradient_penalty_coefficient < 0.0) throw std::invalid_argument("gradient_penalty_coefficient must be >= 0");
  if (generator_steps_per_epoch < 0) throw std::invalid_argument("generator_steps_per_epoch must be >= 0");
}

std::string to_log_line(const MetricRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["loss_obj"] = r.loss_obj;
  j["loss_gan"] = r.loss_gan;
  j["loss_alert"] = r.loss_alert;
  j["loss_total"] = r.loss_total;
  j["disc_accuracy"] = r.disc_accuracy;
  j["disc_auc"] = r.disc_auc;
  j["obj_eval"] = r.obj_eval;
  return j.dump();
}

MetricRecord parse_log_line(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  MetricRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.loss_obj = j.at("loss_obj").get<double>();
  r.loss_gan = j.at("loss_gan").get<double>();
  r.loss_alert = j.at("loss_alert").get<double>();
  r.loss_total = j.at("loss_total").get<double>();
  r.disc_accuracy = j.at("disc_accuracy").get<double>();
  r.disc_auc = j.at("disc_auc").get<double>();
  r.obj_eval = j.value("obj_eval", 0.0);
  return r;
}

TrainingDiverged::TrainingDiverged(int epoch, std::string term)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": non-finite " + term),
      epoch_(epoch),
      term_(std::move(term)) {}

namespace {

torch::optim::Adam make_adam(const std::vector<torch::Tensor>& params, const TrainConfig& c) {
  return torch::optim::Adam(
      params, torch::optim::AdamOptions(c.learning_rate).betas(std::make_tuple(c.adam_beta1, c.adam_beta2)));
}

}  // namespace

Trainer::Trainer(ComponentBundle bundle, RealData data, LossWeights weights, TrainConfig config)
    : bundle_(std::move(bundle)),
      data_(std::move(data)),
      weights_(weights),
      config_(config),
      rng_(at::make_generator<at::CPUGeneratorImpl>(config.seed)),
      generator_optimizer_(make_adam(bundle_.generator_parameters, config)),
      critic_optimizer_(make_adam(bundle_.discriminator_parameters, config)) {
  weights_.validate();
  config_.validate();
  if (!bundle_.generator || !bundle_.discriminator || !bundle_.malicious_objective) {
    throw std::invalid_argument("component bundle is missing a required function");
  }
  if (weights_.uses_alert() && !bundle_.alert_system) {
    throw std::invalid_argument("gamma > 0 requires an alert system");
  }
  if (bundle_.noise_dim <= 0) throw std::invalid_argument("bundle noise_dim must be positive");
  if (bundle_.samples_per_noise <= 0) throw std::invalid_argument("bundle samples_per_noise must be positive");
  if (!data_.train.defined() || data_.train.size(0) < config_.batch_size) {
    throw std::invalid_argument("training data must hold at least one full batch");
  }
}

int Trainer::generator_steps_per_epoch() const {
  if (config_.generator_steps_per_epoch > 0) return config_.generator_steps_per_epoch;
  const auto per_cycle = static_cast<std::int64_t>(config_.batch_size) * config_.critic_steps_per_generator_step;
  return static_cast<int>(std::max<std::int64_t>(1, data_.train.size(0) / per_cycle));
}

torch::Tensor Trainer::real_batch() {
  const auto n = data_.train.size(0);
  if (!order_.defined() || cursor_ + config_.batch_size > n) {
    order_ = torch::randperm(n, rng_, torch::kLong);
    cursor_ = 0;
  }
  auto idx = order_.slice(0, cursor_, cursor_ + config_.batch_size);
  cursor_ += config_.batch_size;
  return data_.train.index_select(0, idx);
}

torch::Tensor Trainer::generate(std::int64_t n, torch::Generator& gen) {
  const auto per = bundle_.samples_per_noise;
  auto noise = NoiseBatch::draw((n + per - 1) / per, bundle_.noise_dim, gen);
  auto out = bundle_.generator(noise.values);
  return out.size(0) == n ? out : out.narrow(0, 0, n);
}

torch::Tensor Trainer::discriminate_generated(const torch::Tensor& fake) {
  if (bundle_.discriminator_view) return bundle_.discriminator((*bundle_.discriminator_view)(fake));
  return bundle_.discriminator(fake);
}

void Trainer::check_finite(const char* term, double value) const {
  if (!std::isfinite(value)) throw TrainingDiverged(epoch_, term);
}

double Trainer::critic_step() {
  auto real = real_batch();
  torch::Tensor fake;
  {
    torch::NoGradGuard no_grad;
    fake = generate(config_.batch_size, rng_);
    if (bundle_.discriminator_view) fake = (*bundle_.discriminator_view)(fake);
  }
  auto real_scores = bundle_.discriminator(real);
  auto fake_scores = bundle_.discriminator(fake);
  torch::Tensor penalty;
  if (config_.gradient_penalty_coefficient > 0.0) {
    penalty = gradient_penalty(real, fake, bundle_.discriminator, rng_);
  }
  auto loss = critic_loss(real_scores, fake_scores, penalty, config_.gradient_penalty_coefficient);
  const double value = loss.item<double>();
  check_finite("critic", value);
  critic_optimizer_.zero_grad();
  loss.backward();
  critic_optimizer_.step();
  return value;
}

GeneratorStepLosses Trainer::generator_step() {
  const auto n = bundle_.generator_batch > 0 ? bundle_.generator_batch : config_.batch_size;
  auto fake = generate(n, rng_);
  auto gan = generator_gan_loss(discriminate_generated(fake));

  torch::Tensor obj;
  if (weights_.alpha > 0.0) {
    obj = bundle_.malicious_objective(fake);
  } else {
    torch::NoGradGuard no_grad;
    obj = bundle_.malicious_objective(fake.detach());
  }

  torch::Tensor alert;
  if (weights_.uses_alert()) {
    alert = (*bundle_.alert_system)(fake);
  } else if (bundle_.alert_system) {
    torch::NoGradGuard no_grad;
    alert = (*bundle_.alert_system)(fake.detach());
  }

  GeneratorStepLosses losses;
  losses.obj = obj.item<double>();
  losses.gan = gan.item<double>();
  losses.alert = alert.defined() ? alert.item<double>() : 0.0;
  check_finite("objective", losses.obj);
  check_finite("gan", losses.gan);
  check_finite("alert", losses.alert);

  auto total = combined_generator_loss(obj, gan, alert, weights_);
  losses.total = total.item<double>();
  check_finite("total", losses.total);

  generator_optimizer_.zero_grad();
  critic_optimizer_.zero_grad();
  total.backward();
  generator_optimizer_.step();
  return losses;
}

GeneratorStepLosses Trainer::cycle() {
  for (int i = 0; i < config_.critic_steps_per_generator_step; ++i) critic_step();
  return generator_step();
}

MetricRecord Trainer::run_epoch() {
  ++epoch_;
  const int steps = generator_steps_per_epoch();
  GeneratorStepLosses sum;
  for (int s = 0; s < steps; ++s) {
    auto l = cycle();
    sum.obj += l.obj;
    sum.gan += l.gan;
    sum.alert += l.alert;
    sum.total += l.total;
  }
  auto record = evaluate(epoch_);
  record.loss_obj = sum.obj / steps;
  record.loss_gan = sum.gan / steps;
  record.loss_alert = sum.alert / steps;
  record.loss_total = sum.total / steps;
  return record;
}

std::vector<MetricRecord> Trainer::run(const std::function<void(const MetricRecord&)>& on_epoch) {
  std::vector<MetricRecord> log;
  log.reserve(static_cast<std::size_t>(config_.epochs));
  for (int e = 0; e < config_.epochs; ++e) {
    log.push_back(run_epoch());
    if (on_epoch) on_epoch(log.back());
  }
  return log;
}

MetricRecord Trainer::evaluate(int epoch) {
  torch::NoGradGuard no_grad;
  MetricRecord record;
  record.epoch = epoch;
  if (!data_.holdout.defined() || data_.holdout.size(0) == 0) return record;

  // Separate stream so evaluation never shifts the training trajectory.
  auto eval_rng = at::make_generator<at::CPUGeneratorImpl>(config_.seed ^ (0x9E3779B97F4A7C15ULL * (epoch + 1)));
  const auto n = data_.holdout.size(0);
  // The objective sees whole noise groups; detection uses the first n samples.
  const auto per = bundle_.samples_per_noise;
  auto grouped = generate((n + per - 1) / per * per, eval_rng);
  record.obj_eval = bundle_.malicious_objective(grouped).item<double>();
  auto fake = grouped.narrow(0, 0, n);

  // Detection score: higher means more likely generated.
  auto real_scores = to_vector(-bundle_.discriminator(data_.holdout));
  auto fake_scores = to_vector(-discriminate_generated(fake));
  std::vector<double> scores = real_scores;
  scores.insert(scores.end(), fake_scores.begin(), fake_scores.end());
  std::vector<int> labels(real_scores.size(), 0);
  labels.resize(scores.size(), 1);
  const double threshold = 0.5 * (mean_of(real_scores) + mean_of(fake_scores));
  auto metrics = evaluate_discriminator(scores, labels, threshold);
  record.disc_accuracy = metrics.accuracy;
  record.disc_auc = metrics.auc.value_or(0.5);
  return record;
}

}  // namespace objgan
