#pragma once

// Use-case agnostic training engine: the three-term generator loss, the
// Wasserstein critic with gradient penalty, and the alternating optimizer loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace objgan {

/// Mixture weights of the generator loss: alpha * objective + beta * gan + gamma * alert.
struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;

  /// Throws std::invalid_argument if any weight is negative/non-finite or all are zero.
  void validate() const;
  bool uses_alert() const { return gamma > 0.0; }
};

/// Raised when an input to the loss composition is not finite.
class NonFiniteLoss : public std::domain_error {
 public:
  NonFiniteLoss(std::string term, double value);
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

double combined_generator_loss(double obj, double gan, double alert, const LossWeights& w);

/// Tensor form used during training. Terms with zero weight are left out of
/// the graph entirely, so an undefined tensor is accepted for them.
torch::Tensor combined_generator_loss(const torch::Tensor& obj, const torch::Tensor& gan,
                                      const torch::Tensor& alert, const LossWeights& w);

/// mean(fake) - mean(real) + coeff * penalty.
double critic_loss(std::span<const double> real_scores, std::span<const double> fake_scores,
                   double penalty, double coeff);
torch::Tensor critic_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                          const torch::Tensor& penalty, double coeff);

/// Generator side of the Wasserstein loss (before beta weighting).
torch::Tensor generator_gan_loss(const torch::Tensor& fake_scores);

using SampleFn = std::function<torch::Tensor(const torch::Tensor&)>;

/// Mean over random interpolates x of (||grad_x D(x)||_2 - 1)^2. The
/// interpolation coefficients are drawn per sample from `gen`.
torch::Tensor gradient_penalty(const torch::Tensor& real_batch, const torch::Tensor& fake_batch,
                               const SampleFn& discriminator, torch::Generator& gen);

struct NoiseBatch {
  torch::Tensor values;  // batch_size x dim, standard normal
  std::uint64_t seed = 0;

  static NoiseBatch from_seed(std::int64_t batch_size, std::int64_t dim, std::uint64_t seed);
  static NoiseBatch draw(std::int64_t batch_size, std::int64_t dim, torch::Generator& gen);

  std::int64_t batch_size() const { return values.size(0); }
  std::int64_t dim() const { return values.size(1); }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int critic_steps_per_generator_step = 5;
  int epochs = 10;
  int batch_size = 64;
  double gradient_penalty_coefficient = 10.0;
  std::uint64_t seed = 0;
  // 0 derives the count from the training split: n_train / (batch * critic_steps).
  int generator_steps_per_epoch = 0;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;

  void validate() const;
};

/// The pluggable pieces of a use case. Samples travel between the pieces as a
/// single packed tensor whose first dimension is the batch.
struct ComponentBundle {
  SampleFn generator;            // noise -> packed samples
  SampleFn discriminator;        // packed samples -> (batch) scores, higher = more real
  SampleFn malicious_objective;  // packed samples -> scalar loss
  std::optional<SampleFn> alert_system;  // packed samples -> scalar penalty
  std::vector<torch::Tensor> generator_parameters;
  std::vector<torch::Tensor> discriminator_parameters;
  std::int64_t noise_dim = 0;
  // Generator samples drawn per update. 0 uses TrainConfig::batch_size.
  std::int64_t generator_batch = 0;
  // Samples the generator emits per noise row; requests are rounded up to
  // whole noise rows and trimmed.
  std::int64_t samples_per_noise = 1;
  // Optional view applied to generated samples before the discriminator sees them.
  std::optional<SampleFn> discriminator_view;
};

struct RealData {
  torch::Tensor train;    // packed real samples used for critic updates
  torch::Tensor holdout;  // packed real samples used for epoch-end evaluation
};

struct MetricRecord {
  int epoch = 0;
  double loss_obj = 0.0;
  double loss_gan = 0.0;
  double loss_alert = 0.0;
  double loss_total = 0.0;
  double disc_accuracy = 0.0;
  double disc_auc = 0.0;
  double obj_eval = 0.0;  // malicious objective on fresh noise
};

/// One line of the metric log. Field order is fixed.
std::string to_log_line(const MetricRecord& record);
MetricRecord parse_log_line(const std::string& line);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::string term);
  int epoch() const { return epoch_; }
  const std::string& term() const { return term_; }

 private:
  int epoch_;
  std::string term_;
};

struct GeneratorStepLosses {
  double obj = 0.0;
  double gan = 0.0;
  double alert = 0.0;
  double total = 0.0;
};

class Trainer {
 public:
  Trainer(ComponentBundle bundle, RealData data, LossWeights weights, TrainConfig config);

  /// One critic update on a fresh real batch and a detached generated batch.
  double critic_step();
  /// One generator update minimizing the combined loss.
  GeneratorStepLosses generator_step();
  /// critic_steps_per_generator_step critic updates followed by one generator update.
  GeneratorStepLosses cycle();

  MetricRecord run_epoch();
  std::vector<MetricRecord> run(const std::function<void(const MetricRecord&)>& on_epoch = {});

  int generator_steps_per_epoch() const;
  const ComponentBundle& bundle() const { return bundle_; }
  torch::Generator& rng() { return rng_; }

 private:
  torch::Tensor real_batch();
  torch::Tensor generate(std::int64_t n, torch::Generator& gen);
  torch::Tensor discriminate_generated(const torch::Tensor& fake);
  MetricRecord evaluate(int epoch);
  void check_finite(const char* term, double value) const;

  ComponentBundle bundle_;
  RealData data_;
  LossWeights weights_;
  TrainConfig config_;
  torch::Generator rng_;
  torch::optim::Adam generator_optimizer_;
  torch::optim::Adam critic_optimizer_;
  torch::Tensor order_;
  std::int64_t cursor_ = 0;
  int epoch_ = 0;
};

}  // namespace objgan
