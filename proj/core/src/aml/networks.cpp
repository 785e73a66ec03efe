#include "objgan/aml/networks.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <stdexcept>

namespace objgan::aml {

namespace nn = torch::nn;

namespace {

nn::LeakyReLU leaky() { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); }

nn::ConvTranspose1d upsample(std::int64_t channels) {
  return nn::ConvTranspose1d(nn::ConvTranspose1dOptions(channels, channels, 4).stride(2).padding(1));
}

std::int64_t upsampling_steps(const GeneratorConfig& c) {
  if (c.base_length < 1) throw std::invalid_argument("generator base_length must be >= 1");
  std::int64_t length = c.base_length;
  std::int64_t steps = 0;
  while (length < c.shape.windows) {
    length *= 2;
    ++steps;
  }
  if (length != c.shape.windows || steps < 1) {
    throw std::invalid_argument("generator: windows must equal base_length * 2^k with k >= 1");
  }
  return steps;
}

}  // namespace

AmlGeneratorImpl::AmlGeneratorImpl(GeneratorConfig config)
    : config_(std::move(config)), rng_(at::make_generator<at::CPUGeneratorImpl>(config_.seed)) {
  const auto steps = upsampling_steps(config_);
  const auto& s = config_.shape;
  const auto sequences = 2 * s.internal_accounts * s.external_accounts;
  if (!(config_.initial_probability > 0.0 && config_.initial_probability < 1.0)) {
    throw std::invalid_argument("generator initial_probability must lie in (0, 1)");
  }

  dense_ = nn::Sequential();
  std::int64_t width = config_.noise_dim;
  for (auto h : config_.hidden) {
    dense_->push_back(nn::Linear(width, h));
    dense_->push_back(leaky());
    width = h;
  }
  dense_->push_back(nn::Linear(width, sequences * config_.channels * config_.base_length));
  dense_->push_back(leaky());

  shared_ = nn::Sequential();
  for (std::int64_t i = 0; i + 1 < steps; ++i) {
    shared_->push_back(upsample(config_.channels));
    shared_->push_back(leaky());
  }

  auto head = [this](bool probability) {
    nn::Sequential seq;
    seq->push_back(upsample(config_.channels));
    seq->push_back(leaky());
    nn::Conv1d out(nn::Conv1dOptions(config_.channels, 1, 1));
    if (probability) {
      torch::NoGradGuard no_grad;
      const double p = config_.initial_probability;
      out->bias.fill_(std::log(p / (1.0 - p)));
    }
    seq->push_back(out);
    return seq;
  };
  amounts_head_ = head(false);
  probability_head_ = head(true);

  register_module("dense", dense_);
  register_module("shared", shared_);
  register_module("amounts_head", amounts_head_);
  register_module("probability_head", probability_head_);
}

FlowBranches AmlGeneratorImpl::forward_branches(const torch::Tensor& noise) {
  if (noise.dim() != 2 || noise.size(1) != config_.noise_dim) {
    throw std::invalid_argument("AML generator: noise must be (batch, " + std::to_string(config_.noise_dim) + ")");
  }
  const auto b = noise.size(0);
  const auto& s = config_.shape;
  auto h = dense_->forward(noise).view({b * 2 * s.internal_accounts * s.external_accounts, config_.channels,
                                        config_.base_length});
  if (!shared_->is_empty()) h = shared_->forward(h);
  const auto out_shape = s.batch_sizes(b);
  auto amounts = torch::softplus(amounts_head_->forward(h)).view(out_shape) * config_.amount_scale;
  auto probabilities = torch::sigmoid(probability_head_->forward(h)).view(out_shape);
  return {amounts, probabilities};
}

GeneratedFlows AmlGeneratorImpl::sample(const torch::Tensor& noise) {
  return apply_mask(forward_branches(noise), rng_, config_.sampling, config_.relaxed_temperature);
}

torch::Tensor AmlGeneratorImpl::forward(const torch::Tensor& noise) {
  auto flows = sample(noise);
  return pack_flows(flows.amounts, flows.counts);
}

GeneratedFlows apply_mask(const FlowBranches& branches, torch::Generator& gen, MaskSampling sampling,
                          double relaxed_temperature) {
  const auto& p = branches.probabilities;
  torch::Tensor mask;
  if (sampling == MaskSampling::StraightThrough) {
    torch::Tensor hard;
    {
      torch::NoGradGuard no_grad;
      hard = (torch::rand(p.sizes(), gen, p.options().requires_grad(false)) < p.detach()).to(p.scalar_type());
    }
    // Forward value is exactly the hard draw; backward is the identity onto p.
    mask = hard + (p - p.detach());
  } else {
    auto u = torch::rand(p.sizes(), gen, p.options().requires_grad(false)).clamp(1e-6, 1.0 - 1e-6);
    auto pc = p.clamp(1e-6, 1.0 - 1e-6);
    auto logits = (torch::log(pc) - torch::log1p(-pc) + torch::log(u) - torch::log1p(-u)) / relaxed_temperature;
    mask = torch::sigmoid(logits);
  }
  return {branches.amounts * mask, mask};
}

torch::Tensor pack_flows(const torch::Tensor& amounts, const torch::Tensor& counts) {
  return torch::stack({amounts, counts.to(amounts.scalar_type())}, 1);
}

torch::Tensor pack_flows(const torch::Tensor& amounts) { return pack_flows(amounts, (amounts > 0)); }

torch::Tensor packed_amounts(const torch::Tensor& packed) { return packed.select(1, 0); }
torch::Tensor packed_counts(const torch::Tensor& packed) { return packed.select(1, 1); }

AmlDiscriminatorImpl::AmlDiscriminatorImpl(DiscriminatorConfig config) : config_(std::move(config)) {
  auto convs = [this] {
    nn::Sequential seq;
    const auto opts = [this](std::int64_t in, std::int64_t out) {
      return nn::Conv1dOptions(in, out, config_.kernel).stride(config_.stride).padding(config_.padding);
    };
    seq->push_back(nn::Conv1d(opts(1, config_.channels)));
    seq->push_back(leaky());
    seq->push_back(nn::Conv1d(opts(config_.channels, config_.channels)));
    seq->push_back(leaky());
    seq->push_back(nn::Conv1d(opts(config_.channels, config_.out_channels)));
    seq->push_back(leaky());
    return seq;
  };
  amount_convs_ = convs();
  count_convs_ = convs();

  std::int64_t length = config_.shape.windows;
  for (int i = 0; i < 3 && length > 0; ++i) {
    const auto padded = length + 2 * config_.padding;
    length = padded < config_.kernel ? 0 : (padded - config_.kernel) / config_.stride + 1;
  }
  if (length < 1) throw std::invalid_argument("AML discriminator: too few windows for the convolution stack");

  head_ = nn::Sequential();
  std::int64_t width = 2 * 2 * config_.out_channels * length;
  for (auto h : config_.hidden) {
    head_->push_back(nn::Linear(width, h));
    head_->push_back(leaky());
    width = h;
  }
  head_->push_back(nn::Linear(width, 1));

  register_module("amount_convs", amount_convs_);
  register_module("count_convs", count_convs_);
  register_module("head", head_);
}

torch::Tensor AmlDiscriminatorImpl::branch(nn::Sequential& convs, const torch::Tensor& x) {
  const auto& s = config_.shape;
  const auto b = x.size(0);
  auto h = convs->forward(x.reshape({b * 2 * s.internal_accounts * s.external_accounts, 1, s.windows}));
  h = h.reshape({b, 2, s.internal_accounts * s.external_accounts, -1});
  // Sorting first makes the account-axis mean independent of account order.
  auto pooled = std::get<0>(h.sort(2)).mean(2);
  return pooled.flatten(1);
}

torch::Tensor AmlDiscriminatorImpl::forward(const torch::Tensor& amounts, const torch::Tensor& counts) {
  const auto expected = config_.shape.batch_sizes(amounts.size(0));
  if (amounts.sizes() != c10::IntArrayRef(expected) || counts.sizes() != amounts.sizes()) {
    throw std::invalid_argument("AML discriminator: inputs must be (B, 2, M, E, T) with matching shapes");
  }
  auto a = amounts.clamp_min(0) / config_.amount_scale;
  if (config_.log_amounts) a = torch::log1p(a);
  auto features = torch::cat({branch(amount_convs_, a), branch(count_convs_, counts)}, 1);
  return head_->forward(features).squeeze(-1);
}

torch::Tensor AmlDiscriminatorImpl::forward_packed(const torch::Tensor& packed) {
  return forward(packed_amounts(packed), packed_counts(packed));
}

torch::Tensor discriminate(AmlDiscriminator& model, const torch::Tensor& amounts, const torch::Tensor& counts) {
  auto expected = (amounts > 0);
  auto binary = (counts == 0) | (counts == 1);
  if (!binary.all().item<bool>() || !torch::equal(counts != 0, expected)) {
    throw std::invalid_argument("discriminate: counts are inconsistent with amounts");
  }
  return model->forward(amounts.to(torch::kFloat32), counts.to(torch::kFloat32));
}

}  // namespace objgan::aml
