#include "objgan/recsys/networks.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace objgan::recsys {

namespace {

torch::Tensor act(const torch::Tensor& x) { return torch::leaky_relu(x, 0.2); }

}  // namespace

ResBlockImpl::ResBlockImpl(std::int64_t in, std::int64_t out)
    : first_(register_module("first", torch::nn::Linear(in, out))),
      second_(register_module("second", torch::nn::Linear(out, out))) {
  if (in != out) skip_ = register_module("skip", torch::nn::Linear(torch::nn::LinearOptions(in, out).bias(false)));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  auto y = second_->forward(act(first_->forward(x)));
  return act(y + (skip_ ? skip_->forward(x) : x));
}

void AttackProfileBatch::validate() const {
  if (!ratings.defined() || !mask.defined() || ratings.sizes() != mask.sizes() || ratings.dim() != 2) {
    throw std::invalid_argument("attack profiles: ratings and mask must be matching 2-D tensors");
  }
  auto m = mask.detach();
  if (!((m == 0) | (m == 1)).all().item<bool>()) throw std::invalid_argument("attack profiles: mask must be binary");
  if (!((ratings.detach() != 0) == (m != 0)).all().item<bool>()) {
    throw std::invalid_argument("attack profiles: ratings must be nonzero exactly where mask is 1");
  }
}

AttackProfileBatch AttackProfileBatch::integerized() const {
  AttackProfileBatch out = *this;
  auto m = (mask.detach() > 0).to(torch::kFloat32);
  out.ratings = ratings.detach().round().clamp(1, 5) * m;
  out.mask = m;
  return out;
}

AttackProfileBatch AttackProfileBatch::head(std::int64_t n) const {
  if (n < 0 || n > ratings.size(0)) throw std::invalid_argument("attack profiles: requested more profiles than available");
  AttackProfileBatch out = *this;
  out.ratings = ratings.narrow(0, 0, n);
  out.mask = mask.narrow(0, 0, n);
  return out;
}

ProfileGeneratorImpl::ProfileGeneratorImpl(ProfileGeneratorConfig config)
    : config_(config), rng_(at::make_generator<at::CPUGeneratorImpl>(config.seed)) {
  const auto h = config_.hidden;
  slots_ = register_parameter("slots", torch::randn({config_.group_size, config_.noise_dim}) * 0.5);
  trunk_ = register_module("trunk", torch::nn::Sequential(ResBlock(config_.noise_dim, h), ResBlock(h, h)));
  ratings_head_ = register_module(
      "ratings_head", torch::nn::Sequential(ResBlock(h, h), ResBlock(h, h / 2), torch::nn::Linear(h / 2, config_.items)));
  auto prob_out = torch::nn::Linear(h / 2, config_.items);
  {
    torch::NoGradGuard no_grad;
    const double p = config_.initial_probability;
    prob_out->bias.fill_(std::log(p / (1.0 - p)));
    prob_out->weight.mul_(0.1);
  }
  probability_head_ =
      register_module("probability_head", torch::nn::Sequential(ResBlock(h, h), ResBlock(h, h / 2), prob_out));
}

ProfileBranches ProfileGeneratorImpl::forward_branches(const torch::Tensor& noise) {
  if (noise.dim() != 2 || noise.size(1) != config_.noise_dim) {
    throw std::invalid_argument("profile generator: expected noise of shape (n, " + std::to_string(config_.noise_dim) +
                                ")");
  }
  const auto n = noise.size(0);
  auto h = (noise.unsqueeze(1) + slots_.unsqueeze(0)).reshape({n * config_.group_size, config_.noise_dim});
  h = trunk_->forward(h);
  return {1.0 + 4.0 * torch::sigmoid(ratings_head_->forward(h)), torch::sigmoid(probability_head_->forward(h))};
}

torch::Tensor ProfileGeneratorImpl::forward(const torch::Tensor& noise) {
  auto b = forward_branches(noise);
  auto mask = sample_mask(b.probabilities, rng_);
  return pack_profiles(b.ratings * mask, mask);
}

torch::Tensor sample_mask(const torch::Tensor& p, torch::Generator& gen) {
  torch::Tensor hard;
  {
    torch::NoGradGuard no_grad;
    hard = (torch::rand(p.sizes(), gen, p.options().requires_grad(false)) < p.detach()).to(p.scalar_type());
  }
  return hard + (p - p.detach());
}

torch::Tensor sample_profiles(const ProfileBranches& branches, torch::Generator& gen) {
  return branches.ratings * sample_mask(branches.probabilities, gen);
}

AttackProfileBatch generate_profiles(ProfileGenerator& generator, const torch::Tensor& noise, std::uint64_t seed) {
  const auto& cfg = generator->config();
  if (noise.numel() != cfg.noise_dim) {
    throw std::invalid_argument("generate_profiles: noise must have " + std::to_string(cfg.noise_dim) + " entries");
  }
  torch::NoGradGuard no_grad;
  auto z = noise.reshape({1, cfg.noise_dim}).to(torch::kFloat32);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  auto ratings = sample_profiles(generator->forward_branches(z), gen);
  AttackProfileBatch out;
  out.mask = (ratings > 0).to(torch::kFloat32);
  out.ratings = ratings;
  out.group_size = cfg.group_size;
  out.source_noise = z.reshape({cfg.noise_dim});
  return out;
}

torch::Tensor pack_profiles(const torch::Tensor& ratings, const torch::Tensor& mask) {
  return torch::stack({ratings, mask.to(ratings.scalar_type())}, 1);
}
torch::Tensor pack_profiles(const torch::Tensor& ratings) { return pack_profiles(ratings, ratings > 0); }
torch::Tensor packed_ratings(const torch::Tensor& packed) { return packed.select(1, 0); }
torch::Tensor packed_mask(const torch::Tensor& packed) { return packed.select(1, 1); }

ProfileDiscriminatorImpl::ProfileDiscriminatorImpl(ProfileDiscriminatorConfig config) : config_(config) {
  const auto w = config_.branch_width;
  const auto h = config_.hidden;
  auto branch = [&] {
    return torch::nn::Sequential(torch::nn::Linear(config_.items, w), torch::nn::LeakyReLU(
                                                                          torch::nn::LeakyReLUOptions().negative_slope(0.2)),
                                 ResBlock(w, h), ResBlock(h, w));
  };
  ratings_branch_ = register_module("ratings_branch", branch());
  mask_branch_ = register_module("mask_branch", branch());
  trunk_ = register_module("trunk", torch::nn::Sequential(ResBlock(2 * w, h), ResBlock(h, h), torch::nn::Linear(h, 1)));
}

torch::Tensor ProfileDiscriminatorImpl::forward(const torch::Tensor& ratings, const torch::Tensor& mask) {
  if (ratings.dim() != 2 || ratings.size(1) != config_.items || ratings.sizes() != mask.sizes()) {
    throw std::invalid_argument("profile discriminator: expected (n, " + std::to_string(config_.items) + ") inputs");
  }
  auto a = ratings_branch_->forward(ratings / 5.0);
  auto b = mask_branch_->forward(mask);
  return trunk_->forward(torch::cat({a, b}, 1)).squeeze(1);
}

torch::Tensor ProfileDiscriminatorImpl::forward_packed(const torch::Tensor& packed) {
  return forward(packed_ratings(packed), packed_mask(packed));
}

double discriminate_profile(ProfileDiscriminator& model, const torch::Tensor& ratings, const torch::Tensor& mask) {
  auto r = ratings.reshape({1, -1}).to(torch::kFloat32);
  auto m = mask.reshape({1, -1}).to(torch::kFloat32);
  if (!((r != 0) == (m != 0)).all().item<bool>()) {
    throw std::invalid_argument("discriminate_profile: mask disagrees with ratings");
  }
  torch::NoGradGuard no_grad;
  return model->forward(r, m).item<double>();
}

}  // namespace objgan::recsys
