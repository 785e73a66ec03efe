#include <doctest.h>

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <limits>
#include <vector>

#include "objgan/core_gan.hpp"

using namespace objgan;

namespace {

torch::Generator seeded(std::uint64_t seed) { return at::make_generator<at::CPUGeneratorImpl>(seed); }

// One-dimensional toy: generator shifts noise by a learned offset, critic is affine.
struct Toy {
  torch::nn::Linear gen{torch::nn::LinearOptions(1, 1)};
  torch::nn::Linear critic{torch::nn::LinearOptions(1, 1)};
  torch::Tensor real;

  explicit Toy(std::uint64_t seed) {
    torch::manual_seed(seed);
    gen = torch::nn::Linear(torch::nn::LinearOptions(1, 1));
    critic = torch::nn::Linear(torch::nn::LinearOptions(1, 1));
    auto g = seeded(seed + 7);
    real = torch::randn({256, 1}, g);
  }

  ComponentBundle bundle() {
    ComponentBundle b;
    auto g = gen;
    auto c = critic;
    b.generator = [g](const torch::Tensor& z) mutable { return g->forward(z); };
    b.discriminator = [c](const torch::Tensor& x) mutable { return c->forward(x).squeeze(1); };
    b.malicious_objective = [](const torch::Tensor& x) { return -x.mean(); };
    b.generator_parameters = gen->parameters();
    b.discriminator_parameters = critic->parameters();
    b.noise_dim = 1;
    return b;
  }
};

TrainConfig small_config(std::uint64_t seed) {
  TrainConfig c;
  c.batch_size = 32;
  c.epochs = 4;
  c.generator_steps_per_epoch = 10;
  c.critic_steps_per_generator_step = 2;
  c.learning_rate = 1e-2;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("core_gan") {
  TEST_CASE("combined loss arithmetic") {
    CHECK(combined_generator_loss(1, 1, 1, {1, 1, 1}) == doctest::Approx(3.0));
    CHECK(combined_generator_loss(5, 2, 9, {1, 0.5, 0}) == doctest::Approx(6.0));
    CHECK(combined_generator_loss(-100, 0.3, 0.7, {1, 1e3, 1e3}) == doctest::Approx(900.0));
  }

  TEST_CASE("combined loss rejects non-finite terms by name") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
      combined_generator_loss(1, nan, 0, {1, 1, 0});
      FAIL("expected NonFiniteLoss");
    } catch (const NonFiniteLoss& e) {
      CHECK(e.term() == "gan");
    }
    CHECK_THROWS_AS(combined_generator_loss(std::numeric_limits<double>::infinity(), 0, 0, {1, 1, 0}),
                    NonFiniteLoss);
  }

  TEST_CASE("tensor loss skips zero-weight terms") {
    auto obj = torch::tensor(2.0);
    auto gan = torch::tensor(3.0);
    auto total = combined_generator_loss(obj, gan, torch::Tensor(), {1, 2, 0});
    CHECK(total.item<double>() == doctest::Approx(8.0));
    CHECK_THROWS_AS(combined_generator_loss(obj, gan, torch::Tensor(), {1, 2, 1}), std::invalid_argument);
  }

  TEST_CASE("loss weights validation") {
    CHECK_THROWS_AS(LossWeights({0, 0, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(LossWeights({-1, 1, 0}).validate(), std::invalid_argument);
    CHECK_NOTHROW(LossWeights({0, 1, 0}).validate());
  }

  TEST_CASE("critic loss examples") {
    std::vector<double> ones{1, 1};
    CHECK(critic_loss(ones, ones, 0, 10) == doctest::Approx(0.0));
    std::vector<double> real{2, 4};
    CHECK(critic_loss(real, ones, 0, 10) == doctest::Approx(-2.0));
    std::vector<double> zero{0};
    CHECK(critic_loss(zero, zero, 3, 10) == doctest::Approx(30.0));
    CHECK_THROWS_AS(critic_loss(std::vector<double>{}, ones, 0, 10), std::invalid_argument);
  }

  TEST_CASE("gradient penalty examples") {
    auto g = seeded(3);
    auto real = torch::randn({16, 4}, g);
    auto fake = torch::randn({16, 4}, g);
    auto u = torch::tensor({0.5, 0.5, 0.5, 0.5}, torch::kFloat32);
    auto unit = [u](const torch::Tensor& x) { return (x * u).sum(1); };
    CHECK(gradient_penalty(real, fake, unit, g).item<double>() == doctest::Approx(0.0).epsilon(1e-10));
    auto flat = [](const torch::Tensor& x) { return torch::zeros({x.size(0)}); };
    CHECK(gradient_penalty(real, fake, flat, g).item<double>() == doctest::Approx(1.0));
    auto steep = [](const torch::Tensor& x) { return 3 * x.select(1, 0); };
    CHECK(gradient_penalty(real, fake, steep, g).item<double>() == doctest::Approx(4.0));
    CHECK_THROWS_AS(gradient_penalty(real, fake.narrow(0, 0, 8), unit, g), std::invalid_argument);
  }

  TEST_CASE("noise batches are reproducible from their seed") {
    auto a = NoiseBatch::from_seed(5, 3, 42);
    auto b = NoiseBatch::from_seed(5, 3, 42);
    CHECK(torch::equal(a.values, b.values));
    CHECK(a.batch_size() == 5);
    CHECK(a.dim() == 3);
    CHECK_FALSE(torch::equal(a.values, NoiseBatch::from_seed(5, 3, 43).values));
  }

  TEST_CASE("metric log line round trip keeps field order") {
    MetricRecord r{3, 0.25, -1.5, 0.125, 2.0, 0.75, 0.875, -7.0};
    auto line = to_log_line(r);
    CHECK(line.find("\"epoch\"") < line.find("\"loss_obj\""));
    CHECK(line.find("\"disc_auc\"") < line.find("\"obj_eval\""));
    auto back = parse_log_line(line);
    CHECK(back.epoch == 3);
    CHECK(back.loss_gan == -1.5);
    CHECK(back.obj_eval == -7.0);
    CHECK(to_log_line(back) == line);
  }

  TEST_CASE("objective-only training raises the generated mean") {
    Toy toy(1);
    Trainer t(toy.bundle(), {toy.real, toy.real}, {1, 0, 0}, small_config(1));
    auto log = t.run();
    REQUIRE(log.size() == 4);
    for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i].obj_eval < log[i - 1].obj_eval);
  }

  TEST_CASE("pure GAN training logs but never optimizes the objective") {
    Toy a(2);
    Toy b(2);
    auto bundle_b = b.bundle();
    bundle_b.malicious_objective = [](const torch::Tensor& x) { return 1e6 * x.pow(3).mean(); };
    Trainer ta(a.bundle(), {a.real, a.real}, {0, 1, 0}, small_config(5));
    Trainer tb(bundle_b, {b.real, b.real}, {0, 1, 0}, small_config(5));
    ta.run();
    tb.run();
    CHECK(torch::equal(a.gen->weight, b.gen->weight));
    CHECK(torch::equal(a.gen->bias, b.gen->bias));
  }

  TEST_CASE("all three loss terms are logged") {
    Toy toy(3);
    auto bundle = toy.bundle();
    bundle.alert_system = [](const torch::Tensor& x) { return torch::sigmoid(x).mean(); };
    auto cfg = small_config(3);
    cfg.epochs = 1;
    Trainer t(bundle, {toy.real, toy.real}, {1, 1e3, 2e3}, cfg);
    auto r = t.run_epoch();
    CHECK(r.loss_obj != 0.0);
    CHECK(r.loss_gan != 0.0);
    CHECK(r.loss_alert > 0.0);
    CHECK(r.loss_total == doctest::Approx(r.loss_obj + 1e3 * r.loss_gan + 2e3 * r.loss_alert));
  }

  TEST_CASE("same seed gives identical metric logs") {
    auto run = [](std::uint64_t seed) {
      Toy toy(4);
      Trainer t(toy.bundle(), {toy.real, toy.real}, {0.5, 1, 0}, small_config(seed));
      std::string out;
      for (const auto& r : t.run()) out += to_log_line(r) + "\n";
      return out;
    };
    CHECK(run(9) == run(9));
    CHECK(run(9) != run(10));
  }

  TEST_CASE("trainer rejects inconsistent bundles") {
    Toy toy(5);
    CHECK_THROWS_AS(Trainer(toy.bundle(), {toy.real, toy.real}, {1, 1, 1}, small_config(0)), std::invalid_argument);
    auto cfg = small_config(0);
    cfg.batch_size = 1000;
    CHECK_THROWS_AS(Trainer(toy.bundle(), {toy.real, toy.real}, {1, 1, 0}, cfg), std::invalid_argument);
    auto bad = toy.bundle();
    bad.noise_dim = 0;
    CHECK_THROWS_AS(Trainer(bad, {toy.real, toy.real}, {1, 1, 0}, small_config(0)), std::invalid_argument);
  }

  TEST_CASE("non-finite objective aborts with the epoch") {
    Toy toy(6);
    auto bundle = toy.bundle();
    bundle.malicious_objective = [](const torch::Tensor& x) { return x.mean() / 0.0; };
    Trainer t(bundle, {toy.real, toy.real}, {1, 1, 0}, small_config(0));
    try {
      t.run_epoch();
      FAIL("expected TrainingDiverged");
    } catch (const TrainingDiverged& e) {
      CHECK(e.epoch() == 1);
      CHECK(e.term() == "objective");
    }
  }

  TEST_CASE("grouped generators are trimmed to the request") {
    Toy toy(7);
    auto bundle = toy.bundle();
    bundle.samples_per_noise = 3;
    bundle.generator = [g = toy.gen](const torch::Tensor& z) mutable { return g->forward(z).repeat_interleave(3, 0); };
    std::vector<std::int64_t> sizes;
    bundle.discriminator = [c = toy.critic, &sizes](const torch::Tensor& x) mutable {
      sizes.push_back(x.size(0));
      return c->forward(x).squeeze(1);
    };
    auto cfg = small_config(0);
    cfg.batch_size = 32;
    Trainer t(bundle, {toy.real, toy.real}, {0, 1, 0}, cfg);
    t.critic_step();
    REQUIRE(sizes.size() >= 2);
    CHECK(sizes[0] == 32);
    CHECK(sizes[1] == 32);
  }
}
