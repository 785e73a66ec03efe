#include <doctest.h>

#include <ATen/CPUGeneratorImpl.h>

#include <sstream>

#include "objgan/aml/rules.hpp"
#include "rule_oracle.hpp"

using namespace objgan::aml;
using objgan::testing::rule_oracle;

namespace {

torch::Tensor zeros_sample(std::int64_t M = 2, std::int64_t E = 3, std::int64_t T = 20) {
  return torch::zeros({2, M, E, T}, torch::kFloat64);
}

void check_against_oracle(const torch::Tensor& sample, const RuleConfig& c) {
  auto alerts = rules_engine(sample, c);
  auto expected = rule_oracle(sample, c);
  for (std::size_t m = 0; m < expected.size(); ++m) {
    for (int r = 0; r < kRuleCount; ++r) {
      CHECK(alerts[static_cast<std::int64_t>(m)][r].item<bool>() == expected[m][static_cast<std::size_t>(r)]);
    }
  }
}

}  // namespace

TEST_SUITE("aml_rules") {
  TEST_CASE("all-zero tensor raises nothing") {
    auto a = rules_engine(zeros_sample(), RuleConfig{});
    CHECK(a.sizes() == std::vector<std::int64_t>{2, 5});
    CHECK_FALSE(a.any().item<bool>());
  }

  TEST_CASE("rapid movement fires R3") {
    RuleConfig c;
    auto x = zeros_sample();
    x[0][0][0][10] = 2 * c.theta3;
    x[1][0][1][10] = 2 * c.theta3;
    auto a = rules_engine(x, c);
    CHECK(a[0][2].item<bool>());
    CHECK_FALSE(a[1].any().item<bool>());
    check_against_oracle(x, c);
  }

  TEST_CASE("steady small flows stay quiet") {
    RuleConfig c;
    auto x = zeros_sample();
    for (int t = 0; t < 20; t += 3) {
      x[0][0][0][t] = 50.0;
      x[1][0][1][t] = 45.0;
    }
    CHECK_FALSE(rules_engine(x, c).any().item<bool>());
    check_against_oracle(x, c);
  }

  TEST_CASE("each rule fires on its own trigger") {
    RuleConfig c;
    {
      auto x = zeros_sample();
      x[0][0][0][3] = c.theta1 + 1;
      auto a = rules_engine(x, c);
      CHECK(a[0][0].item<bool>());
      CHECK_FALSE(a[0][1].item<bool>());
    }
    {
      auto x = zeros_sample();
      x[1][1][2][5] = c.theta2 + 1;
      CHECK(rules_engine(x, c)[1][1].item<bool>());
    }
    {
      auto x = zeros_sample();
      for (int t = 0; t < 16; ++t) x[0][0][0][t] = 100.0;
      x[0][0][0][16] = c.theta4 * 1.2;
      auto a = rules_engine(x, c);
      CHECK(a[0][3].item<bool>() == rule_oracle(x, c)[0][3]);
      check_against_oracle(x, c);
    }
    {
      auto x = zeros_sample(1, 3, 20);
      for (int t = 0; t < 6; ++t) {
        x[0][0][0][t] = 1.0;
        x[1][0][1][t] = 1.0;
      }
      CHECK(rules_engine(x, c)[0][4].item<bool>());
    }
  }

  TEST_CASE("batched and single forms agree") {
    auto g = at::make_generator<at::CPUGeneratorImpl>(4);
    auto x = torch::rand({3, 2, 2, 3, 20}, g, torch::kFloat64) * 900 * (torch::rand({3, 2, 2, 3, 20}, g, torch::kFloat64) > 0.7);
    RuleConfig c;
    auto batch = rules_engine(x, c);
    for (int b = 0; b < 3; ++b) CHECK(torch::equal(batch[b], rules_engine(x[b], c)));
    CHECK(torch::equal(sample_alerted(x, c), batch.flatten(1).any(1)));
    CHECK_THROWS_AS(rules_engine(torch::zeros({2, 3}), c), std::invalid_argument);
  }

  TEST_CASE("engine agrees with the oracle on random tensors") {
    auto g = at::make_generator<at::CPUGeneratorImpl>(8);
    RuleConfig c;
    c.w1 = 3;
    c.w2 = 5;
    c.w3 = 2;
    c.w4 = 4;
    c.w5 = 6;
    for (int i = 0; i < 60; ++i) {
      auto mask = torch::rand({2, 2, 3, 12}, g, torch::kFloat64) > 0.6;
      auto x = torch::rand({2, 2, 3, 12}, g, torch::kFloat64) * 1500 * mask;
      check_against_oracle(x, c);
    }
  }

  TEST_CASE("spans longer than the horizon are clamped") {
    RuleConfig c;
    c.w1 = 50;
    auto x = zeros_sample(1, 1, 8);
    x[0][0][0][7] = c.theta1 + 1;
    CHECK(rules_engine(x, c)[0][0].item<bool>());
    check_against_oracle(x, c);
  }

  TEST_CASE("proxy saturates at high temperature") {
    RuleConfig c;
    auto quiet = zeros_sample();
    quiet[0][0][0][0] = 1.0;
    CHECK(rules_proxy(quiet.unsqueeze(0), c, std::nullopt, 1e4).item<double>() < 1e-6);
    auto loud = zeros_sample();
    loud[0][0][0][0] = 10 * c.theta1;
    auto soft = rules_soft_alerts(loud.unsqueeze(0), c, std::nullopt, 1e4);
    CHECK(soft[0][0][0].item<double>() > 1 - 1e-6);
  }

  TEST_CASE("proxy is differentiable through amounts and counts") {
    RuleConfig c;
    auto x = (torch::rand({2, 2, 2, 3, 20}, torch::kFloat64) * 500).requires_grad_(true);
    auto counts = (x.detach() > 0).to(torch::kFloat64).requires_grad_(true);
    rules_proxy(x, c, counts).backward();
    CHECK(x.grad().defined());
    CHECK(counts.grad().defined());
    CHECK(torch::isfinite(x.grad()).all().item<bool>());
  }

  TEST_CASE("rule config json round trip") {
    RuleConfig c;
    c.theta3 = 123.5;
    c.w5 = 9;
    std::stringstream ss;
    write_rule_config(ss, c);
    auto back = read_rule_config(ss);
    CHECK(back.theta3 == 123.5);
    CHECK(back.w5 == 9);
    std::stringstream unknown(R"({"theta9": 1})");
    CHECK_THROWS_AS(read_rule_config(unknown), std::invalid_argument);
    std::stringstream negative(R"({"theta1": -1})");
    CHECK_THROWS_AS(read_rule_config(negative), std::invalid_argument);
  }
}
