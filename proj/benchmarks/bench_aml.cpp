#include <benchmark/benchmark.h>

#include <ATen/CPUGeneratorImpl.h>

#include "objgan/aml/experiment.hpp"
#include "objgan/aml/flow_tensor.hpp"
#include "objgan/aml/rules.hpp"
#include "objgan/aml/synthetic.hpp"

using namespace objgan::aml;

namespace {

torch::Tensor random_flows(std::int64_t batch) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(1);
  auto mask = torch::rand({batch, 2, 5, 10, 64}, gen) < 0.05;
  return torch::rand({batch, 2, 5, 10, 64}, gen) * 500 * mask;
}

}  // namespace

static void BM_RulesEngine(benchmark::State& state) {
  auto x = random_flows(state.range(0));
  RuleConfig rules;
  for (auto _ : state) benchmark::DoNotOptimize(rules_engine(x, rules));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RulesEngine)->Arg(32)->Arg(1000);

static void BM_RulesProxyBackward(benchmark::State& state) {
  auto x = random_flows(state.range(0)).requires_grad_();
  RuleConfig rules;
  for (auto _ : state) {
    auto loss = rules_proxy(x, rules);
    loss.backward();
    x.mutable_grad().zero_();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RulesProxyBackward)->Arg(32);

static void BM_Tensorize(benchmark::State& state) {
  SyntheticConfig cfg;
  cfg.accounts = 500;
  auto data = synth_legit_data(cfg, 3);
  std::vector<std::string> ids;
  for (const auto& s : data.samples) ids.insert(ids.end(), s.tensor.internal_ids.begin(), s.tensor.internal_ids.end());
  ids.resize(5);
  std::vector<TransactionRecord> records;
  for (const auto& r : data.records) {
    for (const auto& id : ids) {
      if (r.source_id == id || r.dest_id == id) records.push_back(r);
    }
  }
  for (auto _ : state) {
    auto t = tensorize(records, ids, cfg.window_seconds(), cfg.origin, cfg.shape);
    benchmark::DoNotOptimize(t.amounts);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_Tensorize);

static void BM_GeneratorForward(benchmark::State& state) {
  auto cfg = AmlExperimentConfig::desk_scale();
  cfg.sync_shapes();
  torch::manual_seed(0);
  AmlGenerator g(cfg.generator);
  torch::NoGradGuard no_grad;
  auto z = torch::randn({state.range(0), cfg.generator.noise_dim});
  for (auto _ : state) benchmark::DoNotOptimize(g->forward(z));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratorForward)->Arg(32);

static void BM_CriticForward(benchmark::State& state) {
  auto cfg = AmlExperimentConfig::desk_scale();
  cfg.sync_shapes();
  torch::manual_seed(0);
  AmlDiscriminator d(cfg.discriminator);
  torch::NoGradGuard no_grad;
  auto x = random_flows(state.range(0)).to(torch::kFloat32);
  auto packed = pack_flows(x);
  for (auto _ : state) benchmark::DoNotOptimize(d->forward_packed(packed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CriticForward)->Arg(32);
