#include <benchmark/benchmark.h>

#include <ATen/CPUGeneratorImpl.h>

#include "objgan/recsys/attacks.hpp"
#include "objgan/recsys/ratings.hpp"
#include "objgan/recsys/recommender.hpp"

using namespace objgan::recsys;

namespace {

const RatingsMatrix& ratings() {
  static const RatingsMatrix r = [] {
    SyntheticRatingsConfig cfg;
    cfg.users = 1500;
    cfg.items = 1000;
    return synth_ratings(cfg, 0);
  }();
  return r;
}

}  // namespace

static void BM_PredictRatings(benchmark::State& state) {
  const auto& r = ratings();
  RecommenderConfig cfg;
  cfg.neighbor_count = state.range(0);
  auto values = r.values.to(torch::kFloat64);
  for (auto _ : state) benchmark::DoNotOptimize(predict_ratings(values, cfg));
}
BENCHMARK(BM_PredictRatings)->Arg(50)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_AffectedUsers(benchmark::State& state) {
  const auto& r = ratings();
  RecommenderConfig cfg;
  cfg.target_item = choose_target_item(r, 1);
  AttackEvaluator evaluator(r, cfg);
  auto attack = baseline_attack(BaselineKind::Random, 120, cfg.target_item, item_stats(r), 1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluator.affected_users(attack, state.range(0)));
}
BENCHMARK(BM_AffectedUsers)->Arg(30)->Arg(120)->Unit(benchmark::kMillisecond);

static void BM_InjectionObjective(benchmark::State& state) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(2);
  auto p = torch::rand({1500, 1000}, gen, torch::kFloat64) * 5;
  for (auto _ : state) benchmark::DoNotOptimize(injection_objective(p, 7));
}
BENCHMARK(BM_InjectionObjective);
