#include <benchmark/benchmark.h>

#include "objgan/theory_toy.hpp"

using namespace objgan::theory;

static void BM_SimulateFlow(benchmark::State& state) {
  auto p = GaussianToyParams::from_k(0.0, 4.0, 0.5, 0.05);
  for (auto _ : state) {
    auto t = simulate_flow(p, state.range(0), 1e-3);
    benchmark::DoNotOptimize(t.mu_g_values.back());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateFlow)->Arg(5000)->Arg(50000);

static void BM_PhasePortrait(benchmark::State& state) {
  std::vector<double> mus, alphas;
  for (int i = 0; i < 200; ++i) mus.push_back(-10.0 + 0.2 * i);
  for (int i = 0; i <= 100; ++i) alphas.push_back(i / 100.0);
  GaussianToyParams p;
  for (auto _ : state) benchmark::DoNotOptimize(phase_portrait(mus, alphas, p).field.size());
}
BENCHMARK(BM_PhasePortrait);
