#include "mlkm/baselines.hpp"
#include "mlkm/features.hpp"
#include "mlkm/network.hpp"
#include "mlkm/simdata.hpp"
#include "mlkm/training.hpp"

#include <benchmark/benchmark.h>

using namespace mlkm;

namespace {

Dataset sample(std::size_t n) {
  Scenario sc;
  sc.kind = ScenarioKind::Additive1;
  sc.n = n;
  sc.seed = 1;
  return generate(sc);
}

Architecture example_arch() {
  return Architecture::parse("4-32-8-1", {KernelSpec::gaussian(0.5), KernelSpec::gaussian(1.0)});
}

void BM_FeatureMap(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = sample(n);
  const FeatureMap fm = spectral_sample(KernelSpec::gaussian(1.0), 4, 500, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fm.apply_batch(data.x));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_FeatureMap)->Arg(1000)->Arg(4000);

void BM_Backward(benchmark::State& state) {
  const Dataset data = sample(static_cast<std::size_t>(state.range(0)));
  const auto arch = example_arch();
  const Network net = make_network(arch, 3);
  const Weights w = init_weights(arch, 4);
  for (auto _ : state) benchmark::DoNotOptimize(backward(net, w, data.x, data.y));
}
BENCHMARK(BM_Backward)->Arg(1000)->Arg(4000);

void BM_AddsEpoch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = sample(n);
  const auto arch = example_arch();
  const Network net = make_network(arch, 5);
  const FoldPlan plan = make_fold_plan(n, arch.num_layers(), 6);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.max_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(adds_fit(data, net, plan, cfg));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_AddsEpoch)->RangeMultiplier(2)->Range(1000, 8000)->Complexity(benchmark::oN);

void BM_KrrFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = sample(n);
  for (auto _ : state) benchmark::DoNotOptimize(krr_fit(data.x, data.y, KernelSpec::gaussian(1.0), 1e-3));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_KrrFit)->RangeMultiplier(2)->Range(250, 2000)->Complexity(benchmark::oNCubed);

}  // namespace
BENCHMARK_MAIN();
