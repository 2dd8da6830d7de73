#include <benchmark/benchmark.h>

#include "prcut/data.hpp"
#include "prcut/trainer.hpp"

using namespace prcut;

namespace {

// Per-step cost, measured over short fixed-length runs.
void BM_TrainSteps(benchmark::State& state) {
  SyntheticSpec spec;
  spec.n = 4096;
  spec.classes = 10;
  spec.dim = 32;
  const Dataset data = make_synthetic(spec);
  TrainConfig cfg;
  cfg.batch_size = static_cast<std::size_t>(state.range(0));
  cfg.steps = 20;
  cfg.kernel.kind = KernelKind::label_equality;
  if (state.range(1) > 0) cfg.hidden = {static_cast<int>(state.range(1)), static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(train(data, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_TrainSteps)
    ->Args({256, 0})
    ->Args({256, 64})
    ->Args({1024, 64})
    ->Unit(benchmark::kMillisecond);

}  // namespace
