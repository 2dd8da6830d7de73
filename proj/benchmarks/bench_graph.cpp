#include <benchmark/benchmark.h>

#include "prcut/baselines.hpp"
#include "prcut/data.hpp"
#include "prcut/graph.hpp"

using namespace prcut;

namespace {

Dataset moons(std::size_t n) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::two_moons;
  spec.n = n;
  spec.noise = 0.1;
  return make_synthetic(spec);
}

void BM_KnnGraph(benchmark::State& state) {
  const auto data = moons(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(knn_graph(data.features, 10));
}
BENCHMARK(BM_KnnGraph)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_SpectralClustering(benchmark::State& state) {
  const auto data = moons(static_cast<std::size_t>(state.range(0)));
  const auto graph = knn_graph(data.features, 10);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_clustering(graph, 2, 5, 0));
}
BENCHMARK(BM_SpectralClustering)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
