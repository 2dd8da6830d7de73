#include <benchmark/benchmark.h>

#include "prcut/objective.hpp"
#include "prcut/random.hpp"

using namespace prcut;

namespace {

Matrix stochastic(Rng& rng, Eigen::Index n, Eigen::Index k) {
  Matrix p(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < k; ++l) p(i, l) = std::exp(rng.normal());
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

SparseSimilarity ring_graph(std::size_t n, std::size_t reach) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 1; d <= reach; ++d) {
      const std::size_t j = (i + d) % n;
      edges.push_back({std::min(i, j), std::max(i, j), 1.0});
    }
  }
  return SparseSimilarity::from_edges(n, edges);
}

void BM_ExactExpectedRcut(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto graph = ring_graph(n, 5);
  const AssignmentMatrix p(stochastic(rng, static_cast<Eigen::Index>(n), 4));
  for (auto _ : state) benchmark::DoNotOptimize(exact_expected_rcut(graph, p));
}
BENCHMARK(BM_ExactExpectedRcut)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_LrcLossAndGrad(benchmark::State& state) {
  const auto b = static_cast<Eigen::Index>(state.range(0));
  const Eigen::Index k = 10;
  Rng rng(2);
  Matrix w(b, b);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform() < 0.05 ? 1.0 : 0.0;
  const Matrix pl = stochastic(rng, b, k);
  const Matrix pr = stochastic(rng, b, k);
  const Vector pbar = Vector::Constant(k, 1.0 / static_cast<double>(k));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lrc_loss(w, pl, pr, pbar, true));
    benchmark::DoNotOptimize(lrc_grad(w, pl, pr, pbar, static_cast<double>(b), GradientMode::analytic, true));
  }
}
BENCHMARK(BM_LrcLossAndGrad)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace
